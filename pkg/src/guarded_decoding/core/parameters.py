"""
Parameter dataclasses for decoding, validation scheduling and run results.
"""
from dataclasses import dataclass, field, replace
from typing import List, Optional, Tuple, Union

from .enums import PromptStatus, ScheduleKind, SimilarityAggregation

DEFAULT_THRV = 0.3
DEFAULT_LAMBDA = 200.0


@dataclass
class SchedulePolicy:
    """
    When the validator runs.

    Attributes:
        kind: Schedule family
        lam: Intensity of the context-wise rule (larger allows longer gaps)
        thrv: Validation threshold the context-wise rule measures against
        aggregation: Similarity reduction fed to the context-wise rule
        step: Stride of the fixed-stride schedule
        base: Base of the exponential schedule
    """
    kind: ScheduleKind = ScheduleKind.CONTEXT_WISE
    lam: float = DEFAULT_LAMBDA
    thrv: float = DEFAULT_THRV
    aggregation: SimilarityAggregation = SimilarityAggregation.MIN_PAIRS
    step: int = 5
    base: int = 2

    def __post_init__(self):
        """Validate schedule parameters."""
        if self.lam <= 0:
            raise ValueError("Lambda must be positive")
        if self.step < 1:
            raise ValueError("Stride must be at least 1")
        if self.base < 2:
            raise ValueError("Exponential base must be at least 2")

    @property
    def label(self) -> str:
        """Command-line spelling of the policy."""
        if self.kind == ScheduleKind.STEP_K:
            return f"stepk:{self.step}"
        if self.kind == ScheduleKind.EXPONENTIAL:
            return f"exp:{self.base}"
        return self.kind.value


@dataclass
class StoreConfig:
    """
    Demonstration store reduction settings.

    Attributes:
        ratio_R: Share of each cluster kept for validation, in (0, 1]
        do_clustering: Cluster and sample; when False the full store is used
        bandwidth: Mean-shift bandwidth or "auto" (median pairwise distance)
        max_iterations: Mean-shift iteration cap
        shift_tolerance: Per-point convergence threshold
        cluster_seed: Seed of the bandwidth estimation sample
    """
    ratio_R: float = 1.0
    do_clustering: bool = True
    bandwidth: Union[float, str] = "auto"
    max_iterations: int = 300
    shift_tolerance: float = 1e-4
    cluster_seed: int = 0

    def __post_init__(self):
        """Validate store parameters."""
        if not 0 < self.ratio_R <= 1:
            raise ValueError("Ratio R must be in (0, 1]")
        if isinstance(self.bandwidth, str):
            if self.bandwidth != "auto":
                raise ValueError("Bandwidth must be positive or 'auto'")
        elif self.bandwidth <= 0:
            raise ValueError("Bandwidth must be positive or 'auto'")
        if self.max_iterations < 1:
            raise ValueError("Mean-shift iterations must be at least 1")
        if self.shift_tolerance <= 0:
            raise ValueError("Shift tolerance must be positive")


@dataclass
class GuardConfig:
    """
    Guarded beam-search configuration.

    ``thrv``, ``lam`` and ``ratio_R`` are authoritative: they are copied into
    ``schedule`` and ``store`` on construction.

    Attributes:
        beam_K: Number of emitted sequences; 2K candidates are kept per step
        max_token: Maximum continuation length MT
        thrv: Similarity threshold; scores at or above it are invalid
        thr_rb: Invalid proportion at a step that triggers rollback
        lam: Context-wise schedule intensity
        ratio_R: Share of each cluster kept for validation
        schedule: Validation schedule
        store: Clustering and sampling settings
        attempt_budget: Refill rounds allowed per validated step (default 16*K)
        rollback_budget: Rollbacks allowed per run
        seed: Seed of the representative sampling
    """
    beam_K: int = 3
    max_token: int = 20
    thrv: float = DEFAULT_THRV
    thr_rb: float = 1.0
    lam: float = DEFAULT_LAMBDA
    ratio_R: float = 1.0
    schedule: SchedulePolicy = field(default_factory=SchedulePolicy)
    store: StoreConfig = field(default_factory=StoreConfig)
    attempt_budget: Optional[int] = None
    rollback_budget: int = 8
    seed: int = 0

    def __post_init__(self):
        """Validate and synchronize nested configuration."""
        if self.beam_K < 1:
            raise ValueError("Beam size must be at least 1")
        if self.max_token < 1:
            raise ValueError("Max tokens must be at least 1")
        if not 0 < self.thrv <= 1:
            raise ValueError("Validation threshold must be in (0, 1]")
        if not 0 < self.thr_rb <= 1:
            raise ValueError("Rollback threshold must be in (0, 1]")
        if self.attempt_budget is None:
            self.attempt_budget = 16 * self.beam_K
        if self.attempt_budget < 1:
            raise ValueError("Attempt budget must be at least 1")
        if self.rollback_budget < 1:
            raise ValueError("Rollback budget must be at least 1")

        self.schedule = replace(self.schedule, thrv=self.thrv, lam=self.lam)
        self.store = replace(self.store, ratio_R=self.ratio_R)

    @property
    def width(self) -> int:
        """Number of live candidates kept per step."""
        return 2 * self.beam_K


@dataclass(frozen=True)
class Candidate:
    """
    A partial continuation.

    Attributes:
        tokens: Continuation token ids (prompt excluded)
        cum_loglik: Sum of log p(b_j | prompt, b_<j)
        alive: False once the continuation emitted EOS
    """
    tokens: Tuple[int, ...] = ()
    cum_loglik: float = 0.0
    alive: bool = True

    @property
    def sort_key(self) -> Tuple[float, Tuple[int, ...]]:
        """Higher likelihood first, then lexicographic token order."""
        return (-self.cum_loglik, self.tokens)

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class RunCounters:
    """
    Search effort counters.

    Attributes:
        steps_validated: Time steps at which the validator ran
        validations: Validator invocations (refill rounds included)
        rollbacks: Rollbacks performed
        refill_rounds: Candidate batches generated on validated steps
    """
    steps_validated: int = 0
    validations: int = 0
    rollbacks: int = 0
    refill_rounds: int = 0


@dataclass
class OutputMetrics:
    """
    Quality and safety scores of one emitted sequence.

    Attributes:
        text: Detokenized continuation (EOS dropped)
        length: Continuation length in tokens (EOS dropped)
        ppl: Perplexity under the model given the prompt; None when infinite
        lcs: Longest common subsequence with the reference
        lcs_norm: ``lcs`` divided by ``length``
        substring: Longest common contiguous run with the reference
        violation_score: Max similarity to the full demonstration store
    """
    text: str
    length: int
    ppl: Optional[float] = None
    lcs: Optional[int] = None
    lcs_norm: Optional[float] = None
    substring: Optional[int] = None
    violation_score: float = 0.0


@dataclass
class RunReport:
    """
    Result of decoding one prompt.

    Attributes:
        outputs: Top-K candidates of the final beam, best first
        counters: Search effort counters
        wall_time: Seconds spent in the run
        validation_time: Seconds spent inside the validator
        status: Completion status
        subset_size: Demonstration examples the validator compared against
        metrics: Per-output scores, filled by ``build_run_report``
        error: Failure message when status is not OK
    """
    outputs: List[Candidate] = field(default_factory=list)
    counters: RunCounters = field(default_factory=RunCounters)
    wall_time: float = 0.0
    validation_time: float = 0.0
    status: PromptStatus = PromptStatus.OK
    subset_size: int = 0
    metrics: List[OutputMetrics] = field(default_factory=list)
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.status == PromptStatus.OK
