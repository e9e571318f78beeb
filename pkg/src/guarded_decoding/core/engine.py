"""
Guarded beam search: beam decoding with similarity validation, refill of
rejected candidates and rollback to earlier validated steps.
"""
import logging
import time
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, Iterable, List, Sequence, Set, Tuple

import numpy as np

from .exceptions import RollbackExhausted, SafetyExhausted
from .parameters import Candidate, GuardConfig, RunCounters, RunReport
from ..models.base import LanguageModel
from ..schedules import SimilarityStats, build_schedule
from ..similarity.store import DemonstrationStore
from ..similarity.validator import StepTally, ValidationOutcome, validate

logger = logging.getLogger(__name__)

TokenSeq = Tuple[int, ...]


class BannedSet:
    """
    Set of token sequences indexed by parent prefix.

    ``children_of(prefix)`` returns the final tokens of every banned
    sequence extending ``prefix`` by one token.
    """

    def __init__(self, sequences: Iterable[Sequence[int]] = ()):
        self._items: Set[TokenSeq] = set()
        self._children: Dict[TokenSeq, Set[int]] = defaultdict(set)
        for seq in sequences:
            self.add(seq)

    @classmethod
    def coerce(cls, sequences) -> "BannedSet":
        return sequences if isinstance(sequences, BannedSet) else cls(sequences or ())

    def add(self, sequence: Sequence[int]) -> None:
        seq = tuple(sequence)
        if not seq or seq in self._items:
            return
        self._items.add(seq)
        self._children[seq[:-1]].add(seq[-1])

    def children_of(self, prefix: TokenSeq) -> Set[int]:
        return self._children.get(prefix, set())

    def __contains__(self, sequence) -> bool:
        return tuple(sequence) in self._items

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)


@dataclass(frozen=True)
class SearchSnapshot:
    """
    Search state after a successful validation.

    Attributes:
        step: Validated step (-1 for the empty initial state)
        beam: Candidates kept at that step, best first
        next_validation: Step the schedule chose after it
    """
    step: int
    beam: Tuple[Candidate, ...]
    next_validation: int


def generate_next_candidates(
    model: LanguageModel,
    prompt: Sequence[int],
    beam: Sequence[Candidate],
    need: int,
    banned=(),
    exclude=()
) -> Tuple[List[Candidate], bool]:
    """
    The ``need`` most likely one-token extensions of a beam.

    Finished candidates compete unchanged. Extensions with zero probability,
    extensions in ``banned`` and sequences in ``exclude`` are skipped.

    Args:
        model: Next-token distribution provider
        prompt: Prompt token ids
        beam: Current candidates
        need: Number of candidates wanted (>= 1)
        banned: Rejected token sequences (BannedSet or iterable of sequences)
        exclude: Sequences already examined at this step

    Returns:
        (candidates ordered by likelihood then token order, exhausted) where
        exhausted is True when no further candidates remain
    """
    if need < 1:
        raise ValueError("Need at least one candidate")
    banned = BannedSet.coerce(banned)
    exclude = BannedSet.coerce(exclude)

    alive = [c for c in beam if c.alive]
    finished = [
        c for c in beam
        if not c.alive and c.tokens not in banned and c.tokens not in exclude
    ]

    size = len(model.vocabulary)
    eos = model.vocabulary.eos_id
    prompt = list(prompt)
    if alive:
        scores = np.empty((len(alive), size))
        for row, parent in enumerate(alive):
            scores[row] = parent.cum_loglik + model.next_log_distribution(prompt + list(parent.tokens))
            blocked = banned.children_of(parent.tokens) | exclude.children_of(parent.tokens)
            if blocked:
                scores[row, list(blocked)] = -np.inf
        flat = scores.ravel()
    else:
        flat = np.empty(0)
    carried = np.array([c.cum_loglik for c in finished], dtype=float)

    all_scores = np.concatenate([flat, carried])
    finite = np.flatnonzero(np.isfinite(all_scores))
    available = len(finite)
    if available == 0:
        return [], True

    take = min(need, available)
    values = all_scores[finite]
    threshold = -np.partition(-values, take - 1)[take - 1]
    chosen = finite[values >= threshold]

    pool = []
    for index in chosen:
        if index < len(flat):
            row, tok = divmod(int(index), size)
            parent = alive[row]
            pool.append(Candidate(parent.tokens + (tok,), float(flat[index]), tok != eos))
        else:
            pool.append(finished[int(index) - len(flat)])
    pool.sort(key=lambda c: c.sort_key)
    return pool[:take], available <= need


def beam_search(
    model: LanguageModel,
    prompt: Sequence[int],
    beam_K: int,
    max_token: int
) -> List[Candidate]:
    """
    Unguarded beam search keeping 2K candidates per step.

    Stops early once every candidate has emitted EOS.

    Returns:
        Top-K candidates of the final beam
    """
    if beam_K < 1 or max_token < 1:
        raise ValueError("Beam size and max tokens must be at least 1")
    beam = [Candidate()]
    for _ in range(max_token):
        beam, _ = generate_next_candidates(model, prompt, beam, 2 * beam_K)
        if not any(c.alive for c in beam):
            break
    return beam[:beam_K]


def greedy_decode(model: LanguageModel, prompt: Sequence[int], max_token: int) -> Candidate:
    """Repeatedly append the most likely token (lowest id on ties) until EOS or max_token."""
    eos = model.vocabulary.eos_id
    tokens: List[int] = []
    cum = 0.0
    for _ in range(max_token):
        logp = model.next_log_distribution(list(prompt) + tokens)
        tok = int(np.argmax(logp))
        cum = float(cum + logp[tok])
        tokens.append(tok)
        if tok == eos:
            return Candidate(tuple(tokens), cum, False)
    return Candidate(tuple(tokens), cum, True)


class _Rollback(Exception):
    """Internal signal: the current step was abandoned."""


class GuardedBeamSearch:
    """
    Beam search whose candidates are validated against demonstration examples.

    At each validation step the top 2K extensions are embedded and scored;
    rejected ones are banned and replaced by the next most likely extensions
    until 2K valid candidates are found. When the proportion of rejected
    candidates reaches ``thr_rb`` the search returns to the most recent
    validated step, banning the path it abandons.
    """

    def __init__(
        self,
        model: LanguageModel,
        store: DemonstrationStore,
        config: GuardConfig
    ):
        """
        Initialize engine.

        Args:
            model: Next-token distribution provider
            store: Full demonstration store (sampled per ``config``)
            config: Search configuration
        """
        self.model = model
        self.store = store
        self.config = config
        self.subset = store.representatives(config.store, config.seed)
        self.schedule = build_schedule(config.schedule)

    def run(self, prompt: Sequence[int]) -> RunReport:
        """
        Decode one prompt.

        Args:
            prompt: Prompt token ids

        Returns:
            RunReport with the top-K validated continuations and counters

        Raises:
            SafetyExhausted: a step accepted no candidate and there was no earlier step to return to
            RollbackExhausted: the rollback budget was exceeded
        """
        size = len(self.model.vocabulary)
        if any(not 0 <= tok < size for tok in prompt):
            raise ValueError("Prompt contains ids outside the vocabulary")

        start_time = time.time()
        run = _SearchRun(self, list(prompt))
        beam = run.search()
        wall_time = time.time() - start_time

        logger.debug(
            "Run finished: %d steps validated, %d validations, %d rollbacks, %.3fs",
            run.counters.steps_validated, run.counters.validations,
            run.counters.rollbacks, wall_time
        )
        return RunReport(
            outputs=list(beam[:self.config.beam_K]),
            counters=run.counters,
            wall_time=wall_time,
            validation_time=run.validation_time,
            subset_size=len(self.subset),
        )

    def __repr__(self) -> str:
        return (
            f"GuardedBeamSearch(K={self.config.beam_K}, MT={self.config.max_token}, "
            f"thrv={self.config.thrv}, schedule={self.schedule}, subset={len(self.subset)})"
        )


class _SearchRun:
    """Mutable state of a single guarded search."""

    def __init__(self, engine: GuardedBeamSearch, prompt: List[int]):
        self.model = engine.model
        self.subset = engine.subset
        self.config = engine.config
        self.schedule = engine.schedule
        self.prompt = prompt

        self.counters = RunCounters()
        self.validation_time = 0.0
        self.banned = BannedSet()
        self._vectors: Dict[TokenSeq, np.ndarray] = {}

        first = self.schedule.first_step
        self.snapshots: List[SearchSnapshot] = [SearchSnapshot(-1, (Candidate(),), first)]
        self.beam: List[Candidate] = [Candidate()]
        self.step = 0
        self.next_validation = first

    def search(self) -> List[Candidate]:
        cfg = self.config
        last = cfg.max_token - 1
        while self.step < cfg.max_token:
            validating = self.step >= self.next_validation or self.step == last
            if not validating:
                batch, _ = generate_next_candidates(
                    self.model, self.prompt, self.beam, cfg.width, self.banned
                )
                if batch and any(c.alive for c in batch):
                    self.beam = batch
                    self.step += 1
                    continue
                # finishing here would emit unvalidated text, validate instead

            try:
                self.beam, stats = self._validated_step()
            except _Rollback:
                continue

            self.counters.steps_validated += 1
            self.next_validation = self.schedule.next_validation_step(self.step, stats, cfg.max_token)
            self.snapshots.append(SearchSnapshot(self.step, tuple(self.beam), self.next_validation))
            logger.debug("Step %d validated; next validation at %d", self.step, self.next_validation)
            self.step += 1
            if not any(c.alive for c in self.beam):
                break
        return self.beam

    def _validated_step(self) -> Tuple[List[Candidate], SimilarityStats]:
        cfg = self.config
        tally = StepTally()
        accepted: List[Candidate] = []
        max_scores: List[float] = []
        min_scores: List[float] = []
        examined = BannedSet()
        rounds = 0

        while len(accepted) < cfg.width:
            if rounds >= cfg.attempt_budget:
                # keep whatever was accepted, otherwise fall back to rollback
                logger.debug("Step %d: refill budget of %d rounds spent with %d accepted",
                             self.step, rounds, len(accepted))
                break
            batch, exhausted = generate_next_candidates(
                self.model, self.prompt, self.beam, cfg.width - len(accepted),
                self.banned, examined
            )
            if not batch:
                break
            rounds += 1
            self.counters.refill_rounds += 1

            outcome = self._validate(batch)
            tally.record(outcome)
            for i in outcome.valid:
                accepted.append(batch[i])
                max_scores.append(float(outcome.scores[i]))
                min_scores.append(float(outcome.min_scores[i]))
            for i in outcome.invalid:
                self.banned.add(batch[i].tokens)
            for cand in batch:
                examined.add(cand.tokens)

            logger.debug(
                "Step %d round %d: %d/%d invalid (step proportion %.3f)",
                self.step, rounds, len(outcome.invalid), len(batch), tally.invalid_proportion
            )
            if tally.invalid_proportion >= cfg.thr_rb and self._rollback(examined):
                raise _Rollback()
            if exhausted:
                break

        if not accepted:
            if self._rollback(examined):
                raise _Rollback()
            raise SafetyExhausted(
                self.step, rounds,
                f"no valid candidate at step {self.step} after {rounds} refill rounds and "
                f"no earlier validated step to return to"
            )

        order = sorted(range(len(accepted)), key=lambda i: accepted[i].sort_key)
        stats = SimilarityStats(
            np.array([max_scores[i] for i in order]),
            np.array([min_scores[i] for i in order]),
        )
        return [accepted[i] for i in order], stats

    def _validate(self, batch: List[Candidate]) -> ValidationOutcome:
        start = time.time()
        vectors = np.vstack([self._embed(c.tokens) for c in batch])
        outcome = validate(vectors, self.config.thrv, self.subset)
        self.validation_time += time.time() - start
        self.counters.validations += 1
        return outcome

    def _embed(self, tokens: TokenSeq) -> np.ndarray:
        vector = self._vectors.get(tokens)
        if vector is None:
            eos = self.model.vocabulary.eos_id
            words = self.model.vocabulary.decode(t for t in tokens if t != eos)
            vector = self.subset.embed(words)
            self._vectors[tokens] = vector
        return vector

    def _rollback(self, examined: BannedSet) -> bool:
        """
        Return to the most recent validated step that can still make progress.

        The candidates examined at the abandoned step (or, when none could be
        generated, the alive beam) are banned by their prefix at the step
        following the target. Returns False when there is nowhere to go.
        """
        abandoned = list(examined) or [c.tokens for c in self.beam if c.alive]
        top = self.snapshots[-1]
        if top.step == self.step - 1:
            # the current beam is the top snapshot itself
            if len(self.snapshots) == 1:
                return False
            self.snapshots.pop()
        target = self.snapshots[-1]

        self.counters.rollbacks += 1
        if self.counters.rollbacks > self.config.rollback_budget:
            raise RollbackExhausted(self.counters.rollbacks)

        cut = target.step + 2
        for tokens in abandoned:
            if len(tokens) >= cut:
                self.banned.add(tokens[:cut])

        logger.warning(
            "Rollback %d: step %d abandoned, resuming after step %d",
            self.counters.rollbacks, self.step, target.step
        )
        self.beam = list(target.beam)
        self.step = target.step + 1
        self.next_validation = self.step
        return True
