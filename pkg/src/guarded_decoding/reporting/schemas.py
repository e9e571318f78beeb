"""
Pydantic models for experiment configuration files and report documents.
"""
import math
from typing import Any, Dict, List, Optional

from pydantic import BaseModel, Field

from ..core.enums import PromptStatus, SimilarityAggregation, TaskType
from ..core.parameters import RunReport

SCHEMA_VERSION = 1


class OutputReportModel(BaseModel):
    """One emitted continuation."""
    text: str
    length: int
    loglik: float
    ppl: Optional[float] = None
    lcs: Optional[int] = None
    lcs_norm: Optional[float] = None
    substring: Optional[int] = None
    violation_score: float


class PromptReportModel(BaseModel):
    """Result of one prompt in one repetition."""
    prompt_id: str
    rep: int
    seed: int
    status: PromptStatus
    error: Optional[str] = None
    subset_size: int
    steps_validated: int
    validations: int
    rollbacks: int
    refill_rounds: int
    wall_time: float
    validation_time: float
    outputs: List[OutputReportModel] = Field(default_factory=list)

    @classmethod
    def from_run(cls, prompt_id: str, rep: int, seed: int, report: RunReport) -> "PromptReportModel":
        outputs = [
            OutputReportModel(
                text=m.text,
                length=m.length,
                loglik=cand.cum_loglik,
                ppl=m.ppl,
                lcs=m.lcs,
                lcs_norm=m.lcs_norm,
                substring=m.substring,
                violation_score=m.violation_score,
            )
            for cand, m in zip(report.outputs, report.metrics)
        ]
        return cls(
            prompt_id=prompt_id,
            rep=rep,
            seed=seed,
            status=report.status,
            error=report.error,
            subset_size=report.subset_size,
            steps_validated=report.counters.steps_validated,
            validations=report.counters.validations,
            rollbacks=report.counters.rollbacks,
            refill_rounds=report.counters.refill_rounds,
            wall_time=report.wall_time,
            validation_time=report.validation_time,
            outputs=outputs,
        )


class AggregateRowModel(BaseModel):
    """
    Means over successful runs (and over their outputs for the text metrics).

    Metrics that do not apply to the task, such as LCS without references,
    are None.
    """
    label: str
    n_prompts: int
    n_runs: int
    n_failed: int
    n_safety_exhausted: int
    n_rollback_exhausted: int
    mean_time: Optional[float] = None
    median_time: Optional[float] = None
    ppl: Optional[float] = None
    n_infinite_ppl: int = 0
    lcs: Optional[float] = None
    lcs_norm: Optional[float] = None
    substring: Optional[float] = None
    violation_score: Optional[float] = None
    violation_rate: Optional[float] = None
    steps_validated: Optional[float] = None
    validations: Optional[float] = None
    rollbacks: Optional[float] = None
    subset_size: Optional[float] = None

    @staticmethod
    def clean(value: Any) -> Optional[float]:
        """Map NaN (pandas' empty mean) to None."""
        if value is None:
            return None
        value = float(value)
        return None if math.isnan(value) else value


class ExperimentReportModel(BaseModel):
    """Top-level report.json document."""
    schema_version: int = SCHEMA_VERSION
    task: TaskType
    guarded: bool
    config: Dict[str, Any]
    aggregate: AggregateRowModel
    prompts: List[PromptReportModel]


class ExperimentConfigModel(BaseModel):
    """
    JSON experiment file accepted by ``--config``.

    Every field is optional; command-line flags override file values.
    """
    task: Optional[TaskType] = None
    corpus: Optional[List[str]] = None
    examples: Optional[str] = None
    prompts: Optional[str] = None
    beam_size: Optional[int] = Field(None, ge=1)
    max_tokens: Optional[int] = Field(None, ge=1)
    thrv: Optional[float] = Field(None, gt=0, le=1)
    thr_rb: Optional[float] = Field(None, gt=0, le=1)
    lam: Optional[float] = Field(None, gt=0, alias="lambda")
    ratio: Optional[float] = Field(None, gt=0, le=1)
    schedule: Optional[str] = None
    sched_agg: Optional[SimilarityAggregation] = None
    seed: Optional[int] = None
    reps: Optional[int] = Field(None, ge=1)
    out: Optional[str] = None
    no_guard: Optional[bool] = None
    embed_dim: Optional[int] = Field(None, ge=2)
    hash_seed: Optional[int] = None
    order: Optional[int] = Field(None, ge=1)
    smoothing: Optional[float] = Field(None, ge=0)
    workers: Optional[int] = Field(None, ge=1)
    no_cluster: Optional[bool] = None
    attempt_budget: Optional[int] = Field(None, ge=1)
    rollback_budget: Optional[int] = Field(None, ge=1)

    model_config = {"extra": "forbid", "populate_by_name": True}
