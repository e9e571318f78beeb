"""
Enumerations for schedules, similarity aggregation, tasks and run status.
"""
from enum import Enum


class ScheduleKind(Enum):
    """When the validator is consulted during decoding."""
    CONTEXT_WISE = "contextwise"
    STEP1 = "step1"
    STEP_K = "stepk"
    EXPONENTIAL = "exp"


class SimilarityAggregation(Enum):
    """Reduction of candidate-to-example similarities fed to the context-wise schedule."""
    MIN_PAIRS = "min"
    MAX_OF_MAX = "maxmax"


class TaskType(Enum):
    """Experiment flavour."""
    DETOX = "detox"
    COPYRIGHT = "copyright"


class PromptStatus(Enum):
    """Outcome of decoding a single prompt."""
    OK = "ok"
    SAFETY_EXHAUSTED = "safety_exhausted"
    ROLLBACK_EXHAUSTED = "rollback_exhausted"
