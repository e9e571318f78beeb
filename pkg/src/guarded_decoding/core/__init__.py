"""Core guarded decoding engine and parameters."""

from .engine import (
    BannedSet,
    GuardedBeamSearch,
    SearchSnapshot,
    beam_search,
    generate_next_candidates,
    greedy_decode,
)
from .parameters import (
    Candidate,
    GuardConfig,
    OutputMetrics,
    RunCounters,
    RunReport,
    SchedulePolicy,
    StoreConfig,
)
from .enums import (
    PromptStatus,
    ScheduleKind,
    SimilarityAggregation,
    TaskType,
)
from .exceptions import (
    DimensionMismatchError,
    EmptyCorpusError,
    GuardedDecodingError,
    InfinitePerplexityError,
    RollbackExhausted,
    SafetyExhausted,
    StoreFormatError,
)

__all__ = [
    "GuardedBeamSearch",
    "BannedSet",
    "SearchSnapshot",
    "beam_search",
    "generate_next_candidates",
    "greedy_decode",
    "Candidate",
    "GuardConfig",
    "OutputMetrics",
    "RunCounters",
    "RunReport",
    "SchedulePolicy",
    "StoreConfig",
    "PromptStatus",
    "ScheduleKind",
    "SimilarityAggregation",
    "TaskType",
    "GuardedDecodingError",
    "SafetyExhausted",
    "RollbackExhausted",
    "InfinitePerplexityError",
    "EmptyCorpusError",
    "DimensionMismatchError",
    "StoreFormatError",
]
