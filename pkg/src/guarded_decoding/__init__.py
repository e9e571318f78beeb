"""
Guarded Decoding

Beam search whose candidates are checked against a store of demonstration
examples, with rollback, context-wise validation scheduling and an
experiment harness over n-gram language models.
"""

__version__ = "0.1.0"

from .core.engine import GuardedBeamSearch, beam_search, greedy_decode
from .core.parameters import (
    Candidate,
    GuardConfig,
    RunReport,
    SchedulePolicy,
    StoreConfig,
)
from .core.enums import (
    PromptStatus,
    ScheduleKind,
    SimilarityAggregation,
    TaskType,
)
from .core.exceptions import (
    GuardedDecodingError,
    RollbackExhausted,
    SafetyExhausted,
)
from .models.ngram import NgramModel
from .models.vocabulary import Vocabulary, load_corpus, tokenize
from .similarity.embedder import HashingEmbedder, cosine
from .similarity.store import DemonstrationStore
from .similarity.validator import validate
from .schedules.policy import build_schedule, parse_schedule
from .utils.experiment import ExperimentSpec, run_experiment, sweep

__all__ = [
    # Core
    "GuardedBeamSearch",
    "beam_search",
    "greedy_decode",
    # Parameters
    "Candidate",
    "GuardConfig",
    "RunReport",
    "SchedulePolicy",
    "StoreConfig",
    # Enums
    "PromptStatus",
    "ScheduleKind",
    "SimilarityAggregation",
    "TaskType",
    # Exceptions
    "GuardedDecodingError",
    "SafetyExhausted",
    "RollbackExhausted",
    # Models
    "NgramModel",
    "Vocabulary",
    "load_corpus",
    "tokenize",
    # Similarity
    "HashingEmbedder",
    "cosine",
    "DemonstrationStore",
    "validate",
    # Schedules
    "build_schedule",
    "parse_schedule",
    # Experiments
    "ExperimentSpec",
    "run_experiment",
    "sweep",
]
