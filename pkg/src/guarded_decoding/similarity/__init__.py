"""Embedding, clustering, demonstration store and validation."""

from .clustering import MeanShift, estimate_bandwidth
from .embedder import HashingEmbedder, cosine
from .store import (
    DemonstrationExample,
    DemonstrationStore,
    SimilarityScan,
    cluster_sizes,
    load_examples,
)
from .validator import StepTally, ValidationOutcome, invalid_proportion, validate

__all__ = [
    "HashingEmbedder",
    "cosine",
    "MeanShift",
    "estimate_bandwidth",
    "DemonstrationExample",
    "DemonstrationStore",
    "SimilarityScan",
    "cluster_sizes",
    "load_examples",
    "ValidationOutcome",
    "StepTally",
    "validate",
    "invalid_proportion",
]
