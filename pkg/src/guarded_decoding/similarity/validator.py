"""
Similarity-based candidate validation against a demonstration store.
"""
from dataclasses import dataclass, field
from typing import Iterable, List, Optional

import numpy as np

from .store import DemonstrationStore


@dataclass
class ValidationOutcome:
    """
    Verdicts for one batch of candidates, in input order.

    Attributes:
        valid: Indices of candidates scoring strictly below the threshold
        invalid: Indices of candidates scoring at or above the threshold
        scores: Per-candidate max similarity to the store
        nearest: Per-candidate nearest example id
        min_scores: Per-candidate min similarity to the store
    """
    valid: List[int]
    invalid: List[int]
    scores: np.ndarray
    nearest: List[Optional[str]]
    min_scores: np.ndarray

    def __len__(self) -> int:
        return len(self.scores)


def validate(
    vectors: np.ndarray,
    thrv: float,
    store: DemonstrationStore
) -> ValidationOutcome:
    """
    Partition candidates by their maximum similarity to the store.

    A candidate is valid iff its score is strictly below ``thrv``.

    Args:
        vectors: Candidate embeddings, shape (n, dimension), n >= 1
        thrv: Similarity threshold in (0, 1]
        store: Examples to compare against (possibly a sampled subset)

    Returns:
        ValidationOutcome
    """
    if not 0 < thrv <= 1:
        raise ValueError("Validation threshold must be in (0, 1]")
    vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
    if len(vectors) == 0:
        raise ValueError("Nothing to validate")

    scan = store.max_similarity_many(vectors)
    passed = scan.max_scores < thrv
    return ValidationOutcome(
        valid=np.flatnonzero(passed).tolist(),
        invalid=np.flatnonzero(~passed).tolist(),
        scores=scan.max_scores,
        nearest=scan.nearest_ids,
        min_scores=scan.min_scores,
    )


@dataclass
class StepTally:
    """Running invalid/examined counts for the validations of one time step."""
    examined: int = 0
    invalid: int = 0
    outcomes: List[ValidationOutcome] = field(default_factory=list)

    def record(self, outcome: ValidationOutcome) -> None:
        self.examined += len(outcome)
        self.invalid += len(outcome.invalid)
        self.outcomes.append(outcome)

    @property
    def invalid_proportion(self) -> float:
        if self.examined == 0:
            raise ValueError("No validation has been performed at this step")
        return self.invalid / self.examined


def invalid_proportion(outcomes: Iterable[ValidationOutcome]) -> float:
    """
    Cumulative share of invalid candidates over a step's validations.

    Args:
        outcomes: Every validation performed during the current time step

    Returns:
        Proportion in [0, 1]
    """
    examined = 0
    invalid = 0
    for outcome in outcomes:
        examined += len(outcome)
        invalid += len(outcome.invalid)
    if examined == 0:
        raise ValueError("No validation has been performed at this step")
    return invalid / examined
