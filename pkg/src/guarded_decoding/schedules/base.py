"""
Base class for validation schedules.
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class SimilarityStats:
    """
    Similarities of the candidates accepted at a validated step.

    Attributes:
        max_scores: Per-candidate max similarity to the demonstration subset
        min_scores: Per-candidate min similarity to the demonstration subset
    """
    max_scores: np.ndarray
    min_scores: np.ndarray

    def __post_init__(self):
        self.max_scores = np.asarray(self.max_scores, dtype=float)
        self.min_scores = np.asarray(self.min_scores, dtype=float)
        if self.max_scores.shape != self.min_scores.shape:
            raise ValueError("Max and min similarity arrays must align")

    def __len__(self) -> int:
        return len(self.max_scores)


class ValidationSchedule(ABC):
    """
    Chooses the time step of the next validation.

    Steps are 0-based continuation positions. The returned step is always
    strictly later than the current one and, while the current step is
    before the last one, never beyond ``max_token - 1``.
    """

    #: First step at which the validator runs
    first_step: int = 0

    @abstractmethod
    def advance(self, cur_step: int, stats: Optional[SimilarityStats]) -> int:
        """Unclamped next validation step."""

    def next_validation_step(
        self,
        cur_step: int,
        stats: Optional[SimilarityStats],
        max_token: int
    ) -> int:
        """
        Next validation step, clamped to the final generation step.

        Args:
            cur_step: Step just validated (>= 0)
            stats: Similarities of the accepted candidates
            max_token: Maximum continuation length

        Returns:
            Step index greater than ``cur_step``
        """
        if cur_step < 0:
            raise ValueError("Current step must be non-negative")
        if max_token < 1:
            raise ValueError("Max tokens must be at least 1")

        nxt = self.advance(cur_step, stats)
        last = max_token - 1
        if cur_step < last:
            return min(nxt, last)
        return cur_step + 1

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}()"
