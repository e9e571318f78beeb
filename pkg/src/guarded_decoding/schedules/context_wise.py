"""
Context-wise schedule: the closer the candidates are to the demonstration
examples, the sooner the next validation.
"""
import math
from typing import Optional

import numpy as np

from .base import SimilarityStats, ValidationSchedule
from ..core.enums import SimilarityAggregation

# 2**62 already exceeds any reachable step
MAX_EXPONENT = 62.0


class ContextWiseSchedule(ValidationSchedule):
    """
    next = cur + ceil(2 ** (lam * (thrv - s)))

    where s aggregates the similarities of the candidates accepted at the
    current step: the smallest candidate/example similarity (MIN_PAIRS) or
    the largest per-candidate maximum (MAX_OF_MAX).
    """

    def __init__(
        self,
        lam: float,
        thrv: float,
        aggregation: SimilarityAggregation = SimilarityAggregation.MIN_PAIRS
    ):
        """
        Initialize schedule.

        Args:
            lam: Intensity (> 0); larger values allow longer gaps
            thrv: Validation threshold
            aggregation: Similarity reduction
        """
        if lam <= 0:
            raise ValueError("Lambda must be positive")
        self.lam = lam
        self.thrv = thrv
        self.aggregation = aggregation

    def aggregate(self, stats: Optional[SimilarityStats]) -> float:
        """Reduce the similarity statistics to the scalar s."""
        if stats is None or len(stats) == 0:
            raise ValueError("Context-wise scheduling needs the similarities of the current candidates")
        if self.aggregation == SimilarityAggregation.MIN_PAIRS:
            return float(np.min(stats.min_scores))
        return float(np.max(stats.max_scores))

    def gap(self, similarity: float) -> int:
        """
        Steps until the next validation for aggregate similarity ``similarity``.

        Intermediate values are rounded to 9 decimals so that decimal inputs
        such as s = 0.28 give the exact power of two.
        """
        exponent = min(round(self.lam * (self.thrv - similarity), 9), MAX_EXPONENT)
        return max(1, math.ceil(round(2.0 ** exponent, 9)))

    def advance(self, cur_step: int, stats: Optional[SimilarityStats]) -> int:
        return cur_step + self.gap(self.aggregate(stats))

    def __repr__(self) -> str:
        return (
            f"ContextWiseSchedule(lam={self.lam}, thrv={self.thrv}, "
            f"aggregation={self.aggregation.value})"
        )
