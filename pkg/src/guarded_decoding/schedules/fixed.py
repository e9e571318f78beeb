"""
Context-free schedules: fixed stride and exponential spacing.
"""
from typing import Optional

from .base import SimilarityStats, ValidationSchedule


class StrideSchedule(ValidationSchedule):
    """
    Validate every ``k`` steps starting at step 0.

    ``k = 1`` validates every step.
    """

    def __init__(self, k: int = 1):
        if k < 1:
            raise ValueError("Stride must be at least 1")
        self.k = k

    def advance(self, cur_step: int, stats: Optional[SimilarityStats]) -> int:
        return cur_step + self.k

    def __repr__(self) -> str:
        return f"StrideSchedule(k={self.k})"


class ExponentialSchedule(ValidationSchedule):
    """Validate at steps 1, b, b^2, ..."""

    first_step = 1

    def __init__(self, base: int = 2):
        if base < 2:
            raise ValueError("Exponential base must be at least 2")
        self.base = base

    def advance(self, cur_step: int, stats: Optional[SimilarityStats]) -> int:
        step = 1
        while step <= cur_step:
            step *= self.base
        return step

    def __repr__(self) -> str:
        return f"ExponentialSchedule(base={self.base})"
