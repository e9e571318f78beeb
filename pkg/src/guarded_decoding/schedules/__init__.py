"""Validation schedules."""

from .base import SimilarityStats, ValidationSchedule
from .context_wise import ContextWiseSchedule
from .fixed import ExponentialSchedule, StrideSchedule
from .policy import build_schedule, first_validation_step, parse_schedule

__all__ = [
    "ValidationSchedule",
    "SimilarityStats",
    "ContextWiseSchedule",
    "StrideSchedule",
    "ExponentialSchedule",
    "build_schedule",
    "parse_schedule",
    "first_validation_step",
]
