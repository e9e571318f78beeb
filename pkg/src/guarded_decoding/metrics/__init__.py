"""Output metrics."""

from .lcs import lcs, lcs_norm, lcs_table, lcs_traceback, longest_common_substring
from .scoring import build_run_report, violation_rate, violation_score

__all__ = [
    "lcs",
    "lcs_norm",
    "lcs_table",
    "lcs_traceback",
    "longest_common_substring",
    "violation_score",
    "violation_rate",
    "build_run_report",
]
