"""Report schemas and writers."""

from .schemas import (
    SCHEMA_VERSION,
    AggregateRowModel,
    ExperimentConfigModel,
    ExperimentReportModel,
    OutputReportModel,
    PromptReportModel,
)
from .writers import prompt_rows, write_report, write_sweep

__all__ = [
    "SCHEMA_VERSION",
    "OutputReportModel",
    "PromptReportModel",
    "AggregateRowModel",
    "ExperimentReportModel",
    "ExperimentConfigModel",
    "prompt_rows",
    "write_report",
    "write_sweep",
]
