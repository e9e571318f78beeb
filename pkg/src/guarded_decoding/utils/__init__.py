"""Experiment harness, fixtures and logging setup."""

from .experiment import (
    ExperimentResources,
    ExperimentRunner,
    ExperimentSpec,
    PromptRecord,
    load_prompts,
    run_experiment,
    sweep,
    with_parameter,
)
from .fixtures import (
    TaskFixture,
    build_copyright_fixture,
    build_detox_fixture,
    build_fixture,
    write_fixture,
)
from .logging import configure_logging

__all__ = [
    "ExperimentSpec",
    "ExperimentResources",
    "ExperimentRunner",
    "PromptRecord",
    "load_prompts",
    "run_experiment",
    "sweep",
    "with_parameter",
    "TaskFixture",
    "build_detox_fixture",
    "build_copyright_fixture",
    "build_fixture",
    "write_fixture",
    "configure_logging",
]
