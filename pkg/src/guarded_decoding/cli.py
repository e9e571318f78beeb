"""
Command-line entry point: ``guarded-decoding``.
"""
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import pandas as pd
from pydantic import ValidationError

from .core.enums import SimilarityAggregation, TaskType
from .core.exceptions import GuardedDecodingError
from .core.parameters import DEFAULT_LAMBDA, DEFAULT_THRV, GuardConfig, StoreConfig
from .reporting.schemas import AggregateRowModel, ExperimentConfigModel
from .schedules.policy import parse_schedule
from .utils.experiment import SWEEP_PARAMETERS, ExperimentSpec, run_experiment, sweep
from .utils.fixtures import build_fixture, write_fixture
from .utils.logging import configure_logging

logger = logging.getLogger(__name__)

DEFAULTS = {
    "task": TaskType.DETOX.value,
    "corpus": None,
    "examples": None,
    "prompts": None,
    "beam_size": 3,
    "max_tokens": 20,
    "thrv": DEFAULT_THRV,
    "thr_rb": 1.0,
    "lam": DEFAULT_LAMBDA,
    "ratio": 1.0,
    "schedule": "contextwise",
    "sched_agg": SimilarityAggregation.MIN_PAIRS.value,
    "seed": 0,
    "reps": 5,
    "out": None,
    "no_guard": False,
    "embed_dim": 256,
    "hash_seed": 13,
    "order": 3,
    "smoothing": 0.01,
    "workers": 1,
    "no_cluster": False,
    "attempt_budget": None,
    "rollback_budget": 8,
}


def build_parser() -> argparse.ArgumentParser:
    """Argument parser; option defaults live in ``DEFAULTS`` so config files can fill gaps."""
    parser = argparse.ArgumentParser(
        prog="guarded-decoding",
        description="Beam search whose candidates are validated against demonstration examples.",
    )
    parser.add_argument("--config", type=Path, help="JSON experiment file; flags override its values")
    parser.add_argument("--task", choices=[t.value for t in TaskType])
    parser.add_argument("--corpus", nargs="+", metavar="PATH", help="training text files")
    parser.add_argument("--examples", metavar="PATH", help="demonstration examples (JSON Lines)")
    parser.add_argument("--prompts", metavar="PATH", help="prompts (JSON Lines)")
    parser.add_argument("--out", metavar="DIR", help="report directory")

    search = parser.add_argument_group("search")
    search.add_argument("--beam-size", dest="beam_size", type=int, metavar="K")
    search.add_argument("--max-tokens", dest="max_tokens", type=int, metavar="MT")
    search.add_argument("--thrv", type=float, help=f"validation threshold (default {DEFAULT_THRV})")
    search.add_argument("--thr-rb", dest="thr_rb", type=float, help="invalid proportion that triggers rollback")
    search.add_argument("--lambda", dest="lam", type=float, help=f"context-wise intensity (default {DEFAULT_LAMBDA:g})")
    search.add_argument("--ratio", type=float, help="share of each cluster used for validation")
    search.add_argument("--schedule", help="contextwise | step1 | stepk:K | exp:B")
    search.add_argument("--sched-agg", dest="sched_agg", choices=[a.value for a in SimilarityAggregation])
    search.add_argument("--no-cluster", dest="no_cluster", action="store_true", default=None,
                        help="validate against the full store")
    search.add_argument("--attempt-budget", dest="attempt_budget", type=int,
                        help="refill rounds per validated step (default 16*K)")
    search.add_argument("--rollback-budget", dest="rollback_budget", type=int)
    search.add_argument("--no-guard", dest="no_guard", action="store_true", default=None,
                        help="plain beam search baseline")

    experiment = parser.add_argument_group("experiment")
    experiment.add_argument("--seed", type=int)
    experiment.add_argument("--reps", type=int)
    experiment.add_argument("--workers", type=int, help="threads decoding prompts concurrently")
    experiment.add_argument("--sweep", metavar="PARAM=V1,V2,...",
                            help=f"compare values of one of: {', '.join(SWEEP_PARAMETERS)}")

    model = parser.add_argument_group("model and embedding")
    model.add_argument("--order", type=int, help="n-gram order")
    model.add_argument("--smoothing", type=float, help="add-k constant")
    model.add_argument("--embed-dim", dest="embed_dim", type=int)
    model.add_argument("--hash-seed", dest="hash_seed", type=int)

    parser.add_argument("--fixture", nargs=2, metavar=("TASK", "DIR"),
                        help="write the shipped detox or copyright fixture files to DIR and exit")
    parser.add_argument("--log-level", default="INFO")
    parser.add_argument("--log-file", type=Path)
    return parser


def parse_sweep(text: str) -> Tuple[str, List[str]]:
    """Split "PARAM=V1,V2" into the parameter and its values."""
    parameter, sep, values = text.partition("=")
    parameter = parameter.strip().replace("-", "_")
    items = [v.strip() for v in values.split(",") if v.strip()]
    if not sep or not items:
        raise ValueError(f"Sweep must look like PARAM=V1,V2, got {text!r}")
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"Unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")
    return parameter, items


def resolve_options(args: argparse.Namespace) -> dict:
    """Merge flags over the config file over ``DEFAULTS``."""
    from_file = {}
    if args.config is not None:
        document = json.loads(args.config.read_text(encoding="utf-8"))
        from_file = ExperimentConfigModel.model_validate(document).model_dump(exclude_none=True)

    options = {}
    for name, default in DEFAULTS.items():
        value = getattr(args, name, None)
        if value is None:
            value = from_file.get(name, default)
        options[name] = value
    return options


def spec_from_options(options: dict) -> ExperimentSpec:
    """Build the experiment description from resolved options."""
    if not options["corpus"]:
        raise ValueError("--corpus is required (flag or config file)")
    if not options["prompts"]:
        raise ValueError("--prompts is required (flag or config file)")

    aggregation = SimilarityAggregation(options["sched_agg"])
    guard = GuardConfig(
        beam_K=options["beam_size"],
        max_token=options["max_tokens"],
        thrv=options["thrv"],
        thr_rb=options["thr_rb"],
        lam=options["lam"],
        ratio_R=options["ratio"],
        schedule=parse_schedule(options["schedule"], options["lam"], options["thrv"], aggregation),
        store=StoreConfig(ratio_R=options["ratio"], do_clustering=not options["no_cluster"]),
        attempt_budget=options["attempt_budget"],
        rollback_budget=options["rollback_budget"],
        seed=options["seed"],
    )
    return ExperimentSpec(
        task=TaskType(options["task"]),
        corpus=list(options["corpus"]),
        prompts=options["prompts"],
        examples=options["examples"],
        guard=guard,
        reps=options["reps"],
        out_dir=options["out"],
        no_guard=bool(options["no_guard"]),
        order=options["order"],
        smoothing_k=options["smoothing"],
        embed_dim=options["embed_dim"],
        hash_seed=options["hash_seed"],
        workers=options["workers"],
    )


def format_rows(rows: Sequence[AggregateRowModel]) -> str:
    """Aggregate rows as a plain-text table."""
    frame = pd.DataFrame([row.model_dump() for row in rows]).set_index("label")
    frame = frame.dropna(axis=1, how="all")
    return frame.to_string(float_format=lambda v: f"{v:.4f}")


def main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line.

    Returns:
        0 on success, 1 when the experiment could not be run
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        configure_logging(args.log_level, args.log_file)
    except ValueError as exc:
        parser.error(str(exc))

    try:
        if args.fixture is not None:
            task, out_dir = args.fixture
            paths = write_fixture(build_fixture(task), out_dir)
            for name, path in paths.items():
                print(f"{name}: {path}")
            return 0

        options = resolve_options(args)
        spec = spec_from_options(options)
        if args.sweep:
            parameter, values = parse_sweep(args.sweep)
            rows = sweep(spec, parameter, values)
        else:
            rows = [run_experiment(spec).aggregate]
    except (GuardedDecodingError, ValidationError, ValueError, OSError) as exc:
        logger.error("%s", exc)
        return 1

    print(format_rows(rows))
    if spec.out_dir is not None:
        print(f"Reports written to {spec.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
