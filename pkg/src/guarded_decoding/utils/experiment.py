"""
Experiment harness: train, decode a prompt set over repetitions, score,
aggregate and sweep parameters.
"""
import json
import logging
import statistics
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from ..core.engine import GuardedBeamSearch, beam_search
from ..core.enums import PromptStatus, TaskType
from ..core.exceptions import RollbackExhausted, SafetyExhausted, StoreFormatError
from ..core.parameters import GuardConfig, RunCounters, RunReport
from ..metrics.scoring import build_run_report
from ..models.ngram import NgramModel
from ..models.vocabulary import load_corpus, tokenize
from ..reporting.schemas import AggregateRowModel, ExperimentReportModel, PromptReportModel
from ..reporting.writers import write_report, write_sweep
from ..schedules.policy import parse_schedule
from ..similarity.embedder import HashingEmbedder
from ..similarity.store import DemonstrationStore

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = ("thrv", "lambda", "ratio", "schedule", "max_tokens")


@dataclass
class PromptRecord:
    """
    One prompt of a prompt set.

    Attributes:
        id: Unique identifier
        prompt: Prompt text
        reference: Reference continuation (copyright-style tasks)
    """
    id: str
    prompt: str
    reference: Optional[str] = None


@dataclass
class ExperimentSpec:
    """
    Full description of an experiment.

    Attributes:
        task: Experiment flavour
        corpus: Training text files
        prompts: JSON Lines prompt file
        examples: JSON Lines demonstration examples (None for an empty store)
        guard: Search configuration; ``guard.seed`` is the base seed
        reps: Repetitions; repetition r uses seed ``guard.seed + r``
        out_dir: Where reports are written (None to skip writing)
        no_guard: Decode with plain beam search
        order: n-gram order
        smoothing_k: Add-k constant
        embed_dim: Embedding dimension
        hash_seed: Feature hash seed
        workers: Threads decoding prompts concurrently
    """
    task: TaskType = TaskType.DETOX
    corpus: List[Path] = field(default_factory=list)
    prompts: Optional[Path] = None
    examples: Optional[Path] = None
    guard: GuardConfig = field(default_factory=GuardConfig)
    reps: int = 5
    out_dir: Optional[Path] = None
    no_guard: bool = False
    order: int = 3
    smoothing_k: float = 0.01
    embed_dim: int = 256
    hash_seed: int = 13
    workers: int = 1

    def __post_init__(self):
        """Validate experiment parameters."""
        self.corpus = [Path(p) for p in self.corpus]
        self.prompts = Path(self.prompts) if self.prompts is not None else None
        self.examples = Path(self.examples) if self.examples is not None else None
        self.out_dir = Path(self.out_dir) if self.out_dir is not None else None

        if self.reps < 1:
            raise ValueError("Repetitions must be at least 1")
        if self.workers < 1:
            raise ValueError("Workers must be at least 1")
        if not self.corpus:
            raise ValueError("At least one corpus file is required")
        if self.prompts is None:
            raise ValueError("A prompt file is required")
        for path in [*self.corpus, self.prompts] + ([self.examples] if self.examples else []):
            if not path.exists():
                raise FileNotFoundError(f"No such file: {path}")

    def summary(self) -> Dict[str, Any]:
        """JSON-compatible description used in reports."""
        g = self.guard
        return {
            "task": self.task.value,
            "corpus": [str(p) for p in self.corpus],
            "examples": str(self.examples) if self.examples else None,
            "prompts": str(self.prompts),
            "beam_K": g.beam_K,
            "max_token": g.max_token,
            "thrv": g.thrv,
            "thr_rb": g.thr_rb,
            "lambda": g.lam,
            "ratio_R": g.ratio_R,
            "schedule": g.schedule.label,
            "sched_agg": g.schedule.aggregation.value,
            "do_clustering": g.store.do_clustering,
            "attempt_budget": g.attempt_budget,
            "rollback_budget": g.rollback_budget,
            "seed": g.seed,
            "reps": self.reps,
            "no_guard": self.no_guard,
            "order": self.order,
            "smoothing_k": self.smoothing_k,
            "embed_dim": self.embed_dim,
            "hash_seed": self.hash_seed,
        }


def load_prompts(path: Union[str, Path]) -> List[PromptRecord]:
    """
    Parse a prompt JSON Lines file of {"id", "prompt"[, "reference"]} objects.

    Raises:
        StoreFormatError: malformed line, missing field or duplicate id
    """
    records: List[PromptRecord] = []
    seen = set()
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                item = json.loads(line)
            except json.JSONDecodeError as exc:
                raise StoreFormatError(str(path), line_no, f"invalid JSON ({exc.msg})") from exc
            if not isinstance(item, dict) or "id" not in item or "prompt" not in item:
                raise StoreFormatError(str(path), line_no, "expected an object with 'id' and 'prompt'")
            prompt_id = str(item["id"])
            if prompt_id in seen:
                raise StoreFormatError(str(path), line_no, f"duplicate id {prompt_id!r}")
            seen.add(prompt_id)
            reference = item.get("reference")
            records.append(PromptRecord(prompt_id, str(item["prompt"]), None if reference is None else str(reference)))
    return records


@dataclass
class ExperimentResources:
    """Trained model, demonstration store and prompts shared by every run of a spec."""
    model: NgramModel
    store: DemonstrationStore
    prompts: List[PromptRecord]

    @classmethod
    def prepare(cls, spec: ExperimentSpec) -> "ExperimentResources":
        start_time = time.time()
        model = NgramModel.train(load_corpus(spec.corpus), spec.order, spec.smoothing_k)
        embedder = HashingEmbedder(spec.embed_dim, spec.hash_seed)
        if spec.examples is not None:
            store = DemonstrationStore.load(spec.examples, embedder)
        else:
            store = DemonstrationStore.empty(embedder)
        prompts = load_prompts(spec.prompts)
        logger.info(
            "Prepared %d prompts, %d examples, |V|=%d in %.2fs",
            len(prompts), len(store), len(model.vocabulary), time.time() - start_time
        )
        return cls(model, store, prompts)


def with_parameter(spec: ExperimentSpec, parameter: str, value: str) -> ExperimentSpec:
    """
    Copy of ``spec`` with one sweep parameter set.

    Args:
        spec: Base spec
        parameter: One of thrv, lambda, ratio, schedule, max_tokens
        value: Parameter value as written on the command line

    Returns:
        New spec
    """
    g = spec.guard
    if parameter == "thrv":
        guard = replace(g, thrv=float(value))
    elif parameter == "lambda":
        guard = replace(g, lam=float(value))
    elif parameter == "ratio":
        guard = replace(g, ratio_R=float(value))
    elif parameter == "schedule":
        guard = replace(g, schedule=parse_schedule(value, g.lam, g.thrv, g.schedule.aggregation))
    elif parameter == "max_tokens":
        guard = replace(g, max_token=int(value))
    else:
        raise ValueError(f"Unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")
    return replace(spec, guard=guard)


class ExperimentRunner:
    """
    Runs every prompt of a spec for every repetition and aggregates the results.
    """

    def __init__(self, spec: ExperimentSpec, resources: Optional[ExperimentResources] = None):
        """
        Initialize runner.

        Args:
            spec: Experiment description
            resources: Prepared model/store/prompts (prepared from ``spec`` when omitted)
        """
        self.spec = spec
        self.resources = resources or ExperimentResources.prepare(spec)

    def run(self, label: str = "run") -> ExperimentReportModel:
        """
        Decode all prompts for all repetitions.

        Args:
            label: Aggregate row label

        Returns:
            ExperimentReportModel (also written when ``spec.out_dir`` is set)
        """
        spec = self.spec
        start_time = time.time()
        jobs: List[Tuple[int, int, Optional[GuardedBeamSearch], PromptRecord]] = []
        for rep in range(spec.reps):
            seed = spec.guard.seed + rep
            engine = None
            if not spec.no_guard:
                engine = GuardedBeamSearch(
                    self.resources.model, self.resources.store, replace(spec.guard, seed=seed)
                )
            jobs.extend((rep, seed, engine, record) for record in self.resources.prompts)

        if spec.workers > 1:
            with ThreadPoolExecutor(max_workers=spec.workers) as pool:
                prompts = list(pool.map(lambda job: self._run_prompt(*job), jobs))
        else:
            prompts = [self._run_prompt(*job) for job in jobs]

        aggregate = self.aggregate(prompts, label, spec.guard.thrv)
        report = ExperimentReportModel(
            task=spec.task,
            guarded=not spec.no_guard,
            config=spec.summary(),
            aggregate=aggregate,
            prompts=prompts,
        )
        logger.info(
            "%s: %d runs (%d failed) in %.2fs",
            label, aggregate.n_runs, aggregate.n_failed, time.time() - start_time
        )
        if spec.out_dir is not None:
            write_report(report, spec.out_dir)
        return report

    def _run_prompt(
        self,
        rep: int,
        seed: int,
        engine: Optional[GuardedBeamSearch],
        record: PromptRecord
    ) -> PromptReportModel:
        model = self.resources.model
        prompt = model.vocabulary.encode(tokenize(record.prompt))
        reference = tokenize(record.reference) if record.reference is not None else None

        if engine is None:
            start_time = time.time()
            outputs = beam_search(model, prompt, self.spec.guard.beam_K, self.spec.guard.max_token)
            report = RunReport(outputs=outputs, wall_time=time.time() - start_time)
        else:
            try:
                report = engine.run(prompt)
            except SafetyExhausted as exc:
                logger.warning("Prompt %s (seed %d): %s", record.id, seed, exc)
                report = RunReport(status=PromptStatus.SAFETY_EXHAUSTED, error=str(exc),
                                   subset_size=len(engine.subset))
            except RollbackExhausted as exc:
                logger.warning("Prompt %s (seed %d): %s", record.id, seed, exc)
                report = RunReport(status=PromptStatus.ROLLBACK_EXHAUSTED, error=str(exc),
                                   subset_size=len(engine.subset))

        report = build_run_report(report, model, prompt, self.resources.store, reference)
        return PromptReportModel.from_run(record.id, rep, seed, report)

    @staticmethod
    def aggregate(
        prompts: Sequence[PromptReportModel],
        label: str,
        thrv: float
    ) -> AggregateRowModel:
        """
        Means over successful runs; failed runs are only counted.

        Args:
            prompts: Per-run reports
            label: Row label
            thrv: Threshold used for the violation rate

        Returns:
            AggregateRowModel
        """
        ok = [p for p in prompts if p.status == PromptStatus.OK]
        statuses = [p.status for p in prompts]
        row: Dict[str, Any] = {
            "label": label,
            "n_prompts": len({p.prompt_id for p in prompts}),
            "n_runs": len(prompts),
            "n_failed": len(prompts) - len(ok),
            "n_safety_exhausted": statuses.count(PromptStatus.SAFETY_EXHAUSTED),
            "n_rollback_exhausted": statuses.count(PromptStatus.ROLLBACK_EXHAUSTED),
        }
        if not ok:
            return AggregateRowModel(**row)

        runs = pd.DataFrame([p.model_dump(exclude={"outputs"}) for p in ok])
        outputs = pd.DataFrame([o.model_dump() for p in ok for o in p.outputs])
        clean = AggregateRowModel.clean

        row["mean_time"] = clean(runs["wall_time"].mean())
        row["median_time"] = clean(statistics.median(runs["wall_time"]))
        for column in ("steps_validated", "validations", "rollbacks", "subset_size"):
            row[column] = clean(runs[column].mean())

        if len(outputs):
            ppl = outputs["ppl"].astype(float)
            row["ppl"] = clean(ppl.mean())
            row["n_infinite_ppl"] = int(ppl.isna().sum())
            for column in ("lcs", "lcs_norm", "substring", "violation_score"):
                row[column] = clean(outputs[column].astype(float).mean())
            row["violation_rate"] = clean(np.mean(outputs["violation_score"].to_numpy() >= thrv))
        return AggregateRowModel(**row)


def run_experiment(spec: ExperimentSpec, resources: Optional[ExperimentResources] = None) -> ExperimentReportModel:
    """Run ``spec`` and write its reports when ``spec.out_dir`` is set."""
    return ExperimentRunner(spec, resources).run()


def sweep(
    spec: ExperimentSpec,
    parameter: str,
    values: Sequence[str],
    resources: Optional[ExperimentResources] = None
) -> List[AggregateRowModel]:
    """
    Run ``spec`` once per parameter value on the same prompts and seeds.

    Per-value reports go to ``out_dir/<parameter>=<value>/`` and the
    comparison table to ``out_dir/sweep.csv``.

    Args:
        spec: Base spec
        parameter: One of thrv, lambda, ratio, schedule, max_tokens
        values: Values to compare
        resources: Prepared resources shared by every value

    Returns:
        One aggregate row per value, in input order
    """
    if not values:
        raise ValueError("Sweep needs at least one value")
    if parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"Unknown sweep parameter {parameter!r}; expected one of {SWEEP_PARAMETERS}")

    resources = resources or ExperimentResources.prepare(spec)
    rows = []
    for value in values:
        value_spec = with_parameter(spec, parameter, value)
        if spec.out_dir is not None:
            value_spec = replace(value_spec, out_dir=spec.out_dir / f"{parameter}={value}")
        label = f"{parameter}={value}"
        rows.append(ExperimentRunner(value_spec, resources).run(label).aggregate)

    if spec.out_dir is not None:
        write_sweep(parameter, rows, [str(v) for v in values], spec.out_dir)
    return rows
