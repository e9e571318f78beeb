"""
Tests for report schemas and writers.
"""
import json
import math

import pandas as pd
import pytest
from pydantic import ValidationError

from guarded_decoding import Candidate, PromptStatus, RunReport, TaskType
from guarded_decoding.core.parameters import OutputMetrics, RunCounters
from guarded_decoding.reporting import (
    AggregateRowModel,
    ExperimentConfigModel,
    ExperimentReportModel,
    PromptReportModel,
    prompt_rows,
    write_report,
    write_sweep,
)


def prompt_report(prompt_id="p-000", rep=0, status=PromptStatus.OK, scores=(0.2, 0.4)):
    outputs = [Candidate((2, 3), -1.5 - i, alive=True) for i in range(len(scores))]
    metrics = [
        OutputMetrics(text=f"out {i}", length=2, ppl=2.0 + i, violation_score=s)
        for i, s in enumerate(scores)
    ]
    report = RunReport(
        outputs=outputs,
        counters=RunCounters(steps_validated=3, validations=4, rollbacks=1, refill_rounds=4),
        wall_time=0.25,
        validation_time=0.1,
        status=status,
        subset_size=7,
        metrics=metrics,
    )
    return PromptReportModel.from_run(prompt_id, rep, rep, report)


class TestSchemas:
    """Test report document models."""

    def test_from_run(self):
        """Test counters and outputs are copied from a run report."""
        p = prompt_report()
        assert p.steps_validated == 3
        assert p.rollbacks == 1
        assert p.subset_size == 7
        assert [o.text for o in p.outputs] == ["out 0", "out 1"]
        assert p.outputs[1].loglik == pytest.approx(-2.5)
        assert p.outputs[0].ppl == 2.0

    def test_failed_run_has_no_outputs(self):
        """Test a failed run keeps its status and error."""
        report = RunReport(status=PromptStatus.SAFETY_EXHAUSTED, error="no valid candidates")
        p = PromptReportModel.from_run("p-001", 0, 0, report)
        assert p.status == PromptStatus.SAFETY_EXHAUSTED
        assert p.error == "no valid candidates"
        assert p.outputs == []

    def test_clean(self):
        """Test NaN means become None."""
        assert AggregateRowModel.clean(float("nan")) is None
        assert AggregateRowModel.clean(None) is None
        assert AggregateRowModel.clean(2) == 2.0

    def test_report_serializes_enums_as_strings(self):
        """Test report.json uses plain enum values."""
        report = ExperimentReportModel(
            task=TaskType.DETOX,
            guarded=True,
            config={"thrv": 0.3},
            aggregate=AggregateRowModel(label="run", n_prompts=1, n_runs=1, n_failed=0,
                                        n_safety_exhausted=0, n_rollback_exhausted=0),
            prompts=[prompt_report()],
        )
        document = json.loads(report.model_dump_json())
        assert document["task"] == "detox"
        assert document["schema_version"] == 1
        assert document["prompts"][0]["status"] == "ok"


class TestExperimentConfigModel:
    """Test the --config file schema."""

    def test_lambda_alias(self):
        """Test "lambda" is accepted for the intensity."""
        config = ExperimentConfigModel.model_validate({"lambda": 50, "thrv": 0.4})
        assert config.lam == 50.0
        assert config.model_dump(exclude_none=True) == {"lam": 50.0, "thrv": 0.4}

    def test_field_name_is_also_accepted(self):
        """Test population by field name."""
        assert ExperimentConfigModel.model_validate({"lam": 10}).lam == 10.0

    def test_enums(self):
        """Test task and aggregation strings."""
        config = ExperimentConfigModel.model_validate({"task": "copyright", "sched_agg": "maxmax"})
        assert config.task == TaskType.COPYRIGHT

    @pytest.mark.parametrize("document", [
        {"thrv": 0.0},
        {"thrv": 1.5},
        {"beam_size": 0},
        {"ratio": 2.0},
        {"task": "poetry"},
        {"unknown_option": 1},
    ])
    def test_invalid(self, document):
        """Test bounds, enum values and unknown keys."""
        with pytest.raises(ValidationError):
            ExperimentConfigModel.model_validate(document)


class TestWriters:
    """Test JSON and CSV output."""

    @pytest.fixture
    def report(self):
        """Two prompts, the second repeated twice."""
        prompts = [prompt_report("p-000"), prompt_report("p/001", 0), prompt_report("p/001", 1)]
        return ExperimentReportModel(
            task=TaskType.DETOX,
            guarded=True,
            config={"thrv": 0.3},
            aggregate=AggregateRowModel(label="run", n_prompts=2, n_runs=3, n_failed=0,
                                        n_safety_exhausted=0, n_rollback_exhausted=0),
            prompts=prompts,
        )

    def test_prompt_rows(self, report):
        """Test one row per run with text metrics averaged."""
        frame = prompt_rows(report.prompts)
        assert len(frame) == 3
        assert frame.loc[0, "violation_score"] == pytest.approx(0.3)
        assert frame.loc[0, "ppl"] == pytest.approx(2.5)
        assert frame.loc[0, "status"] == "ok"
        assert frame.loc[0, "top_output"] == "out 0"
        assert math.isnan(frame.loc[0, "lcs"])

    def test_prompt_rows_without_outputs(self):
        """Test failed runs produce empty text metrics."""
        failed = PromptReportModel.from_run("p", 0, 0, RunReport(status=PromptStatus.ROLLBACK_EXHAUSTED))
        frame = prompt_rows([failed])
        assert frame.loc[0, "n_outputs"] == 0
        assert frame.loc[0, "top_output"] == ""

    def test_write_report(self, report, tmp_path):
        """Test report.json, report.csv and per-prompt files."""
        paths = write_report(report, tmp_path / "out")
        document = json.loads(paths["json"].read_text())
        assert len(document["prompts"]) == 3
        assert len(pd.read_csv(paths["csv"])) == 3
        names = sorted(p.name for p in paths["per_prompt"].iterdir())
        assert names == ["p-000.json", "p_001.json"]
        runs = json.loads((paths["per_prompt"] / "p_001.json").read_text())
        assert [r["rep"] for r in runs] == [0, 1]

    def test_write_sweep(self, tmp_path):
        """Test one row per value with the parameter columns first."""
        rows = [
            AggregateRowModel(label=f"thrv={v}", n_prompts=1, n_runs=1, n_failed=0,
                              n_safety_exhausted=0, n_rollback_exhausted=0, violation_score=s)
            for v, s in (("0.3", 0.1), ("0.5", 0.2))
        ]
        path = write_sweep("thrv", rows, ["0.3", "0.5"], tmp_path)
        frame = pd.read_csv(path)
        assert list(frame.columns[:3]) == ["parameter", "value", "label"]
        assert frame["value"].tolist() == [0.3, 0.5]
        assert frame["violation_score"].tolist() == [0.1, 0.2]
