"""
Report writers: JSON documents and flat CSV tables.
"""
import logging
import re
from pathlib import Path
from typing import Dict, List, Sequence, Union

import pandas as pd

from .schemas import AggregateRowModel, ExperimentReportModel, PromptReportModel

logger = logging.getLogger(__name__)


def safe_filename(name: str) -> str:
    """Replace characters unsafe in file names."""
    return re.sub(r"[^A-Za-z0-9_.-]", "_", name) or "_"


def prompt_rows(prompts: Sequence[PromptReportModel]) -> pd.DataFrame:
    """One row per (prompt, repetition), text metrics averaged over outputs."""
    rows = []
    for p in prompts:
        row = p.model_dump(exclude={"outputs"})
        row["status"] = p.status.value
        frame = pd.DataFrame([o.model_dump() for o in p.outputs])
        for column in ("ppl", "lcs", "lcs_norm", "substring", "violation_score"):
            row[column] = frame[column].astype(float).mean() if len(frame) else None
        row["n_outputs"] = len(p.outputs)
        row["top_output"] = p.outputs[0].text if p.outputs else ""
        rows.append(row)
    return pd.DataFrame(rows)


def write_report(report: ExperimentReportModel, out_dir: Union[str, Path]) -> Dict[str, Path]:
    """
    Write report.json, report.csv and per_prompt/<id>.json.

    Args:
        report: Experiment report
        out_dir: Output directory (created if missing)

    Returns:
        Mapping of artifact name to path
    """
    out = Path(out_dir)
    per_prompt_dir = out / "per_prompt"
    per_prompt_dir.mkdir(parents=True, exist_ok=True)

    json_path = out / "report.json"
    json_path.write_text(report.model_dump_json(indent=2), encoding="utf-8")

    csv_path = out / "report.csv"
    prompt_rows(report.prompts).to_csv(csv_path, index=False)

    grouped: Dict[str, List[PromptReportModel]] = {}
    for p in report.prompts:
        grouped.setdefault(p.prompt_id, []).append(p)
    for prompt_id, runs in grouped.items():
        path = per_prompt_dir / f"{safe_filename(prompt_id)}.json"
        payload = "[\n" + ",\n".join(r.model_dump_json(indent=2) for r in runs) + "\n]\n"
        path.write_text(payload, encoding="utf-8")

    logger.info("Wrote report for %d prompt runs to %s", len(report.prompts), out)
    return {"json": json_path, "csv": csv_path, "per_prompt": per_prompt_dir}


def write_sweep(
    parameter: str,
    rows: Sequence[AggregateRowModel],
    values: Sequence[str],
    out_dir: Union[str, Path]
) -> Path:
    """Write sweep.csv: one aggregate row per parameter value."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame([row.model_dump() for row in rows])
    frame.insert(0, "value", list(values))
    frame.insert(0, "parameter", parameter)
    path = out / "sweep.csv"
    frame.to_csv(path, index=False)
    logger.info("Wrote %d sweep rows to %s", len(frame), path)
    return path
