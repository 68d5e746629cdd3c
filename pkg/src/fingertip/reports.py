"""Run reports: JSON metric files, JSON-lines trial logs, and text tables.

Reports never embed timestamps or absolute paths in trial records, so a
seeded pipeline writes byte-identical logs on every run.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path

from fingertip.errors import FingertipError


class ReportFormatError(FingertipError, ValueError):
    """A report file is not valid JSON or is missing required fields."""


@dataclass(frozen=True)
class RunReport:
    """Summary of one command: metrics plus the artifacts it produced."""

    experiment_id: str
    config_digest: str
    metrics: dict  # name -> {"value": ..., "unit": ...}
    artifacts: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "experiment_id": self.experiment_id,
            "config_digest": self.config_digest,
            "metrics": self.metrics,
            "artifacts": list(self.artifacts),
        }

    def metric(self, name: str):
        return self.metrics[name]["value"]


def write_report(path, report: RunReport) -> None:
    Path(path).write_text(json.dumps(report.to_dict(), indent=2) + "\n")


def read_report(path) -> RunReport:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ReportFormatError(f"{path}:{exc.lineno}: {exc.msg}") from exc
    try:
        return RunReport(
            experiment_id=raw["experiment_id"],
            config_digest=raw["config_digest"],
            metrics=raw["metrics"],
            artifacts=tuple(raw.get("artifacts", ())),
        )
    except (KeyError, TypeError) as exc:
        raise ReportFormatError(f"{path}: missing report field {exc}") from exc


def write_trial_log(path, records) -> None:
    """One JSON object per line; key order is stable, so bytes are too."""
    with open(path, "w") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")


def read_trial_log(path) -> list[dict]:
    records = []
    with open(path) as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ReportFormatError(f"{path}:{line_number}: {exc.msg}") from exc
    return records


def render_reports_table(reports: dict[str, RunReport]) -> str:
    """Deterministic fixed-width text table of every metric in every report."""
    lines = []
    name_width = max(
        [len("report")]
        + [len(f"{rid}.{m}") for rid, rep in reports.items() for m in rep.metrics]
    )
    lines.append(f"{'report'.ljust(name_width)}  {'value':>14}  unit")
    lines.append("-" * (name_width + 26))
    for rid in sorted(reports):
        for metric_name, entry in reports[rid].metrics.items():
            value = entry["value"]
            text = f"{value:.6g}" if isinstance(value, float) else str(value)
            lines.append(
                f"{(rid + '.' + metric_name).ljust(name_width)}  {text:>14}  "
                f"{entry.get('unit', '')}"
            )
    return "\n".join(lines) + "\n"


def confusion_csv_lines(classes, confusion) -> list[str]:
    """Confusion matrix as CSV rows: true class per row, predicted per column."""
    header = "true\\pred," + ",".join(classes)
    rows = [header]
    for name, row in zip(classes, confusion):
        rows.append(name + "," + ",".join(str(int(v)) for v in row))
    return rows
