"""
Report rendering: per-seed CSV, Markdown summary, JSON dump, weights CSV
and rich console tables. Output contains no timestamps, so identical runs
produce identical files.
"""
import csv
import io
import json
from pathlib import Path
from typing import Any, Dict, List, Sequence

from rich.table import Table

from src.common.error_categorization import ConfigurationError, DataError
from src.core.ensemble import Committee
from src.core.metrics import format_metrics_csv, metrics_rows
from src.services.experiment_runner import ENSEMBLE, DatasetSummary, ExperimentReport

RESULTS_CSV_HEADER = ("dataset", "seed", "learner", "accuracy")
REPORT_FILES = {"csv": "results.csv", "markdown": "summary.md", "json": "report.json"}
WEIGHTS_FILE = "weights.csv"


def _column_order(report: ExperimentReport) -> List[str]:
    return list(report.learners) + [ENSEMBLE]


def format_results_csv(report: ExperimentReport) -> str:
    """One row per (dataset, seed, learner) with test accuracy; completed cells only."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(RESULTS_CSV_HEADER)
    for cell in report.cells:
        if not cell.ok:
            continue
        for name in cell.learners:
            writer.writerow([cell.dataset, cell.seed, name, repr(cell.member_accuracy[name])])
        writer.writerow([cell.dataset, cell.seed, ENSEMBLE, repr(cell.ensemble_accuracy)])
    return buffer.getvalue()


def parse_csv_report(text: str) -> List[Dict[str, Any]]:
    """
    Read back results CSV text.

    Raises:
        DataError: header or a row is malformed
    """
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != RESULTS_CSV_HEADER:
        raise DataError(f"unexpected results header {reader.fieldnames}, expected {list(RESULTS_CSV_HEADER)}")
    rows = []
    for line, row in enumerate(reader, start=2):
        try:
            rows.append({
                "dataset": row["dataset"],
                "seed": int(row["seed"]),
                "learner": row["learner"],
                "accuracy": float(row["accuracy"]),
            })
        except (TypeError, ValueError) as e:
            raise DataError(f"malformed results row: {e}", row=line) from e
    return rows


def _percent(value: float) -> str:
    return f"{100.0 * value:.2f}"


def _summary_cell(summary: DatasetSummary, name: str) -> str:
    column = summary.columns.get(name)
    if column is None:
        return "n/a"
    text = f"{_percent(column.mean)} ± {_percent(column.std)}"
    return f"**{text}**" if name in summary.best else text


def format_markdown_summary(report: ExperimentReport) -> str:
    """Datasets as rows, learners plus the ensemble as columns, mean ± std accuracy in percent."""
    columns = _column_order(report)
    lines = [
        "# Accuracy summary",
        "",
        f"Seeds: {len(report.seeds)} | weight protocol: {report.weight_protocol} | rating: {report.rating_mode}",
        "",
    ]
    if report.leaky:
        lines += [
            "> Weights were measured on the test split (external-test protocol); "
            "ensemble figures are optimistically biased.",
            "",
        ]
    lines.append("| Dataset | " + " | ".join(columns) + " |")
    lines.append("|---|" + "---:|" * len(columns))

    summaries = {summary.dataset: summary for summary in report.summaries}
    for name in report.datasets:
        if name in report.failed_datasets and not any(c.ok for c in report.cells_for(name)):
            lines.append(f"| {name} | " + " | ".join(["failed"] * len(columns)) + " |")
            continue
        summary = summaries[name]
        lines.append(f"| {name} | " + " | ".join(_summary_cell(summary, c) for c in columns) + " |")

    if report.failed_datasets:
        lines += ["", "## Failures", ""]
        lines += [f"- {name}: {reason}" for name, reason in report.failed_datasets.items()]
    return "\n".join(lines) + "\n"


def report_to_dict(report: ExperimentReport) -> Dict[str, Any]:
    return {
        "datasets": list(report.datasets),
        "learners": list(report.learners),
        "seeds": list(report.seeds),
        "weight_protocol": report.weight_protocol,
        "rating_mode": report.rating_mode,
        "leaky": report.leaky,
        "failed_datasets": dict(report.failed_datasets),
        "summaries": [
            {
                "dataset": s.dataset,
                "best": list(s.best),
                "worst": list(s.worst),
                "columns": {
                    name: {"mean": col.mean, "std": col.std, "values": list(col.values)}
                    for name, col in s.columns.items()
                },
            }
            for s in report.summaries
        ],
        "cells": [
            {
                "dataset": cell.dataset,
                "seed": cell.seed,
                "n_train": cell.n_train,
                "n_test": cell.n_test,
                "error": cell.error,
                "member_accuracy": dict(cell.member_accuracy),
                "ensemble_accuracy": cell.ensemble_accuracy,
                "dropped": [{"learner": label, "reason": reason} for label, reason in cell.dropped],
                "weights": {name: [float(v) for v in w.w] for name, w in cell.member_weights.items()},
            }
            for cell in report.cells
        ],
    }


def format_json_report(report: ExperimentReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def format_weights_csv(report: ExperimentReport) -> str:
    """Per-cell precision, recall, accuracy and weight of every member and class."""
    rows: List[Dict[str, Any]] = []
    for cell in report.cells:
        if not cell.ok:
            continue
        for name in cell.learners:
            if name not in cell.member_metrics:
                continue
            for row in metrics_rows(name, cell.member_metrics[name], cell.member_weights[name], cell.class_names):
                row.update(dataset=cell.dataset, seed=cell.seed)
                rows.append(row)
    return format_metrics_csv(rows, extra_columns=("dataset", "seed"))


def format_report(report: ExperimentReport, fmt: str) -> str:
    """
    Render the report as 'csv', 'markdown' or 'json'.

    Raises:
        ConfigurationError: unknown format
    """
    if fmt == "csv":
        return format_results_csv(report)
    if fmt == "markdown":
        return format_markdown_summary(report)
    if fmt == "json":
        return format_json_report(report)
    raise ConfigurationError(f"unknown report format '{fmt}'", field="formats")


def write_reports(report: ExperimentReport, output_dir: str, formats: Sequence[str]) -> List[Path]:
    """Write the requested formats plus weights.csv; returns the written paths."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for fmt in formats:
        path = out / REPORT_FILES[fmt]
        path.write_text(format_report(report, fmt), encoding="utf-8")
        written.append(path)
    weights_path = out / WEIGHTS_FILE
    weights_path.write_text(format_weights_csv(report), encoding="utf-8")
    written.append(weights_path)
    return written


def create_summary_table(report: ExperimentReport) -> Table:
    """Console version of the Markdown summary."""
    table = Table(title=f"Test accuracy over {len(report.seeds)} seed(s) [{report.weight_protocol}]", expand=True)
    table.add_column("Dataset", style="cyan", no_wrap=True)
    columns = _column_order(report)
    for name in columns:
        table.add_column(name, justify="right", style="magenta" if name == ENSEMBLE else None)

    summaries = {summary.dataset: summary for summary in report.summaries}
    for dataset in report.datasets:
        summary = summaries.get(dataset)
        if summary is None or not summary.columns:
            table.add_row(dataset, *["[bold red]failed[/bold red]"] * len(columns))
            continue
        cells = []
        for name in columns:
            column = summary.columns.get(name)
            if column is None:
                cells.append("[dim]n/a[/dim]")
                continue
            text = f"{_percent(column.mean)} ± {_percent(column.std)}"
            if name in summary.best:
                text = f"[bold green]{text}[/bold green]"
            elif name in summary.worst:
                text = f"[red]{text}[/red]"
            cells.append(text)
        table.add_row(dataset, *cells)
    return table


def create_committee_table(committee: Committee) -> Table:
    """Precision, recall, accuracy and weight per member and class."""
    names = committee.class_names or tuple(str(i) for i in range(committee.n_classes))
    table = Table(
        title=f"Committee: {committee.size} member(s), {committee.n_classes} classes, "
              f"rating={committee.rating_mode.value}",
        expand=True,
    )
    table.add_column("Member", style="cyan", no_wrap=True)
    table.add_column("Kind", style="blue")
    table.add_column("Class", style="magenta")
    for heading in ("P", "R", "A"):
        table.add_column(heading, justify="right")
    table.add_column("W", justify="right", style="green")

    for member in committee.members:
        for c, class_name in enumerate(names):
            if member.metrics is not None:
                measured = [f"{100.0 * float(v[c]):.2f}" for v in
                            (member.metrics.precision, member.metrics.recall, member.metrics.accuracy)]
            else:
                measured = ["[dim]n/a[/dim]"] * 3
            table.add_row(
                member.label if c == 0 else "",
                member.spec.kind if c == 0 else "",
                class_name,
                *measured,
                f"{float(member.weights.w[c]):.4f}",
            )
    return table
