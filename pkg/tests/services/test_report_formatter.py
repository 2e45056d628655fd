"""
Tests for report rendering.
"""
import json

import numpy as np
import pytest
from rich.console import Console

from src.common.error_categorization import ConfigurationError, DataError
from src.core.ensemble import WeightProtocol, fit_committee
from src.core.metrics import PerClassMetrics, WeightVector
from src.learners.base import LearnerSpec
from src.services.experiment_runner import CellResult, ExperimentReport, summarize
from src.services.report_formatter import (
    REPORT_FILES,
    WEIGHTS_FILE,
    create_committee_table,
    create_summary_table,
    format_json_report,
    format_markdown_summary,
    format_report,
    format_results_csv,
    format_weights_csv,
    parse_csv_report,
    write_reports,
)
from tests.learners.conftest import make_blobs


def cell(dataset, seed, knn, logreg, ensemble):
    metrics = PerClassMetrics([1.0, 0.5], [0.5, 1.0], [0.75, 0.75])
    return CellResult(
        dataset=dataset,
        seed=seed,
        class_names=("neg", "pos"),
        learners=["knn", "logreg"],
        member_accuracy={"knn": knn, "logreg": logreg},
        ensemble_accuracy=ensemble,
        member_metrics={"knn": metrics, "logreg": metrics},
        member_weights={"knn": WeightVector([2.25, 2.25]), "logreg": WeightVector([2.25, 2.25])},
        y_true=np.array([0, 1]),
    )


def make_report(failed=False, leaky=False):
    cells = [cell("alpha", 0, 0.5, 0.75, 0.875), cell("alpha", 1, 0.75, 0.75, 0.875)]
    failed_datasets = {}
    if failed:
        cells.append(CellResult(dataset="beta", seed=0, error="broken file"))
        failed_datasets["beta"] = "seed 0: broken file"
    datasets = ["alpha", "beta"] if failed else ["alpha"]
    return ExperimentReport(
        datasets=datasets,
        learners=["knn", "logreg"],
        seeds=[0, 1],
        weight_protocol="validation:0.25",
        rating_mode="scores",
        leaky=leaky,
        cells=cells,
        summaries=[summarize(name, [c for c in cells if c.dataset == name], ["knn", "logreg"])
                   for name in datasets],
        failed_datasets=failed_datasets,
    )


class TestResultsCsv:
    """Test suite for the per-seed CSV."""

    def test_rows_and_round_trip(self):
        """Test one row per learner plus the ensemble, floats preserved."""
        report = make_report(failed=True)
        text = format_results_csv(report)
        lines = text.splitlines()
        assert lines[0] == "dataset,seed,learner,accuracy"
        assert lines[1:4] == ["alpha,0,knn,0.5", "alpha,0,logreg,0.75", "alpha,0,ensemble,0.875"]
        assert len(lines) == 7
        rows = parse_csv_report(text)
        assert rows[2] == {"dataset": "alpha", "seed": 0, "learner": "ensemble", "accuracy": 0.875}
        assert all(row["dataset"] != "beta" for row in rows)

    def test_parse_rejects_bad_input(self):
        """Test wrong headers and malformed rows."""
        with pytest.raises(DataError, match="header"):
            parse_csv_report("a,b\n1,2\n")
        with pytest.raises(DataError, match="malformed"):
            parse_csv_report("dataset,seed,learner,accuracy\nalpha,zero,knn,0.5\n")


class TestMarkdownSummary:
    """Test suite for the Markdown summary."""

    def test_table_and_bold_best(self):
        """Test mean ± std in percent with the best column in bold."""
        text = format_markdown_summary(make_report())
        assert text.startswith("# Accuracy summary\n")
        assert "| Dataset | knn | logreg | ensemble |" in text
        assert "| alpha | 62.50 ± 12.50 | 75.00 ± 0.00 | **87.50 ± 0.00** |" in text
        assert "optimistically biased" not in text

    def test_failures_and_leak_note(self):
        """Test failed datasets and the leaky protocol are called out."""
        text = format_markdown_summary(make_report(failed=True, leaky=True))
        assert "| beta | failed | failed | failed |" in text
        assert "## Failures" in text
        assert "- beta: seed 0: broken file" in text
        assert "optimistically biased" in text


class TestJsonAndWeights:
    """Test suite for JSON and weights output."""

    def test_json_report(self):
        """Test the JSON dump carries summaries and cells."""
        data = json.loads(format_json_report(make_report(failed=True)))
        assert data["summaries"][0]["best"] == ["ensemble"]
        assert data["summaries"][0]["columns"]["knn"]["values"] == [0.5, 0.75]
        assert data["cells"][2]["error"] == "broken file"
        assert data["failed_datasets"] == {"beta": "seed 0: broken file"}

    def test_weights_csv(self):
        """Test one row per cell, member and class."""
        lines = format_weights_csv(make_report()).splitlines()
        assert lines[0] == "dataset,seed,learner,class,precision,recall,accuracy,weight"
        assert lines[1] == "alpha,0,knn,neg,1.0,0.5,0.75,2.25"
        assert len(lines) == 1 + 2 * 2 * 2

    def test_unknown_format(self):
        """Test format_report rejects unknown names."""
        with pytest.raises(ConfigurationError):
            format_report(make_report(), "xml")

    def test_write_reports(self, tmp_path):
        """Test requested formats plus weights.csv are written."""
        written = write_reports(make_report(), str(tmp_path / "out"), ["csv", "json"])
        assert [p.name for p in written] == [REPORT_FILES["csv"], REPORT_FILES["json"], WEIGHTS_FILE]
        assert (tmp_path / "out" / "results.csv").read_text().startswith("dataset,seed")


class TestConsoleTables:
    """Test suite for rich tables."""

    def render(self, table):
        console = Console(record=True, width=160)
        console.print(table)
        return console.export_text()

    def test_summary_table(self):
        """Test the console summary lists every dataset."""
        text = self.render(create_summary_table(make_report(failed=True)))
        assert "alpha" in text
        assert "87.50 ± 0.00" in text
        assert "failed" in text

    def test_committee_table(self):
        """Test one row per member and class."""
        train = make_blobs(n_per_class=10, seed=1)
        committee = fit_committee(train, [LearnerSpec("knn", {"k": 3})], WeightProtocol("resubstitution"))
        table = create_committee_table(committee)
        assert table.row_count == 3
        assert "knn" in self.render(table)
