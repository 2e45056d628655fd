"""
Tests for the experiment runner.
"""
from dataclasses import replace

import numpy as np
import pytest

from src.common.config_manager import ConfigManager
from src.common.error_categorization import ConfigurationError
from src.core.committee_io import load_committee
from src.core.ensemble import RatingMode, WeightProtocol
from src.core.metrics import AccuracyMode
from src.learners.base import LearnerSpec
from src.services.experiment_runner import (
    ENSEMBLE,
    CellResult,
    ExperimentConfig,
    ExperimentRunner,
    RunMetrics,
    cell_specs,
    run_experiment,
    summarize,
)
from src.services.report_formatter import format_results_csv
from tests.services.conftest import FAST_LEARNERS


def make_config(manifest_dir, tmp_path, **overrides):
    values = dict(
        datasets=["toy", "toy2"],
        learners=list(FAST_LEARNERS),
        seeds=[0, 1, 2],
        manifest_dir=str(manifest_dir),
        output_dir=str(tmp_path / "out"),
        max_workers=1,
    )
    values.update(overrides)
    return ExperimentConfig(**values)


class TestExperimentConfig:
    """Test suite for ExperimentConfig validation."""

    @pytest.mark.parametrize("overrides, field", [
        ({"datasets": []}, "datasets"),
        ({"learners": []}, "learners"),
        ({"seeds": []}, "seeds"),
        ({"split_fraction": 1.0}, "split_fraction"),
        ({"split_rounding": "banker"}, "split_rounding"),
        ({"formats": ["xml"]}, "formats"),
        ({"max_workers": 0}, "max_workers"),
        ({"learners": [LearnerSpec("knn"), LearnerSpec("knn")]}, "learners"),
        ({"learners": [LearnerSpec("knn", name="ensemble")]}, "learners"),
        ({"learners": [LearnerSpec("knn", seed=-1)]}, "learners"),
        ({"learners": [LearnerSpec("knn", {"k": 0})]}, "learners"),
        ({"learners": [LearnerSpec("boosting")]}, "learners"),
    ])
    def test_invalid_settings(self, overrides, field, tmp_path):
        """Test each invalid setting names its field."""
        with pytest.raises(ConfigurationError) as exc_info:
            make_config(tmp_path, tmp_path, **overrides).validate()
        assert exc_info.value.field == field

    def test_from_config_manager(self):
        """Test the YAML layer maps onto the experiment config."""
        cm = ConfigManager(config={
            "experiment": {"datasets": ["wine"], "seeds": [3, 4], "weight_protocol": "resubstitution",
                           "rating_mode": "onehot", "accuracy_mode": "ovr"},
            "learners": {"near": {"kind": "knn", "hyperparameters": {"k": 7}, "seed": 2}},
        })
        cfg = ExperimentConfig.from_config_manager(cm)
        assert cfg.datasets == ["wine"]
        assert cfg.seeds == [3, 4]
        assert cfg.weight_protocol == WeightProtocol("resubstitution")
        assert cfg.rating_mode is RatingMode.ONEHOT
        assert cfg.accuracy_mode is AccuracyMode.OVR
        assert cfg.learners == [LearnerSpec("knn", {"k": 7}, seed=2, name="near")]

    def test_from_config_manager_rejects_bad_enum(self):
        """Test unknown rating modes surface as ConfigurationError."""
        cm = ConfigManager(config={
            "experiment": {"datasets": ["wine"], "rating_mode": "median"},
            "learners": {"knn": {"kind": "knn"}},
        })
        with pytest.raises(ConfigurationError, match="invalid experiment configuration"):
            ExperimentConfig.from_config_manager(cm)

    def test_leaky_flag(self, tmp_path):
        """Test only the external protocol is flagged as leaky."""
        assert make_config(tmp_path, tmp_path, weight_protocol=WeightProtocol("external")).leaky
        assert not make_config(tmp_path, tmp_path).leaky


class TestHelpers:
    """Test suite for cell seeding and summaries."""

    def test_cell_specs_derive_distinct_seeds(self):
        """Test learner seeds depend on cell seed, label and offset."""
        specs = [LearnerSpec("elm"), LearnerSpec("elm", name="elm2"), LearnerSpec("elm", name="elm3", seed=1)]
        seeds = [s.seed for s in cell_specs(specs, 0)]
        assert len(set(seeds)) == 3
        assert [s.seed for s in cell_specs(specs, 0)] == seeds
        assert [s.seed for s in cell_specs(specs, 1)] != seeds
        assert [s.label for s in cell_specs(specs, 0)] == ["elm", "elm2", "elm3"]

    def test_summarize_population_std_and_ties(self):
        """Test means, population stddev and tied best/worst flags."""
        cells = [
            CellResult("d", 0, member_accuracy={"a": 0.5, "b": 0.75}, ensemble_accuracy=0.75),
            CellResult("d", 1, member_accuracy={"a": 1.0, "b": 0.75}, ensemble_accuracy=0.75),
            CellResult("d", 2, error="boom"),
        ]
        summary = summarize("d", cells, ["a", "b"])
        assert summary.columns["a"].mean == 0.75
        assert summary.columns["a"].std == 0.25
        assert summary.columns[ENSEMBLE].values == [0.75, 0.75]
        assert sorted(summary.best) == ["a", "b", ENSEMBLE]
        assert sorted(summary.worst) == ["a", "b", ENSEMBLE]

    def test_run_metrics(self):
        """Test the average cell time."""
        metrics = RunMetrics()
        assert metrics.average_cell_time == 0.0
        metrics.add_cell_time(1.0)
        metrics.add_cell_time(3.0)
        assert metrics.average_cell_time == 2.0


class TestExperimentRunner:
    """Test suite for ExperimentRunner.run."""

    def test_cells_in_dataset_seed_order(self, manifest_dir, tmp_path):
        """Test every cell completes and is reported in order."""
        report = run_experiment(make_config(manifest_dir, tmp_path))
        assert report.all_completed
        assert [(c.dataset, c.seed) for c in report.cells] == [
            ("toy", 0), ("toy", 1), ("toy", 2), ("toy2", 0), ("toy2", 1), ("toy2", 2),
        ]
        cell = report.cells[0]
        assert cell.learners == ["knn", "logreg", "elm"]
        assert cell.n_train == 72 and cell.n_test == 18
        assert 0.0 <= cell.ensemble_accuracy <= 1.0
        assert cell.class_names == ("class_0", "class_1", "class_2")
        assert [s.dataset for s in report.summaries] == ["toy", "toy2"]

    def test_parallel_run_matches_serial_run(self, manifest_dir, tmp_path):
        """Test worker count does not change a single byte of the results."""
        serial = run_experiment(make_config(manifest_dir, tmp_path, max_workers=1))
        parallel = run_experiment(make_config(manifest_dir, tmp_path, max_workers=4))
        assert format_results_csv(serial) == format_results_csv(parallel)

    def test_missing_dataset_is_reported(self, manifest_dir, tmp_path):
        """Test an unloadable dataset fails alone."""
        report = run_experiment(make_config(manifest_dir, tmp_path, datasets=["toy", "absent"], seeds=[0]))
        assert not report.all_completed
        assert "absent" in report.failed_datasets
        assert [c.dataset for c in report.cells] == ["toy"]
        assert report.cells[0].ok

    def test_failing_cell_marks_dataset(self, manifest_dir, tmp_path):
        """Test an exception inside a cell is recorded, not raised."""
        runner = ExperimentRunner(make_config(manifest_dir, tmp_path, datasets=["toy"], seeds=[0, 1]))
        original = runner.run_cell

        def flaky(name, ds, seed):
            if seed == 1:
                raise RuntimeError("cell exploded")
            return original(name, ds, seed)

        runner.run_cell = flaky
        report = runner.run()
        assert report.cells[0].ok
        assert report.cells[1].error == "cell exploded"
        assert "cell exploded" in report.failed_datasets["toy"]
        assert runner.get_performance_summary()["cells_failed"] == 1

    def test_single_onehot_member_matches_ensemble(self, manifest_dir, tmp_path):
        """Test a one-member one-hot committee predicts exactly like its member."""
        report = run_experiment(make_config(
            manifest_dir, tmp_path, learners=[LearnerSpec("knn", {"k": 3})], seeds=list(range(5)),
            rating_mode=RatingMode.ONEHOT, weight_protocol=WeightProtocol("resubstitution"),
        ))
        for cell in report.cells:
            np.testing.assert_array_equal(cell.ensemble_predictions, cell.member_predictions["knn"])

    def test_dropped_member_is_recorded(self, manifest_dir, tmp_path):
        """Test a learner that cannot train is dropped from the cell."""
        learners = list(FAST_LEARNERS) + [LearnerSpec("knn", {"k": 500}, name="knn_huge")]
        report = run_experiment(make_config(manifest_dir, tmp_path, datasets=["toy"], seeds=[0], learners=learners))
        cell = report.cells[0]
        assert cell.ok
        assert "knn_huge" not in cell.learners
        assert cell.dropped[0][0] == "knn_huge"

    def test_external_protocol_is_leaky(self, manifest_dir, tmp_path):
        """Test the external protocol runs and flags the report."""
        report = run_experiment(make_config(
            manifest_dir, tmp_path, datasets=["toy"], seeds=[0], weight_protocol=WeightProtocol("external")
        ))
        assert report.leaky
        assert report.weight_protocol == "external-test"

    def test_committees_saved(self, manifest_dir, tmp_path):
        """Test committees are written per cell when requested."""
        cfg = make_config(manifest_dir, tmp_path, datasets=["toy"], seeds=[4], save_committees=True)
        run_experiment(cfg)
        committee = load_committee(tmp_path / "out" / "committees" / "toy_seed4.committee")
        assert committee.size == 3

    def test_learner_seed_offset_changes_stream(self, manifest_dir, tmp_path):
        """Test a seed offset derives a different learner seed."""
        base = make_config(manifest_dir, tmp_path, datasets=["toy"], seeds=[0],
                           learners=[LearnerSpec("elm", {"hidden": 12})])
        shifted = replace(base, learners=[LearnerSpec("elm", {"hidden": 12}, seed=1)])
        assert cell_specs(base.learners, 0)[0].seed != cell_specs(shifted.learners, 0)[0].seed
        a = ExperimentRunner(base).run().cells[0]
        b = ExperimentRunner(shifted).run().cells[0]
        assert a.ok and b.ok
        assert a.n_test == b.n_test
