"""
Experiment runner.

Executes the benchmark protocol for every (dataset, seed) cell: split,
standardize, fit the committee, then evaluate every member and the
ensemble on the held-out part. Cells run on a thread pool and are
reassembled in (dataset, seed) order, so reports do not depend on
scheduling.
"""
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.common.config_manager import ConfigManager
from src.common.error_categorization import ConfigurationError, GdmError, categorize_error
from src.common.seeding import derive_seed
from src.common.structured_logging import LogContext, get_structured_logger
from src.core.committee_io import save_committee
from src.core.ensemble import RatingMode, WeightProtocol, fit_committee, predict_committee_batch
from src.core.metrics import AccuracyMode, PerClassMetrics, WeightVector, accuracy, confusion_matrix
from src.data.dataset import ROUNDING_MODES, Dataset, standardize, stratified_split
from src.data.manifest import load_dataset, load_manifest, resolve_manifest
from src.learners.base import LearnerSpec
from src.learners.registry import resolve_spec

logger = get_structured_logger(__name__)

ENSEMBLE = "ensemble"
REPORT_FORMATS = ("csv", "markdown", "json")


@dataclass
class ExperimentConfig:
    """Everything one harness run needs."""
    datasets: List[str]
    learners: List[LearnerSpec]
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    split_fraction: float = 0.8
    split_rounding: str = "half_up"
    stratified: bool = True
    weight_protocol: WeightProtocol = field(default_factory=WeightProtocol)
    rating_mode: RatingMode = RatingMode.SCORES
    accuracy_mode: AccuracyMode = AccuracyMode.OVERALL
    manifest_dir: str = "config/datasets"
    output_dir: str = "results"
    formats: List[str] = field(default_factory=lambda: list(REPORT_FORMATS))
    max_workers: int = 4
    save_committees: bool = False

    def validate(self) -> None:
        """
        Raises:
            ConfigurationError: on any invalid setting
        """
        if not self.datasets:
            raise ConfigurationError("at least one dataset is required", field="datasets")
        if not self.learners:
            raise ConfigurationError("at least one learner is required", field="learners")
        if not self.seeds:
            raise ConfigurationError("at least one seed is required", field="seeds")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigurationError(
                f"split fraction must be in (0, 1), got {self.split_fraction}", field="split_fraction"
            )
        if self.split_rounding not in ROUNDING_MODES:
            raise ConfigurationError(f"split_rounding must be one of {ROUNDING_MODES}", field="split_rounding")
        unknown = [f for f in self.formats if f not in REPORT_FORMATS]
        if unknown:
            raise ConfigurationError(f"unknown report format(s): {unknown}", field="formats")
        if self.max_workers < 1:
            raise ConfigurationError("max_workers must be >= 1", field="max_workers")
        labels = [spec.label for spec in self.learners]
        if len(set(labels)) != len(labels) or ENSEMBLE in labels:
            raise ConfigurationError(f"learner names must be unique and not '{ENSEMBLE}'", field="learners")
        for spec in self.learners:
            if int(spec.seed) < 0:
                raise ConfigurationError(f"learner {spec.label}: seed offset must be >= 0", field="learners")
            try:
                resolve_spec(spec)
            except GdmError as e:
                raise ConfigurationError(f"learner {spec.label}: {e}", field="learners") from e

    @property
    def leaky(self) -> bool:
        return self.weight_protocol.kind == "external"

    @classmethod
    def from_config_manager(cls, cm: ConfigManager) -> "ExperimentConfig":
        exp = cm.get_section("experiment")
        try:
            learners = [
                LearnerSpec(
                    kind=entry["kind"],
                    hyperparameters=dict(entry["hyperparameters"]),
                    seed=entry["seed"],
                    name=name,
                )
                for name, entry in cm.get_section("learners").items()
            ]
            return cls(
                datasets=[str(d) for d in exp["datasets"]],
                learners=learners,
                seeds=[int(s) for s in exp["seeds"]],
                split_fraction=float(exp["split_fraction"]),
                split_rounding=exp["split_rounding"],
                stratified=exp["stratified"],
                weight_protocol=WeightProtocol.parse(exp["weight_protocol"]),
                rating_mode=RatingMode(exp["rating_mode"]),
                accuracy_mode=AccuracyMode(exp["accuracy_mode"]),
                manifest_dir=exp["manifest_dir"],
                output_dir=exp["output_dir"],
                formats=list(exp["formats"]),
                max_workers=exp["max_workers"],
                save_committees=exp["save_committees"],
            )
        except (GdmError, ValueError) as e:
            raise ConfigurationError(f"invalid experiment configuration: {e}") from e


@dataclass
class CellResult:
    """Outcome of one (dataset, seed) cell."""
    dataset: str
    seed: int
    class_names: Tuple[str, ...] = ()
    learners: List[str] = field(default_factory=list)
    y_true: Optional[np.ndarray] = None
    member_predictions: Dict[str, np.ndarray] = field(default_factory=dict)
    ensemble_predictions: Optional[np.ndarray] = None
    member_accuracy: Dict[str, float] = field(default_factory=dict)
    ensemble_accuracy: Optional[float] = None
    member_metrics: Dict[str, PerClassMetrics] = field(default_factory=dict)
    member_weights: Dict[str, WeightVector] = field(default_factory=dict)
    dropped: List[Tuple[str, str]] = field(default_factory=list)
    n_train: int = 0
    n_test: int = 0
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None and self.ensemble_accuracy is not None


@dataclass
class ColumnSummary:
    mean: float
    std: float
    values: List[float]


@dataclass
class DatasetSummary:
    """Mean and stddev over seeds per learner column, with best/worst flags."""
    dataset: str
    columns: Dict[str, ColumnSummary]
    best: List[str]
    worst: List[str]


@dataclass
class ExperimentReport:
    """All cells plus per-dataset aggregates."""
    datasets: List[str]
    learners: List[str]
    seeds: List[int]
    weight_protocol: str
    rating_mode: str
    leaky: bool
    cells: List[CellResult]
    summaries: List[DatasetSummary]
    failed_datasets: Dict[str, str]

    @property
    def all_completed(self) -> bool:
        return not self.failed_datasets

    def cells_for(self, dataset: str) -> List[CellResult]:
        return [cell for cell in self.cells if cell.dataset == dataset]


@dataclass
class RunMetrics:
    """Timing and completion counters for one run."""
    cells_completed: int = 0
    cells_failed: int = 0
    total_time: float = 0.0
    cell_times: List[float] = field(default_factory=list)

    def add_cell_time(self, seconds: float) -> None:
        self.cell_times.append(seconds)

    @property
    def average_cell_time(self) -> float:
        return sum(self.cell_times) / len(self.cell_times) if self.cell_times else 0.0


def cell_specs(learners: Sequence[LearnerSpec], seed: int) -> List[LearnerSpec]:
    """Per-cell learner specs: each learner gets its own seed derived from the cell seed."""
    return [replace(spec, seed=derive_seed(seed, spec.label, int(spec.seed))) for spec in learners]


def summarize(dataset: str, cells: Sequence[CellResult], learners: Sequence[str]) -> DatasetSummary:
    """Aggregate completed cells of one dataset."""
    columns: Dict[str, ColumnSummary] = {}
    for name in list(learners) + [ENSEMBLE]:
        if name == ENSEMBLE:
            values = [c.ensemble_accuracy for c in cells if c.ok]
        else:
            values = [c.member_accuracy[name] for c in cells if c.ok and name in c.member_accuracy]
        if values:
            arr = np.array(values, dtype=np.float64)
            columns[name] = ColumnSummary(float(np.mean(arr)), float(np.std(arr)), [float(v) for v in values])

    best: List[str] = []
    worst: List[str] = []
    if columns:
        means = {name: col.mean for name, col in columns.items()}
        top, bottom = max(means.values()), min(means.values())
        best = [name for name, value in means.items() if value == top]
        worst = [name for name, value in means.items() if value == bottom]
    return DatasetSummary(dataset=dataset, columns=columns, best=best, worst=worst)


class ExperimentRunner:
    """
    Runs (dataset, seed) cells concurrently using a ThreadPoolExecutor and
    reduces them into an ExperimentReport in a fixed order.
    """

    def __init__(self, config: ExperimentConfig):
        config.validate()
        self.config = config
        self.metrics = RunMetrics()
        logger.info(
            "ExperimentRunner initialized",
            LogContext(operation="init", extra_data={
                "datasets": list(config.datasets),
                "seeds": len(config.seeds),
                "learners": [spec.label for spec in config.learners],
                "protocol": str(config.weight_protocol),
                "max_workers": config.max_workers,
            }),
        )
        if config.leaky:
            logger.warning(
                "Weight protocol external-test measures weights on the test set; "
                "ensemble accuracies are optimistically biased",
                LogContext(operation="init"),
            )

    def _load_datasets(self) -> Tuple[Dict[str, Dataset], Dict[str, str]]:
        loaded: Dict[str, Dataset] = {}
        failed: Dict[str, str] = {}
        for name in self.config.datasets:
            try:
                manifest = load_manifest(resolve_manifest(name, self.config.manifest_dir))
                loaded[name] = load_dataset(manifest)
                ds = loaded[name]
                logger.info(
                    "Dataset loaded",
                    LogContext(dataset=name, operation="load", extra_data={
                        "n": ds.n_samples, "d": ds.n_features, "m": ds.n_classes,
                    }),
                )
            except Exception as e:
                category, _ = categorize_error(e)
                failed[name] = str(e)
                logger.error(
                    f"Dataset load failed: {e}",
                    LogContext(dataset=name, operation="load", extra_data={"category": category.value}),
                )
        return loaded, failed

    def run_cell(self, name: str, ds: Dataset, seed: int) -> CellResult:
        """Split, standardize, fit the committee and evaluate on the test part."""
        cfg = self.config
        split = stratified_split(ds, cfg.split_fraction, seed, cfg.split_rounding, cfg.stratified)
        train, test, _ = standardize(split.train, split.test)

        committee = fit_committee(
            train,
            cell_specs(cfg.learners, seed),
            protocol=cfg.weight_protocol,
            seed=seed,
            rating_mode=cfg.rating_mode,
            external=test if cfg.weight_protocol.kind == "external" else None,
            accuracy_mode=cfg.accuracy_mode,
            on_member_error="drop",
        )

        result = CellResult(
            dataset=name,
            seed=seed,
            class_names=ds.class_names,
            y_true=test.labels.copy(),
            dropped=list(committee.dropped),
            n_train=train.n_samples,
            n_test=test.n_samples,
        )
        for member in committee.members:
            preds = member.model.predict_batch(test.features)
            result.learners.append(member.label)
            result.member_predictions[member.label] = preds
            result.member_accuracy[member.label] = accuracy(confusion_matrix(test.labels, preds, ds.n_classes))
            result.member_weights[member.label] = member.weights
            if member.metrics is not None:
                result.member_metrics[member.label] = member.metrics

        result.ensemble_predictions = predict_committee_batch(committee, test.features)
        result.ensemble_accuracy = accuracy(
            confusion_matrix(test.labels, result.ensemble_predictions, ds.n_classes)
        )

        if cfg.save_committees:
            out = Path(cfg.output_dir) / "committees"
            out.mkdir(parents=True, exist_ok=True)
            save_committee(committee, out / f"{name}_seed{seed}.committee")
        return result

    def _safe_cell(self, name: str, ds: Dataset, seed: int) -> CellResult:
        started = time.time()
        context = LogContext(dataset=name, seed=seed, operation="cell")
        try:
            result = self.run_cell(name, ds, seed)
            for label, reason in result.dropped:
                logger.warning(f"Member dropped: {reason}", LogContext(dataset=name, seed=seed, learner=label))
            logger.info(
                "Cell completed",
                LogContext(dataset=name, seed=seed, operation="cell", extra_data={
                    "ensemble_accuracy": round(result.ensemble_accuracy or 0.0, 4),
                    "seconds": round(time.time() - started, 2),
                }),
            )
            return result
        except Exception as e:
            category, _ = categorize_error(e)
            context.extra_data = {"category": category.value}
            logger.error(f"Cell failed: {e}", context, exc_info=not isinstance(e, GdmError))
            return CellResult(dataset=name, seed=seed, class_names=ds.class_names, error=str(e))
        finally:
            self.metrics.add_cell_time(time.time() - started)

    def run(self) -> ExperimentReport:
        """Run every cell and assemble the report."""
        cfg = self.config
        started = time.time()
        loaded, failed = self._load_datasets()

        jobs = [(i, j, name, seed) for i, name in enumerate(cfg.datasets) if name in loaded
                for j, seed in enumerate(cfg.seeds)]
        results: Dict[Tuple[int, int], CellResult] = {}
        with ThreadPoolExecutor(max_workers=cfg.max_workers) as executor:
            future_to_key = {
                executor.submit(self._safe_cell, name, loaded[name], seed): (i, j)
                for i, j, name, seed in jobs
            }
            for future in as_completed(future_to_key):
                results[future_to_key[future]] = future.result()

        cells = [results[key] for key in sorted(results)]
        for cell in cells:
            if cell.ok:
                self.metrics.cells_completed += 1
            else:
                self.metrics.cells_failed += 1
                failed.setdefault(cell.dataset, f"seed {cell.seed}: {cell.error}")

        learner_names = [spec.label for spec in cfg.learners]
        summaries = [
            summarize(name, [c for c in cells if c.dataset == name], learner_names)
            for name in cfg.datasets if name in loaded
        ]
        self.metrics.total_time = time.time() - started
        logger.info(
            "Experiment finished",
            LogContext(operation="run", extra_data={
                "completed": self.metrics.cells_completed,
                "failed": self.metrics.cells_failed,
                "seconds": round(self.metrics.total_time, 2),
            }),
        )
        return ExperimentReport(
            datasets=list(cfg.datasets),
            learners=learner_names,
            seeds=list(cfg.seeds),
            weight_protocol=str(cfg.weight_protocol),
            rating_mode=cfg.rating_mode.value,
            leaky=cfg.leaky,
            cells=cells,
            summaries=summaries,
            failed_datasets={name: failed[name] for name in cfg.datasets if name in failed},
        )

    def get_performance_summary(self) -> Dict[str, Any]:
        return {
            "cells_completed": self.metrics.cells_completed,
            "cells_failed": self.metrics.cells_failed,
            "average_cell_seconds": round(self.metrics.average_cell_time, 2),
            "total_seconds": round(self.metrics.total_time, 2),
            "max_workers": self.config.max_workers,
        }


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    """Run the full protocol described by `cfg`."""
    return ExperimentRunner(cfg).run()
