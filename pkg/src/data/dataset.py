"""
Dataset representation, CSV ingestion, stratified splitting and
standardization.

All types are immutable after construction: arrays are copied and marked
read-only, so instances can be shared across worker threads.
"""
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Optional, Sequence, Tuple, Union

import numpy as np
import pandas as pd

from src.common.error_categorization import DataError
from src.common.seeding import make_rng

logger = logging.getLogger(__name__)

ColumnRef = Union[int, str]

ROUNDING_MODES = ("half_up", "down", "up")
MISSING_MARKERS = {"", "?", "na", "nan", "null", "none"}


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Feature matrix plus integer class labels.

    Attributes:
        features: n x d float matrix
        labels: length-n vector of class indices in 0..m-1
        class_names: m class names; index i names class i
        feature_names: d feature names
        name: Optional dataset name used in reports
    """
    features: np.ndarray
    labels: np.ndarray
    class_names: Tuple[str, ...]
    feature_names: Tuple[str, ...]
    name: str = ""

    def __post_init__(self):
        features = _frozen(self.features, np.float64)
        labels = _frozen(self.labels, np.int64)
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "class_names", tuple(str(c) for c in self.class_names))
        object.__setattr__(self, "feature_names", tuple(str(f) for f in self.feature_names))

        if features.ndim != 2:
            raise DataError(f"features must be 2-dimensional, got shape {features.shape}")
        n, d = features.shape
        if n < 1 or d < 1:
            raise DataError(f"dataset must have at least one row and one feature, got {n}x{d}")
        if labels.shape != (n,):
            raise DataError(f"labels length {labels.shape} does not match {n} rows")
        if len(self.class_names) < 2:
            raise DataError("single-class dataset")
        if len(self.feature_names) != d:
            raise DataError(f"{len(self.feature_names)} feature names for {d} features")
        if labels.min() < 0 or labels.max() >= len(self.class_names):
            raise DataError("label index out of range for class_names")
        absent = np.flatnonzero(np.bincount(labels, minlength=len(self.class_names)) == 0)
        if absent.size:
            raise DataError(f"class '{self.class_names[absent[0]]}' has no instances")
        if not np.all(np.isfinite(features)):
            bad_row = int(np.flatnonzero(~np.all(np.isfinite(features), axis=1))[0])
            raise DataError(f"non-finite feature value in row {bad_row + 1}", row=bad_row + 1)

    @property
    def n_samples(self) -> int:
        return int(self.features.shape[0])

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        """Number of instances per class index."""
        return np.bincount(self.labels, minlength=self.n_classes)

    def subset(self, indices: Sequence[int]) -> "Dataset":
        """Rows selected by index, keeping class and feature names."""
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            class_names=self.class_names,
            feature_names=self.feature_names,
            name=self.name,
        )

    def with_features(self, features: np.ndarray) -> "Dataset":
        """Same labels and names with a replaced feature matrix."""
        return Dataset(features, self.labels, self.class_names, self.feature_names, self.name)


@dataclass(frozen=True, eq=False)
class SplitPair:
    """Train/test partition of one source dataset."""
    train: Dataset
    test: Dataset
    seed: int
    train_fraction: float
    train_indices: np.ndarray = field(repr=False)
    test_indices: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class Scaler:
    """Per-feature mean and divisor learned from a training set."""
    mean: np.ndarray
    scale: np.ndarray

    def transform(self, ds: Dataset) -> Dataset:
        """Apply the stored statistics to any dataset with the same features."""
        if ds.n_features != self.mean.shape[0]:
            raise DataError(
                f"scaler fitted on {self.mean.shape[0]} features, dataset has {ds.n_features}"
            )
        return ds.with_features((ds.features - self.mean) / self.scale)


def _resolve_column(ref: ColumnRef, columns: Sequence, what: str) -> int:
    """Map an index (negative allowed) or a header name to a column position."""
    n_cols = len(columns)
    if isinstance(ref, (int, np.integer)) and not isinstance(ref, bool):
        pos = int(ref) + n_cols if ref < 0 else int(ref)
        if not 0 <= pos < n_cols:
            raise DataError(f"{what} index {ref} out of range for {n_cols} columns", column=str(ref))
        return pos
    names = [str(c) for c in columns]
    if str(ref) in names:
        return names.index(str(ref))
    raise DataError(f"{what} '{ref}' not present", column=str(ref))


def load_csv(
    path: Union[str, Path],
    label_column: ColumnRef = -1,
    header: bool = False,
    delimiter: str = "comma",
    drop_columns: Sequence[ColumnRef] = (),
    label_map: Optional[Dict[str, str]] = None,
    class_order: Optional[Sequence[str]] = None,
    name: str = "",
) -> Dataset:
    """
    Load a numeric CSV file with one label column.

    Labels are mapped to 0..m-1 in order of first appearance unless
    `class_order` fixes the order explicitly.

    Args:
        path: CSV file path
        label_column: Column index (negative counts from the end) or header name
        header: Whether the first line is a header row
        delimiter: "comma" or "whitespace"
        drop_columns: Columns ignored entirely (e.g. an ID column)
        label_map: Optional relabelling of raw label strings
        class_order: Optional explicit class name order
        name: Dataset name recorded on the result

    Raises:
        DataError: missing file, non-numeric or missing feature cell,
            single-class dataset
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"Dataset file not found: {path}")

    sep = r"\s+" if delimiter == "whitespace" else ","
    if delimiter not in ("comma", "whitespace"):
        raise DataError(f"Unknown delimiter '{delimiter}'")

    try:
        frame = pd.read_csv(
            path,
            header=0 if header else None,
            sep=sep,
            dtype=str,
            keep_default_na=False,
            skipinitialspace=True,
            engine="python",
        )
    except (pd.errors.ParserError, UnicodeDecodeError) as e:
        raise DataError(f"Cannot parse {path}: {e}")

    if frame.empty:
        raise DataError(f"No data rows in {path}")

    columns = list(frame.columns)
    label_pos = _resolve_column(label_column, columns, "label column")
    dropped = {_resolve_column(c, columns, "drop column") for c in drop_columns}
    if label_pos in dropped:
        raise DataError("label column cannot also be dropped")
    feature_pos = [i for i in range(len(columns)) if i != label_pos and i not in dropped]
    if not feature_pos:
        raise DataError(f"No feature columns left in {path}")

    first_data_line = 2 if header else 1
    raw_labels = frame.iloc[:, label_pos].astype(str).str.strip()
    if label_map:
        raw_labels = raw_labels.map(lambda v: label_map.get(v, v))
    empty = np.flatnonzero((raw_labels.str.lower().isin(MISSING_MARKERS)).to_numpy())
    if empty.size:
        raise DataError(
            f"missing label in data row {empty[0] + 1} (line {empty[0] + first_data_line})",
            row=int(empty[0]) + 1,
        )

    features = np.empty((len(frame), len(feature_pos)), dtype=np.float64)
    for out_col, col in enumerate(feature_pos):
        cells = frame.iloc[:, col].astype(str).str.strip()
        values = pd.to_numeric(cells, errors="coerce").to_numpy(dtype=np.float64)
        bad = np.flatnonzero(~np.isfinite(values))
        if bad.size:
            row = int(bad[0])
            cell = cells.iloc[row]
            kind = "missing value" if cell.lower() in MISSING_MARKERS else "non-numeric feature cell"
            raise DataError(
                f"{kind} '{cell}' in data row {row + 1} (line {row + first_data_line}), "
                f"column {columns[col]}",
                row=row + 1,
                column=str(columns[col]),
            )
        features[:, out_col] = values

    if class_order is not None:
        class_names = [str(c) for c in class_order]
        unknown = sorted(set(raw_labels) - set(class_names))
        if unknown:
            raise DataError(f"labels not in class_order: {unknown}")
    else:
        class_names = [str(c) for c in pd.unique(raw_labels)]
    if len(class_names) < 2:
        raise DataError("single-class dataset")
    index_of = {c: i for i, c in enumerate(class_names)}
    labels = raw_labels.map(index_of).to_numpy(dtype=np.int64)

    if header:
        feature_names = [str(columns[i]).strip() for i in feature_pos]
    else:
        feature_names = [f"f{i}" for i in feature_pos]

    ds = Dataset(features, labels, tuple(class_names), tuple(feature_names), name=name or path.stem)
    logger.debug(
        f"Loaded {path}: n={ds.n_samples} d={ds.n_features} m={ds.n_classes}"
    )
    return ds


def save_csv(ds: Dataset, path: Union[str, Path]) -> None:
    """Write a dataset as CSV with a header row and the label column last."""
    frame = pd.DataFrame(ds.features, columns=list(ds.feature_names))
    frame["label"] = [ds.class_names[i] for i in ds.labels]
    frame.to_csv(path, index=False)


def _round_count(value: float, rounding: str) -> int:
    # Tolerance absorbs products like 0.8 * 5 landing just below an integer
    if rounding == "half_up":
        return int(math.floor(value + 0.5 + 1e-9))
    if rounding == "down":
        return int(math.floor(value + 1e-9))
    if rounding == "up":
        return int(math.ceil(value - 1e-9))
    raise DataError(f"Unknown rounding mode '{rounding}', expected one of {ROUNDING_MODES}")


def stratified_split(
    ds: Dataset,
    train_fraction: float,
    seed: int,
    rounding: str = "half_up",
    stratified: bool = True,
) -> SplitPair:
    """
    Split a dataset into train and test parts.

    With `stratified` each class contributes round(n_c * train_fraction)
    instances to train (clamped so both sides get at least one). Otherwise
    a plain shuffled split of the whole dataset is taken.

    Raises:
        DataError: fraction outside (0, 1), a class with fewer than 2 instances,
            or an unstratified split that leaves a class off one side
    """
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train_fraction must be in (0, 1), got {train_fraction}")
    rng = make_rng(seed, "split")

    if stratified:
        train_parts = []
        test_parts = []
        for c in range(ds.n_classes):
            members = np.flatnonzero(ds.labels == c)
            if members.size < 2:
                raise DataError(
                    f"class '{ds.class_names[c]}' has {members.size} instance(s); "
                    f"at least 2 are needed to place one on each side"
                )
            shuffled = rng.permutation(members)
            k = min(max(_round_count(members.size * train_fraction, rounding), 1), members.size - 1)
            train_parts.append(shuffled[:k])
            test_parts.append(shuffled[k:])
        train_idx = np.sort(np.concatenate(train_parts))
        test_idx = np.sort(np.concatenate(test_parts))
    else:
        n = ds.n_samples
        if n < 2:
            raise DataError("at least 2 instances are needed to split")
        k = min(max(_round_count(n * train_fraction, rounding), 1), n - 1)
        shuffled = rng.permutation(n)
        train_idx = np.sort(shuffled[:k])
        test_idx = np.sort(shuffled[k:])
        for side, idx in (("train", train_idx), ("test", test_idx)):
            absent = np.flatnonzero(np.bincount(ds.labels[idx], minlength=ds.n_classes) == 0)
            if absent.size:
                raise DataError(
                    f"unstratified split with seed {seed} left class '{ds.class_names[absent[0]]}' "
                    f"out of the {side} side"
                )

    return SplitPair(
        train=ds.subset(train_idx),
        test=ds.subset(test_idx),
        seed=int(seed),
        train_fraction=float(train_fraction),
        train_indices=_frozen(train_idx, np.int64),
        test_indices=_frozen(test_idx, np.int64),
    )


def fit_scaler(train: Dataset) -> Scaler:
    """Population mean/stddev per feature; zero-stddev columns are only centered."""
    mean = train.features.mean(axis=0)
    std = train.features.std(axis=0)
    scale = np.where(std > 0.0, std, 1.0)
    return Scaler(mean=_frozen(mean, np.float64), scale=_frozen(scale, np.float64))


def standardize(train: Dataset, test: Dataset) -> Tuple[Dataset, Dataset, Scaler]:
    """
    Standardize train to zero mean / unit stddev and transform test with the
    TRAIN statistics.
    """
    scaler = fit_scaler(train)
    return scaler.transform(train), scaler.transform(test), scaler
