"""Flow-record ingestion, imputation, label encoding and splitting."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from .taxonomy import LEVELS, LabelTaxonomy


@dataclass
class FeatureMatrix:
    """Numeric feature table: one row per flow record, one column per feature."""

    values: np.ndarray
    feature_names: list[str]

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ValueError(f"feature values must be 2-D, got {self.values.ndim}-D")
        self.feature_names = list(self.feature_names)
        if len(self.feature_names) != self.values.shape[1]:
            raise ValueError(
                f"{len(self.feature_names)} feature names for "
                f"{self.values.shape[1]} columns"
            )
        if len(set(self.feature_names)) != len(self.feature_names):
            raise ValueError("feature names must be unique")

    @property
    def row_count(self) -> int:
        return self.values.shape[0]

    def take(self, indices: np.ndarray) -> "FeatureMatrix":
        return FeatureMatrix(self.values[indices], self.feature_names)


@dataclass
class LabelVector:
    """Integer class ids plus the class-name table they index."""

    ids: np.ndarray
    class_names: list[str]
    level: str

    def __post_init__(self) -> None:
        self.ids = np.asarray(self.ids, dtype=np.int64)
        if self.ids.ndim != 1:
            raise ValueError("label ids must be 1-D")
        self.class_names = list(self.class_names)
        if not self.class_names:
            raise ValueError("class name table is empty")
        if len(set(self.class_names)) != len(self.class_names):
            raise ValueError("class names must be unique")
        if self.level not in LEVELS:
            raise ValueError(f"unknown label level {self.level!r}")
        if self.ids.size and (
            self.ids.min() < 0 or self.ids.max() >= len(self.class_names)
        ):
            raise ValueError("label id out of range of the class-name table")

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def take(self, indices: np.ndarray) -> "LabelVector":
        return LabelVector(self.ids[indices], self.class_names, self.level)

    def counts(self) -> np.ndarray:
        return np.bincount(self.ids, minlength=self.n_classes)


@dataclass
class PreprocessReport:
    """Bookkeeping emitted by the ingestion step."""

    rows_read: int = 0
    rows_dropped: int = 0
    imputed_cells_per_column: dict[str, int] = field(default_factory=dict)
    class_counts: dict[str, int] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "rows_read": self.rows_read,
            "rows_dropped": self.rows_dropped,
            "imputed_cells_per_column": dict(self.imputed_cells_per_column),
            "class_counts": dict(self.class_counts),
        }


@dataclass
class DatasetSplit:
    """Train/test partition of a dataset, with the parameters that produced it."""

    train_features: FeatureMatrix
    train_labels: LabelVector
    test_features: FeatureMatrix
    test_labels: LabelVector
    train_fraction: float
    seed: int


@dataclass
class Standardization:
    """Per-column location/scale fitted on training data.

    Columns with zero variance are passed through unchanged so constant
    features cannot blow up the scaled values.
    """

    mean: np.ndarray
    std: np.ndarray

    def apply(self, fm: FeatureMatrix) -> FeatureMatrix:
        if fm.values.shape[1] != self.mean.shape[0]:
            raise ValueError(
                f"standardization fitted on {self.mean.shape[0]} columns, "
                f"matrix has {fm.values.shape[1]}"
            )
        scaled = fm.values.copy()
        active = self.std > 0.0
        scaled[:, active] = (scaled[:, active] - self.mean[active]) / self.std[active]
        return FeatureMatrix(scaled, fm.feature_names)


def load_csv(
    path: str,
    label_column: str = "label",
    schema: list[str] | None = None,
) -> tuple[FeatureMatrix, list[str], PreprocessReport]:
    """Read a delimited flow file into a feature matrix plus raw labels.

    Cells that fail to parse as numbers (and non-finite values) are marked
    missing for later imputation.  Rows with no label are dropped and
    counted in the report.
    """
    try:
        frame = pd.read_csv(path, dtype_backend="numpy_nullable")
    except pd.errors.EmptyDataError:
        raise ValueError(f"empty file: {path}") from None
    if label_column not in frame.columns:
        raise ValueError(
            f"label column {label_column!r} not found in {path}; "
            f"columns are {list(frame.columns)}"
        )
    feature_names = [c for c in frame.columns if c != label_column]
    if not feature_names:
        raise ValueError(f"no feature columns in {path}")
    if frame.shape[0] == 0:
        raise ValueError(f"no data rows in {path}")
    if schema is not None and feature_names != list(schema):
        raise ValueError(
            f"feature columns of {path} do not match the expected schema: "
            f"got {feature_names}, expected {list(schema)}"
        )

    rows_read = int(frame.shape[0])
    raw = frame[label_column]
    label_present = raw.notna().to_numpy()
    if label_present.any():
        as_str = raw.astype(str).str.strip()
        label_present &= (as_str != "").to_numpy()
    rows_dropped = int(rows_read - label_present.sum())
    frame = frame.loc[label_present]
    if frame.shape[0] == 0:
        raise ValueError(f"no labelled rows in {path}")
    labels = [str(v).strip() for v in frame[label_column]]

    columns = []
    imputed: dict[str, int] = {}
    for name in feature_names:
        col = pd.to_numeric(frame[name], errors="coerce").to_numpy(
            dtype=np.float64, na_value=np.nan
        )
        col[~np.isfinite(col)] = np.nan
        imputed[name] = int(np.isnan(col).sum())
        columns.append(col)
    values = np.column_stack(columns)

    counts: dict[str, int] = {}
    for lab in labels:
        counts[lab] = counts.get(lab, 0) + 1
    report = PreprocessReport(
        rows_read=rows_read,
        rows_dropped=rows_dropped,
        imputed_cells_per_column=imputed,
        class_counts=counts,
    )
    return FeatureMatrix(values, feature_names), labels, report


def column_medians(fm: FeatureMatrix) -> np.ndarray:
    """Median of the non-missing entries of each column."""
    missing_all = np.isnan(fm.values).all(axis=0)
    if missing_all.any():
        bad = [fm.feature_names[i] for i in np.flatnonzero(missing_all)]
        raise ValueError(f"columns entirely missing: {', '.join(bad)}")
    with np.errstate(all="ignore"):
        return np.nanmedian(fm.values, axis=0)


def apply_imputation(fm: FeatureMatrix, medians: np.ndarray) -> FeatureMatrix:
    values = fm.values.copy()
    mask = np.isnan(values)
    if mask.any():
        values[mask] = np.broadcast_to(medians, values.shape)[mask]
    return FeatureMatrix(values, fm.feature_names)


def impute_missing(fm: FeatureMatrix) -> FeatureMatrix:
    """Fill missing cells with their column median."""
    return apply_imputation(fm, column_medians(fm))


def encode_labels(
    raw_labels: list[str],
    taxonomy: LabelTaxonomy,
    level: str,
) -> LabelVector:
    """Map raw label strings onto integer ids at the requested level.

    Class ids are assigned in order of first appearance, so encoding is
    deterministic for a fixed row order.
    """
    if level not in LEVELS:
        raise ValueError(f"unknown label level {level!r}; expected one of {LEVELS}")
    unknown = sorted(
        {lab for lab in raw_labels if lab not in taxonomy.attack_to_category}
    )
    if unknown:
        raise ValueError(f"labels missing from taxonomy: {', '.join(unknown)}")
    names: list[str] = []
    index: dict[str, int] = {}
    ids = np.empty(len(raw_labels), dtype=np.int64)
    for i, lab in enumerate(raw_labels):
        mapped = taxonomy.map_label(lab, level)
        if mapped not in index:
            index[mapped] = len(names)
            names.append(mapped)
        ids[i] = index[mapped]
    if not names:
        raise ValueError("no labels to encode")
    return LabelVector(ids, names, level)


def _allocate_train_counts(counts: np.ndarray, fraction: float) -> np.ndarray:
    """Largest-remainder allocation of per-class training-row counts."""
    exact = counts * fraction
    base = np.floor(exact).astype(np.int64)
    total = int(np.floor(counts.sum() * fraction + 0.5))
    extras = total - int(base.sum())
    if extras > 0:
        remainders = exact - base
        # Ties go to the lower class id.
        order = np.lexsort((np.arange(counts.size), -remainders))
        base[order[:extras]] += 1
    return base


def stratified_split(
    fm: FeatureMatrix,
    labels: LabelVector,
    train_fraction: float = 0.8,
    seed: int = 0,
) -> DatasetSplit:
    """Per-class random split preserving class proportions to within one row."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    if fm.row_count != labels.ids.size:
        raise ValueError("feature matrix and labels disagree on row count")
    if fm.row_count == 0:
        raise ValueError("cannot split an empty dataset")
    counts = labels.counts()
    present = np.flatnonzero(counts)
    singles = [labels.class_names[i] for i in present if counts[i] == 1]
    if singles:
        raise ValueError(
            f"classes with a single row cannot be split: {', '.join(singles)}"
        )
    train_counts = _allocate_train_counts(counts[present], train_fraction)

    rng = np.random.default_rng(seed)
    train_idx: list[np.ndarray] = []
    test_idx: list[np.ndarray] = []
    for cls, n_train in zip(present, train_counts):
        rows = np.flatnonzero(labels.ids == cls)
        rows = rows[rng.permutation(rows.size)]
        train_idx.append(rows[:n_train])
        test_idx.append(rows[n_train:])
    train = np.sort(np.concatenate(train_idx))
    test = np.sort(np.concatenate(test_idx))
    return DatasetSplit(
        train_features=fm.take(train),
        train_labels=labels.take(train),
        test_features=fm.take(test),
        test_labels=labels.take(test),
        train_fraction=train_fraction,
        seed=seed,
    )


def downsample_majority(
    fm: FeatureMatrix,
    labels: LabelVector,
    cap: int,
    seed: int = 0,
) -> tuple[FeatureMatrix, LabelVector]:
    """Randomly thin every class above ``cap`` rows down to exactly ``cap``."""
    if cap < 1:
        raise ValueError(f"cap must be positive, got {cap}")
    rng = np.random.default_rng(seed)
    keep: list[np.ndarray] = []
    for cls in range(labels.n_classes):
        rows = np.flatnonzero(labels.ids == cls)
        if rows.size > cap:
            rows = rng.choice(rows, size=cap, replace=False)
        keep.append(rows)
    kept = np.sort(np.concatenate(keep))
    return fm.take(kept), labels.take(kept)


def standardize(
    train: FeatureMatrix,
    apply_to: FeatureMatrix,
) -> tuple[FeatureMatrix, Standardization]:
    """Center/scale ``apply_to`` using statistics fitted on ``train``.

    Uses the population standard deviation, so a column holding {0, 10}
    maps to {-1, 1}.
    """
    if train.feature_names != apply_to.feature_names:
        raise ValueError("train and apply_to have different feature schemas")
    if np.isnan(train.values).any():
        raise ValueError("standardize requires imputed (complete) training data")
    stats = Standardization(
        mean=train.values.mean(axis=0),
        std=train.values.std(axis=0),
    )
    return stats.apply(apply_to), stats
