"""Input coercion shared by the classifier modules."""

from __future__ import annotations

import numpy as np

from .data import FeatureMatrix, LabelVector


def as_feature_array(m) -> tuple[np.ndarray, list[str] | None]:
    """Return a C-contiguous float64 matrix plus feature names when known."""
    if isinstance(m, FeatureMatrix):
        return np.ascontiguousarray(m.values, dtype=np.float64), m.feature_names
    arr = np.ascontiguousarray(np.asarray(m, dtype=np.float64))
    if arr.ndim != 2:
        raise ValueError(f"feature data must be 2-D, got {arr.ndim}-D")
    return arr, None


def as_label_ids(
    y, n_classes: int | None = None
) -> tuple[np.ndarray, list[str], str | None]:
    """Return int64 class ids, class names and the label level when known."""
    if isinstance(y, LabelVector):
        return y.ids, y.class_names, y.level
    ids = np.asarray(y, dtype=np.int64)
    if ids.ndim != 1:
        raise ValueError("labels must be 1-D")
    if ids.size and ids.min() < 0:
        raise ValueError("label ids must be non-negative")
    if n_classes is None:
        n_classes = int(ids.max()) + 1 if ids.size else 0
    return ids, [str(i) for i in range(n_classes)], None


def check_fitted(model, attr: str) -> None:
    if getattr(model, attr, None) is None:
        raise ValueError(f"{type(model).__name__} is not fitted")


def check_feature_count(n_expected: int, matrix: np.ndarray) -> None:
    if matrix.shape[1] != n_expected:
        raise ValueError(
            f"feature-count mismatch: model expects {n_expected} features, "
            f"input has {matrix.shape[1]}"
        )
