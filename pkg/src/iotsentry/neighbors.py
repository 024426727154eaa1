"""k-nearest-neighbour classification with exact Manhattan search.

Training rows are standardized at fit time and the scaled matrix is kept
on the model; queries are scaled with the same statistics.  Neighbour
search is exact brute force: distances to every training row, split ties
by the lower training-row index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._common import as_feature_array, as_label_ids, check_feature_count, check_fitted
from .data import FeatureMatrix, Standardization

WEIGHTINGS = ("uniform", "distance")


@dataclass
class KnnConfig:
    n_neighbors: int = 5
    weighting: str = "distance"
    metric: str = "manhattan"

    def __post_init__(self) -> None:
        if self.n_neighbors < 1:
            raise ValueError(f"n_neighbors must be >= 1, got {self.n_neighbors}")
        if self.weighting not in WEIGHTINGS:
            raise ValueError(
                f"weighting must be one of {WEIGHTINGS}, got {self.weighting!r}"
            )
        if self.metric != "manhattan":
            raise ValueError(f"only the manhattan metric is supported, got {self.metric!r}")


def inverse_distance_weights(distances: np.ndarray) -> np.ndarray:
    """Per-neighbor voting weights for a block of neighbour distances.

    Each weight is 1/distance, except on rows containing exact matches:
    there the zero-distance neighbours split a total weight of 1 evenly
    and every other neighbour gets weight 0.
    """
    dist = np.asarray(distances, dtype=np.float64)
    if (dist < 0).any():
        raise ValueError("distances must be nonnegative")
    squeeze = dist.ndim == 1
    if squeeze:
        dist = dist[None, :]
    zero = dist == 0.0
    with np.errstate(divide="ignore"):
        weights = np.where(zero, 0.0, 1.0 / np.where(zero, 1.0, dist))
    any_zero = zero.any(axis=1)
    if any_zero.any():
        zrows = np.flatnonzero(any_zero)
        weights[zrows] = zero[zrows] / zero[zrows].sum(axis=1, keepdims=True)
    return weights[0] if squeeze else weights


def manhattan_distance(a, b) -> float:
    """Sum of absolute coordinate differences between two equal-length rows."""
    av = np.asarray(a, dtype=np.float64)
    bv = np.asarray(b, dtype=np.float64)
    if av.ndim != 1 or bv.ndim != 1:
        raise ValueError("manhattan_distance expects 1-D rows")
    if av.shape[0] != bv.shape[0]:
        raise ValueError(
            f"length mismatch: {av.shape[0]} vs {bv.shape[0]} coordinates"
        )
    return float(np.abs(av - bv).sum())


class KNeighborsClassifier:
    def __init__(self, config: KnnConfig | None = None):
        self.config = config or KnnConfig()
        self.X_: np.ndarray | None = None

    def fit(self, m, y) -> "KNeighborsClassifier":
        X, names = as_feature_array(m)
        ids, classes, level = as_label_ids(y)
        if X.shape[0] != ids.size:
            raise ValueError("feature matrix and labels disagree on row count")
        if X.shape[0] == 0:
            raise ValueError("cannot fit on zero rows")
        if np.isnan(X).any():
            raise ValueError("training data contains missing values; impute first")
        fm = FeatureMatrix(X, names or [str(i) for i in range(X.shape[1])])
        self.standardization_ = Standardization(
            mean=X.mean(axis=0), std=X.std(axis=0)
        )
        self.X_ = np.ascontiguousarray(self.standardization_.apply(fm).values)
        self.ids_ = ids.copy()
        self.classes_ = classes
        self.level_ = level
        self.feature_names_ = names
        self.n_features_ = X.shape[1]
        return self

    def _check_query(self, m) -> np.ndarray:
        check_fitted(self, "X_")
        X, _ = as_feature_array(m)
        check_feature_count(self.n_features_, X)
        if np.isnan(X).any():
            raise ValueError("query contains missing values; impute first")
        fm = FeatureMatrix(X, self.feature_names_ or [str(i) for i in range(X.shape[1])])
        return np.ascontiguousarray(self.standardization_.apply(fm).values)

    def kneighbors(self, query_row, k: int | None = None) -> list[tuple[int, float]]:
        """The k nearest training rows to one query row, closest first.

        Distances are measured in the standardized feature space the model
        classifies in.  Equal distances rank by lower training-row index.
        """
        check_fitted(self, "X_")
        q = np.asarray(query_row, dtype=np.float64)
        if q.ndim != 1:
            raise ValueError("kneighbors expects a single 1-D query row")
        k = self.config.n_neighbors if k is None else k
        n = self.X_.shape[0]
        if not 1 <= k <= n:
            raise ValueError(f"k must be in [1, {n}], got {k}")
        scaled = self._check_query(q[None, :])[0]
        d = np.abs(self.X_ - scaled).sum(axis=1)
        order = np.argsort(d, kind="stable")[:k]
        return [(int(i), float(d[i])) for i in order]

    def _neighbor_table(self, Q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Indices and distances of the k nearest training rows per query."""
        n = self.X_.shape[0]
        k = self.config.n_neighbors
        if k > n:
            raise ValueError(f"n_neighbors={k} exceeds the {n} training rows")
        nq = Q.shape[0]
        idx = np.empty((nq, k), dtype=np.int64)
        dist = np.empty((nq, k))
        # chunked so the distance block stays around 64 MB
        chunk = max(1, int(8_000_000 // max(n, 1)))
        for start in range(0, nq, chunk):
            stop = min(start + chunk, nq)
            D = _kernels.l1_cross(np.ascontiguousarray(Q[start:stop]), self.X_)
            if k == n:
                part = np.broadcast_to(
                    np.arange(n)[:, None], (n, stop - start)
                )
            else:
                part = np.argpartition(D, k - 1, axis=0)[:k]
            for j in range(stop - start):
                col = D[:, j]
                sel = part[:, j] if k < n else part[:, 0]
                dsel = col[sel]
                vmax = dsel.max()
                strict = sel[dsel < vmax]
                need = k - strict.size
                # ties at the boundary rank by lower training-row index
                eq = np.flatnonzero(col == vmax)[:need]
                chosen = np.concatenate([strict, eq])
                order = np.lexsort((chosen, col[chosen]))
                chosen = chosen[order]
                idx[start + j] = chosen
                dist[start + j] = col[chosen]
        return idx, dist

    def predict_proba(self, m) -> np.ndarray:
        Q = self._check_query(m)
        idx, dist = self._neighbor_table(Q)
        K = len(self.classes_)
        nq = Q.shape[0]
        if self.config.weighting == "uniform":
            weights = np.ones_like(dist)
        else:
            weights = inverse_distance_weights(dist)
        proba = np.zeros((nq, K))
        labels = self.ids_[idx]
        for j in range(idx.shape[1]):
            np.add.at(proba, (np.arange(nq), labels[:, j]), weights[:, j])
        return proba / proba.sum(axis=1, keepdims=True)

    def predict(self, m) -> np.ndarray:
        return np.argmax(self.predict_proba(m), axis=1).astype(np.int64)
