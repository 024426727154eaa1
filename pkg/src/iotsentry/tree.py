"""Decision-tree classifier with exact exhaustive threshold search.

Trees are grown breadth-first.  Each level makes one pass over the
presorted feature orders (see ``_kernels``), so the training matrix is
sorted once per fit rather than once per node.  Splits maximise impurity
decrease, with ties broken toward the lower feature index and then the
lower threshold; rows equal to a threshold route left.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from ._common import as_feature_array, as_label_ids, check_feature_count, check_fitted

CRITERIA = ("gini", "entropy")
MAX_FEATURES = ("all", "sqrt")


@dataclass
class TreeConfig:
    criterion: str = "gini"
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str = "all"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.criterion not in CRITERIA:
            raise ValueError(f"criterion must be one of {CRITERIA}, got {self.criterion!r}")
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError(f"max_depth must be positive or None, got {self.max_depth}")
        if self.min_samples_split < 2:
            raise ValueError(f"min_samples_split must be >= 2, got {self.min_samples_split}")
        if self.min_samples_leaf < 1:
            raise ValueError(f"min_samples_leaf must be >= 1, got {self.min_samples_leaf}")
        if self.max_features not in MAX_FEATURES:
            raise ValueError(
                f"max_features must be one of {MAX_FEATURES}, got {self.max_features!r}"
            )


@dataclass
class SplitCandidate:
    feature_index: int
    threshold: float
    impurity_decrease: float
    left_rows: int
    right_rows: int


def _validated_counts(class_counts) -> np.ndarray:
    c = np.asarray(class_counts, dtype=np.float64)
    if c.ndim != 1 or c.size == 0:
        raise ValueError("class counts must be a non-empty 1-D array")
    if (c < 0).any():
        raise ValueError("class counts must be non-negative")
    if c.sum() <= 0:
        raise ValueError("class counts are all zero")
    return c


def gini(class_counts) -> float:
    """Gini impurity 1 - sum(p^2) of a class-count vector."""
    c = _validated_counts(class_counts)
    p = c / c.sum()
    return float(1.0 - (p * p).sum())


def entropy(class_counts) -> float:
    """Shannon entropy in bits of a class-count vector."""
    c = _validated_counts(class_counts)
    p = c / c.sum()
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum() + 0.0)


def _impurity_rows(tot: np.ndarray, use_entropy: bool) -> np.ndarray:
    """Impurity of each row of a (nodes x classes) weighted-count matrix."""
    W = tot.sum(axis=1)
    out = np.zeros(tot.shape[0])
    ok = W > 0
    if not ok.any():
        return out
    sub = tot[ok] / W[ok, None]
    if use_entropy:
        logs = np.where(sub > 0, np.log2(np.where(sub > 0, sub, 1.0)), 0.0)
        out[ok] = -(sub * logs).sum(axis=1)
    else:
        out[ok] = 1.0 - (sub * sub).sum(axis=1)
    return out


@dataclass
class TreeNodes:
    """Flattened tree: node 0 is the root, feature -1 marks a leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    counts: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    @property
    def n_leaves(self) -> int:
        return int((self.feature < 0).sum())

    def leaf_for(self, X: np.ndarray) -> np.ndarray:
        return _kernels.route_rows(X, self.feature, self.threshold, self.left, self.right)

    def proba(self, X: np.ndarray) -> np.ndarray:
        c = self.counts[self.leaf_for(X)]
        s = c.sum(axis=1, keepdims=True)
        k = c.shape[1]
        with np.errstate(invalid="ignore"):
            out = np.where(s > 0, c / np.where(s > 0, s, 1.0), 1.0 / k)
        return out


def grow_tree(
    XT: np.ndarray,
    orders: np.ndarray,
    y: np.ndarray,
    w: np.ndarray,
    rcount: np.ndarray,
    active: np.ndarray,
    config: TreeConfig,
    n_classes: int,
    rng: np.random.Generator,
) -> TreeNodes:
    """Level-wise tree construction over presorted feature orders.

    ``active`` marks the rows this tree trains on; ``rcount`` carries row
    multiplicities (bootstrap counts), ``w`` the training weights used for
    impurities and leaf tallies.
    """
    F, n = XT.shape
    use_entropy = config.criterion == "entropy"
    max_feats = F if config.max_features == "all" else min(F, math.ceil(math.sqrt(F)))
    min_leaf = float(config.min_samples_leaf)

    node_of_pos = np.full(n, -1, dtype=np.int32)
    node_of_pos[active] = 0
    act_idx = np.flatnonzero(active)
    if act_idx.size == 0:
        raise ValueError("cannot grow a tree on zero rows")
    tot0 = np.bincount(y[act_idx], weights=w[act_idx], minlength=n_classes)
    rows0 = float(rcount[act_idx].sum())
    imp0 = float(_impurity_rows(tot0[None, :], use_entropy)[0])

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    counts: list[np.ndarray] = []

    def new_node(tot) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        counts.append(tot)
        return len(feature) - 1

    root = new_node(tot0)
    live = [(root, 0, tot0, float(tot0.sum()), rows0, imp0)]

    while live:
        S = len(live)
        feat_ok = np.zeros((S, F), dtype=np.uint8)
        scan_slot = np.zeros(S, dtype=np.uint8)
        tot = np.zeros((S, n_classes))
        wsum = np.zeros(S)
        rows = np.zeros(S)
        pimp = np.zeros(S)
        for s, (nid, depth, t, ws, rw, imp) in enumerate(live):
            tot[s] = t
            wsum[s] = ws
            rows[s] = rw
            pimp[s] = imp
            depth_ok = config.max_depth is None or depth < config.max_depth
            if depth_ok and rw >= config.min_samples_split and imp > 0.0:
                scan_slot[s] = 1
                if max_feats >= F:
                    feat_ok[s, :] = 1
                else:
                    sel = np.sort(rng.choice(F, size=max_feats, replace=False))
                    feat_ok[s, sel] = 1

        best_gain = np.full(S, -1.0)
        best_feat = np.full(S, -1, dtype=np.int32)
        best_thr = np.zeros(S)
        best_nl = np.zeros(S)
        if scan_slot.any():
            feat_any = np.ascontiguousarray(feat_ok.max(axis=0))
            _kernels.level_scan_cls(
                XT, orders, y, w, rcount, node_of_pos, feat_ok, feat_any,
                tot, wsum, rows, pimp, scan_slot, min_leaf, use_entropy,
                best_gain, best_feat, best_thr, best_nl,
            )

        split_feat = np.full(S, -1, dtype=np.int32)
        split_thr = np.zeros(S)
        left_slot = np.full(S, -1, dtype=np.int32)
        right_slot = np.full(S, -1, dtype=np.int32)
        child_meta: list[tuple[int, int]] = []
        n_children = 0
        for s, (nid, depth, t, ws, rw, imp) in enumerate(live):
            if scan_slot[s] and best_gain[s] >= 0.0:
                f = int(best_feat[s])
                feature[nid] = f
                threshold[nid] = float(best_thr[s])
                lid = new_node(None)
                rid = new_node(None)
                left[nid] = lid
                right[nid] = rid
                split_feat[s] = f
                split_thr[s] = threshold[nid]
                left_slot[s] = n_children
                right_slot[s] = n_children + 1
                child_meta.append((lid, depth + 1))
                child_meta.append((rid, depth + 1))
                n_children += 2
        if n_children == 0:
            break
        out_tot = np.zeros((n_children, n_classes))
        out_wsum = np.zeros(n_children)
        out_rows = np.zeros(n_children)
        _kernels.apply_splits_cls(
            XT, y, w, rcount, node_of_pos, split_feat, split_thr,
            left_slot, right_slot, out_tot, out_wsum, out_rows,
        )
        cimp = _impurity_rows(out_tot, use_entropy)
        live = []
        for c, (nid, depth) in enumerate(child_meta):
            counts[nid] = out_tot[c]
            live.append(
                (nid, depth, out_tot[c], float(out_wsum[c]), float(out_rows[c]), float(cimp[c]))
            )

    return TreeNodes(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        counts=np.vstack(counts),
    )


def presort(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Feature-major copy of X plus per-feature sorted row orders."""
    XT = np.ascontiguousarray(X.T)
    orders = np.argsort(XT, axis=1, kind="stable").astype(np.int32)
    return XT, np.ascontiguousarray(orders)


def best_split(
    rows,
    labels,
    config: TreeConfig | None = None,
    candidate_features=None,
    sample_weight=None,
) -> SplitCandidate | None:
    """Exhaustive best split of a single node, or None if nothing is valid."""
    X, _ = as_feature_array(rows)
    ids, names, _ = as_label_ids(labels)
    if X.shape[0] != ids.size:
        raise ValueError("rows and labels disagree on length")
    if X.shape[0] == 0:
        raise ValueError("cannot split zero rows")
    if np.isnan(X).any():
        raise ValueError("rows contain missing values; impute first")
    config = config or TreeConfig()
    n, F = X.shape
    n_classes = len(names)
    w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, np.float64)
    if w.shape != (n,):
        raise ValueError("sample_weight length mismatch")
    if candidate_features is None:
        feats = np.arange(F)
    else:
        feats = np.unique(np.asarray(candidate_features, dtype=np.int64))
        if feats.size == 0 or feats.min() < 0 or feats.max() >= F:
            raise ValueError(f"candidate features out of range for {F} columns")

    tot = np.bincount(ids, weights=w, minlength=n_classes)
    use_entropy = config.criterion == "entropy"
    imp = float(_impurity_rows(tot[None, :], use_entropy)[0])
    if imp <= 0.0:
        return None

    XT, orders = presort(X)
    feat_ok = np.zeros((1, F), dtype=np.uint8)
    feat_ok[0, feats] = 1
    best_gain = np.full(1, -1.0)
    best_feat = np.full(1, -1, dtype=np.int32)
    best_thr = np.zeros(1)
    best_nl = np.zeros(1)
    _kernels.level_scan_cls(
        XT, orders, ids, w, np.ones(n), np.zeros(n, dtype=np.int32),
        feat_ok, np.ascontiguousarray(feat_ok[0]),
        tot[None, :], np.asarray([tot.sum()]), np.asarray([float(n)]),
        np.asarray([imp]), np.ones(1, dtype=np.uint8),
        float(config.min_samples_leaf), use_entropy,
        best_gain, best_feat, best_thr, best_nl,
    )
    if best_gain[0] < 0.0:
        return None
    nl = int(best_nl[0])
    return SplitCandidate(
        feature_index=int(best_feat[0]),
        threshold=float(best_thr[0]),
        impurity_decrease=float(best_gain[0]),
        left_rows=nl,
        right_rows=n - nl,
    )


class DecisionTreeClassifier:
    """CART-style classifier over numeric features."""

    def __init__(self, config: TreeConfig | None = None):
        self.config = config or TreeConfig()
        self.nodes_: TreeNodes | None = None
        self.classes_: list[str] | None = None
        self.level_: str | None = None
        self.feature_names_: list[str] | None = None
        self.n_features_: int | None = None

    def fit(self, m, y, sample_weight=None) -> "DecisionTreeClassifier":
        X, names = as_feature_array(m)
        ids, classes, level = as_label_ids(y)
        if X.shape[0] != ids.size:
            raise ValueError("feature matrix and labels disagree on row count")
        if X.shape[0] == 0:
            raise ValueError("cannot fit on zero rows")
        if np.isnan(X).any():
            raise ValueError("training data contains missing values; impute first")
        n = X.shape[0]
        w = np.ones(n) if sample_weight is None else np.asarray(sample_weight, np.float64)
        if w.shape != (n,):
            raise ValueError("sample_weight length mismatch")
        if (w < 0).any():
            raise ValueError("sample_weight must be non-negative")
        XT, orders = presort(X)
        rng = np.random.default_rng(self.config.seed)
        self.nodes_ = grow_tree(
            XT, orders, ids, w, np.ones(n), np.ones(n, dtype=bool),
            self.config, len(classes), rng,
        )
        self.classes_ = classes
        self.level_ = level
        self.feature_names_ = names
        self.n_features_ = X.shape[1]
        return self

    def _check_input(self, m) -> np.ndarray:
        check_fitted(self, "nodes_")
        X, _ = as_feature_array(m)
        check_feature_count(self.n_features_, X)
        if np.isnan(X).any():
            raise ValueError("input contains missing values; impute first")
        return X

    def predict_proba(self, m) -> np.ndarray:
        return self.nodes_.proba(self._check_input(m))

    def predict(self, m) -> np.ndarray:
        # argmax takes the first maximum, i.e. ties go to the lower class id
        return np.argmax(self.predict_proba(m), axis=1).astype(np.int64)
