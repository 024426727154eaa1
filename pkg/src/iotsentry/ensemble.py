"""Ensemble classifiers: bagged forests and two boosting schemes.

All three ensembles reuse the presorted level-wise split search from the
tree module.  Per-tree and per-stage randomness is derived from the master
seed through spawned seed sequences, so refitting any prefix of the
ensemble reproduces the same members.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from ._common import as_feature_array, as_label_ids, check_feature_count, check_fitted
from .tree import TreeConfig, TreeNodes, grow_tree, presort

PROBA_CLIP = 1e-10


@dataclass
class ForestConfig:
    n_estimators: int = 200
    tree: TreeConfig = field(
        default_factory=lambda: TreeConfig(
            criterion="gini", max_depth=8, max_features="sqrt"
        )
    )
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")


@dataclass
class AdaBoostConfig:
    n_estimators: int = 100
    learning_rate: float = 0.1
    base_tree: TreeConfig = field(default_factory=lambda: TreeConfig(max_depth=1))
    variant: str = "samme.r"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_estimators < 1:
            raise ValueError(f"n_estimators must be >= 1, got {self.n_estimators}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.variant != "samme.r":
            raise ValueError(
                f"only the real-valued samme.r variant is implemented, got {self.variant!r}"
            )


@dataclass
class GBMConfig:
    n_estimators: int = 500
    learning_rate: float = 0.01
    max_depth: int = 4
    subsample: float = 0.8
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        # zero stages is allowed: the model then predicts the class priors
        if self.n_estimators < 0:
            raise ValueError(f"n_estimators must be >= 0, got {self.n_estimators}")
        if self.learning_rate <= 0:
            raise ValueError(f"learning_rate must be positive, got {self.learning_rate}")
        if self.max_depth < 1:
            raise ValueError(f"max_depth must be >= 1, got {self.max_depth}")
        if not 0.0 < self.subsample <= 1.0:
            raise ValueError(f"subsample must be in (0, 1], got {self.subsample}")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")
        if self.min_samples_leaf < 1:
            raise ValueError("min_samples_leaf must be >= 1")


class _FittedMixin:
    """Input checks shared by the fitted ensembles."""

    def _check_input(self, m) -> np.ndarray:
        check_fitted(self, "_fitted")
        X, _ = as_feature_array(m)
        check_feature_count(self.n_features_, X)
        if np.isnan(X).any():
            raise ValueError("input contains missing values; impute first")
        return X

    def _store_meta(self, X, names, classes, level) -> None:
        self.classes_ = classes
        self.level_ = level
        self.feature_names_ = names
        self.n_features_ = X.shape[1]
        self._fitted = True

    def predict(self, m) -> np.ndarray:
        # first-maximum argmax breaks ties toward the lower class id
        return np.argmax(self.predict_proba(m), axis=1).astype(np.int64)


def _check_training_inputs(X: np.ndarray, ids: np.ndarray) -> None:
    if X.shape[0] != ids.size:
        raise ValueError("feature matrix and labels disagree on row count")
    if X.shape[0] == 0:
        raise ValueError("cannot fit on zero rows")
    if np.isnan(X).any():
        raise ValueError("training data contains missing values; impute first")


class RandomForestClassifier(_FittedMixin):
    """Bootstrap-aggregated trees combined by plurality vote."""

    def __init__(self, config: ForestConfig | None = None):
        self.config = config or ForestConfig()
        self._fitted = None

    def fit(self, m, y) -> "RandomForestClassifier":
        X, names = as_feature_array(m)
        ids, classes, level = as_label_ids(y)
        _check_training_inputs(X, ids)
        n = X.shape[0]
        K = len(classes)
        XT, orders = presort(X)
        seeds = np.random.SeedSequence(self.config.seed).spawn(self.config.n_estimators)
        trees: list[TreeNodes] = []
        for tree_seed in seeds:
            rng = np.random.default_rng(tree_seed)
            if self.config.bootstrap:
                # multiplicity weights are equivalent to materialised resamples
                cnt = np.bincount(rng.integers(0, n, size=n), minlength=n).astype(
                    np.float64
                )
            else:
                cnt = np.ones(n)
            trees.append(
                grow_tree(XT, orders, ids, cnt, cnt, cnt > 0, self.config.tree, K, rng)
            )
        self.trees_ = trees
        self._store_meta(X, names, classes, level)
        return self

    def predict_proba(self, m) -> np.ndarray:
        """Share of trees voting for each class."""
        X = self._check_input(m)
        K = len(self.classes_)
        votes = np.zeros((X.shape[0], K))
        rows = np.arange(X.shape[0])
        for tree in self.trees_:
            pred = np.argmax(tree.counts[tree.leaf_for(X)], axis=1)
            votes[rows, pred] += 1.0
        return votes / len(self.trees_)


class AdaBoostClassifier(_FittedMixin):
    """Additive boosting of probability-output trees (the real-valued
    multi-class scheme driven by weighted class-probability estimates)."""

    def __init__(self, config: AdaBoostConfig | None = None):
        self.config = config or AdaBoostConfig()
        self._fitted = None

    def fit(self, m, y) -> "AdaBoostClassifier":
        X, names = as_feature_array(m)
        ids, classes, level = as_label_ids(y)
        _check_training_inputs(X, ids)
        K = len(classes)
        if K < 2:
            raise ValueError("boosting needs at least two classes")
        n = X.shape[0]
        XT, orders = presort(X)
        ones = np.ones(n)
        allrows = np.ones(n, dtype=bool)
        lr = self.config.learning_rate
        w = np.full(n, 1.0 / n)
        seeds = np.random.SeedSequence(self.config.seed).spawn(self.config.n_estimators)
        trees: list[TreeNodes] = []
        for r, round_seed in enumerate(seeds):
            rng = np.random.default_rng(round_seed)
            tree = grow_tree(XT, orders, ids, w, ones, allrows, self.config.base_tree, K, rng)
            p = tree.proba(X)
            degenerate = bool((p == 1.0).all(axis=0).any())
            if degenerate:
                # an uninformative learner: keep it only if it is all we have
                if r == 0:
                    trees.append(tree)
                break
            trees.append(tree)
            logp = np.log(np.clip(p, PROBA_CLIP, None))
            lp_true = logp[np.arange(n), ids]
            coded = lp_true - (logp.sum(axis=1) - lp_true) / (K - 1)
            w = w * np.exp(-lr * ((K - 1.0) / K) * coded)
            total = w.sum()
            if not np.isfinite(total) or total <= 0.0:
                break
            w = w / total
        self.trees_ = trees
        self.sample_weights_ = w
        self._store_meta(X, names, classes, level)
        return self

    def decision_function(self, m) -> np.ndarray:
        """Summed per-class scores; each round's scores sum to zero rowwise."""
        X = self._check_input(m)
        K = len(self.classes_)
        scores = np.zeros((X.shape[0], K))
        for tree in self.trees_:
            logp = np.log(np.clip(tree.proba(X), PROBA_CLIP, None))
            scores += (K - 1.0) * (logp - logp.mean(axis=1, keepdims=True))
        return scores

    def predict_proba(self, m) -> np.ndarray:
        scores = self.decision_function(m)
        K = len(self.classes_)
        z = scores / (K - 1.0)
        z -= z.max(axis=1, keepdims=True)
        e = np.exp(z)
        return e / e.sum(axis=1, keepdims=True)


@dataclass
class RegressionTree:
    """Squared-error tree with one response value per leaf."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return self.feature.shape[0]

    def value_for(self, X: np.ndarray) -> np.ndarray:
        leaf = _kernels.route_rows(X, self.feature, self.threshold, self.left, self.right)
        return self.value[leaf]


def grow_regression_tree(
    XT: np.ndarray,
    orders: np.ndarray,
    target: np.ndarray,
    node_of_pos: np.ndarray,
    max_depth: int,
    min_samples_split: int,
    min_samples_leaf: float,
    leaf_factor: float,
) -> RegressionTree:
    """Level-wise squared-error tree; leaves get a damped one-step update
    ``leaf_factor * sum(r) / sum(|r| (1 - |r|))`` suited to residual fitting."""
    n = node_of_pos.shape[0]
    active = np.flatnonzero(node_of_pos == 0)
    if active.size == 0:
        raise ValueError("cannot grow a tree on zero rows")
    leaf_of_pos = np.full(n, -1, dtype=np.int32)

    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []

    def new_node() -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        return len(feature) - 1

    root = new_node()
    live = [(root, 0, float(target[active].sum()), float(active.size))]
    min_leaf = float(min_samples_leaf)

    while live:
        S = len(live)
        scan_slot = np.zeros(S, dtype=np.uint8)
        tsum = np.zeros(S)
        rows = np.zeros(S)
        for s, (nid, depth, ts, rw) in enumerate(live):
            tsum[s] = ts
            rows[s] = rw
            if depth < max_depth and rw >= min_samples_split:
                scan_slot[s] = 1
        best_gain = np.full(S, -1.0)
        best_feat = np.full(S, -1, dtype=np.int32)
        best_thr = np.zeros(S)
        best_nl = np.zeros(S)
        if scan_slot.any():
            _kernels.level_scan_reg(
                XT, orders, target, node_of_pos, scan_slot, tsum, rows,
                min_leaf, best_gain, best_feat, best_thr, best_nl,
            )
        split_feat = np.full(S, -1, dtype=np.int32)
        split_thr = np.zeros(S)
        left_slot = np.full(S, -1, dtype=np.int32)
        right_slot = np.full(S, -1, dtype=np.int32)
        leaf_node_id = np.full(S, -1, dtype=np.int32)
        child_meta: list[tuple[int, int]] = []
        n_children = 0
        for s, (nid, depth, ts, rw) in enumerate(live):
            if scan_slot[s] and best_feat[s] >= 0:
                f = int(best_feat[s])
                feature[nid] = f
                threshold[nid] = float(best_thr[s])
                lid = new_node()
                rid = new_node()
                left[nid] = lid
                right[nid] = rid
                split_feat[s] = f
                split_thr[s] = threshold[nid]
                left_slot[s] = n_children
                right_slot[s] = n_children + 1
                child_meta.append((lid, depth + 1))
                child_meta.append((rid, depth + 1))
                n_children += 2
            else:
                leaf_node_id[s] = nid
        out_sum = np.zeros(max(n_children, 1))
        out_rows = np.zeros(max(n_children, 1))
        _kernels.apply_splits_reg(
            XT, target, node_of_pos, split_feat, split_thr,
            left_slot, right_slot, leaf_node_id, leaf_of_pos, out_sum, out_rows,
        )
        if n_children == 0:
            break
        live = [
            (nid, depth, float(out_sum[c]), float(out_rows[c]))
            for c, (nid, depth) in enumerate(child_meta)
        ]

    n_nodes = len(feature)
    num = np.zeros(n_nodes)
    den = np.zeros(n_nodes)
    _kernels.newton_leaf_sums(leaf_of_pos, target, num, den)
    with np.errstate(invalid="ignore", divide="ignore"):
        value = np.where(den > 0.0, leaf_factor * num / np.where(den > 0.0, den, 1.0), 0.0)
    return RegressionTree(
        feature=np.asarray(feature, dtype=np.int32),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int32),
        right=np.asarray(right, dtype=np.int32),
        value=value,
    )


def _softmax(raw: np.ndarray) -> np.ndarray:
    z = raw - raw.max(axis=1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=1, keepdims=True)


def _ceil_fraction(fraction: float, n: int) -> int:
    # round first: 0.8 * 160000 lands a hair above 128000 in binary floats
    return int(math.ceil(round(fraction * n, 9)))


def multinomial_deviance(ids: np.ndarray, proba: np.ndarray) -> float:
    """Mean negative log-likelihood of the true classes."""
    p = np.clip(proba[np.arange(ids.size), ids], 1e-300, None)
    return float(-np.log(p).mean())


class GradientBoostingClassifier(_FittedMixin):
    """Stagewise additive model minimising multinomial deviance.

    Raw scores start at the log class priors; each stage fits one
    squared-error tree per class to the softmax residuals on a fresh
    subsample and applies damped leaf updates.
    """

    def __init__(self, config: GBMConfig | None = None):
        self.config = config or GBMConfig()
        self._fitted = None

    def fit(self, m, y) -> "GradientBoostingClassifier":
        X, names = as_feature_array(m)
        ids, classes, level = as_label_ids(y)
        _check_training_inputs(X, ids)
        K = len(classes)
        if K < 2:
            raise ValueError("boosting needs at least two classes")
        n = X.shape[0]
        counts = np.bincount(ids, minlength=K)
        if (counts == 0).any():
            missing = [classes[i] for i in np.flatnonzero(counts == 0)]
            raise ValueError(f"classes absent from training data: {', '.join(missing)}")
        self.init_score_ = np.log(counts / n)
        cfg = self.config
        raw = np.tile(self.init_score_, (n, 1))
        XT, orders = presort(X)
        seeds = np.random.SeedSequence(cfg.seed).spawn(max(cfg.n_estimators, 1))
        deviance = []
        stages: list[list[RegressionTree]] = []
        rows_idx = np.arange(n)
        m_rows = _ceil_fraction(cfg.subsample, n)
        k_factor = (K - 1.0) / K
        for s in range(cfg.n_estimators):
            proba = _softmax(raw)
            deviance.append(multinomial_deviance(ids, proba))
            if cfg.subsample < 1.0:
                rng = np.random.default_rng(seeds[s])
                sub = rng.choice(n, size=m_rows, replace=False)
            else:
                sub = rows_idx
            node_init = np.full(n, -1, dtype=np.int32)
            node_init[sub] = 0
            stage: list[RegressionTree] = []
            for k in range(K):
                residual = (ids == k).astype(np.float64) - proba[:, k]
                tree = grow_regression_tree(
                    XT, orders, residual, node_init.copy(),
                    cfg.max_depth, cfg.min_samples_split, cfg.min_samples_leaf,
                    k_factor,
                )
                raw[:, k] += cfg.learning_rate * tree.value_for(X)
                stage.append(tree)
            stages.append(stage)
        deviance.append(multinomial_deviance(ids, _softmax(raw)))
        self.stages_ = stages
        self.train_deviance_ = np.asarray(deviance)
        self._store_meta(X, names, classes, level)
        return self

    def decision_function(self, m) -> np.ndarray:
        X = self._check_input(m)
        K = len(self.classes_)
        raw = np.tile(self.init_score_, (X.shape[0], 1))
        for stage in self.stages_:
            for k in range(K):
                raw[:, k] += self.config.learning_rate * stage[k].value_for(X)
        return raw

    def predict_proba(self, m) -> np.ndarray:
        return _softmax(self.decision_function(m))
