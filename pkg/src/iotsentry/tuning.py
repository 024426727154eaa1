"""Hyperparameter search: exhaustive grids scored by stratified k-fold CV.

Combinations are enumerated lexicographically by parameter name and then
list order, so tie-breaking (earlier combination wins) is reproducible.
Fold-level preprocessing (median imputation) is computed from fold-train
rows only.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ._common import as_feature_array, as_label_ids
from .data import FeatureMatrix, apply_imputation, column_medians
from .ensemble import (
    AdaBoostClassifier,
    AdaBoostConfig,
    ForestConfig,
    GBMConfig,
    GradientBoostingClassifier,
    RandomForestClassifier,
)
from .metrics import aggregate_metrics, confusion_matrix
from .neighbors import KnnConfig, KNeighborsClassifier
from .tree import DecisionTreeClassifier, TreeConfig

MODEL_KINDS = ("dt", "rf", "gbm", "ada", "knn")
SCORINGS = ("accuracy", "macro_f1")

# tuned settings the toolkit ships with, one flat mapping per model kind
TUNED_PARAMS: dict[str, dict[str, Any]] = {
    "dt": {
        "criterion": "entropy",
        "max_depth": 30,
        "min_samples_split": 10,
        "min_samples_leaf": 5,
        "max_features": "sqrt",
    },
    "rf": {
        "n_estimators": 200,
        "criterion": "gini",
        "max_depth": 8,
        "max_features": "sqrt",
    },
    "gbm": {
        "n_estimators": 500,
        "learning_rate": 0.01,
        "max_depth": 4,
        "subsample": 0.8,
    },
    "ada": {"n_estimators": 100, "learning_rate": 0.1},
    "knn": {"n_neighbors": 5, "weighting": "distance", "metric": "manhattan"},
}

_TREE_KEYS = (
    "criterion",
    "max_depth",
    "min_samples_split",
    "min_samples_leaf",
    "max_features",
)


def make_model(kind: str, params: dict[str, Any] | None = None, seed: int = 0):
    """Instantiate an unfitted classifier of the given kind.

    ``params`` uses flat names; tree-shape keys are routed into the nested
    tree config for the ensembles that carry one.
    """
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    p = dict(params or {})

    def pop_tree(defaults: dict[str, Any]) -> TreeConfig:
        kw = dict(defaults)
        for key in _TREE_KEYS:
            if key in p:
                kw[key] = p.pop(key)
        return TreeConfig(seed=seed, **kw)

    if kind == "dt":
        model = DecisionTreeClassifier(pop_tree({}))
    elif kind == "rf":
        tree = pop_tree({"criterion": "gini", "max_depth": 8, "max_features": "sqrt"})
        model = RandomForestClassifier(ForestConfig(tree=tree, seed=seed, **p))
        p = {}
    elif kind == "ada":
        base = pop_tree({"max_depth": 1})
        model = AdaBoostClassifier(AdaBoostConfig(base_tree=base, seed=seed, **p))
        p = {}
    elif kind == "gbm":
        p.pop("criterion", None)
        model = GradientBoostingClassifier(GBMConfig(seed=seed, **p))
        p = {}
    else:
        model = KNeighborsClassifier(KnnConfig(**p))
        p = {}
    if kind == "dt" and p:
        raise ValueError(f"unknown decision-tree parameters: {sorted(p)}")
    return model


def tuned_model(kind: str, seed: int = 0, overrides: dict[str, Any] | None = None):
    """A model of the given kind with the shipped tuned settings applied."""
    params = dict(TUNED_PARAMS[kind] if kind in TUNED_PARAMS else {})
    params.update(overrides or {})
    return make_model(kind, params, seed=seed)


def default_grids() -> dict[str, dict[str, list]]:
    """Search grids bracketing each shipped tuned value."""
    return {
        "dt": {
            "criterion": ["gini", "entropy"],
            "max_depth": [15, 30, 45],
            "min_samples_split": [2, 10, 20],
            "min_samples_leaf": [1, 5, 9],
            "max_features": ["sqrt", "all"],
        },
        "rf": {
            "n_estimators": [100, 200, 300],
            "criterion": ["gini", "entropy"],
            "max_depth": [4, 8, 16],
            "max_features": ["sqrt"],
        },
        "gbm": {
            "n_estimators": [250, 500, 750],
            "learning_rate": [0.005, 0.01, 0.05],
            "max_depth": [3, 4, 5],
            "subsample": [0.6, 0.8, 1.0],
        },
        "ada": {
            "n_estimators": [50, 100, 200],
            "learning_rate": [0.05, 0.1, 0.5],
        },
        "knn": {
            "n_neighbors": [3, 5, 7],
            "weighting": ["uniform", "distance"],
        },
    }


def stratified_kfold(y, folds: int, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Seeded class-balanced folds: per class, fold sizes differ by at most 1.

    Returns (train_indices, validation_indices) pairs whose validation
    sets partition [0, n).
    """
    ids, classes, _ = as_label_ids(y)
    if folds < 2:
        raise ValueError(f"folds must be >= 2, got {folds}")
    counts = np.bincount(ids)
    small = np.flatnonzero((counts > 0) & (counts < folds))
    if small.size:
        names = [classes[c] if classes else str(c) for c in small]
        raise ValueError(
            f"classes with fewer rows than folds={folds}: {', '.join(names)}"
        )
    rng = np.random.default_rng(seed)
    fold_of = np.empty(ids.size, dtype=np.int64)
    for c in range(counts.size):
        members = np.flatnonzero(ids == c)
        if members.size == 0:
            continue
        members = members[rng.permutation(members.size)]
        # first (count mod folds) folds take the extra row
        sizes = np.full(folds, members.size // folds)
        sizes[: members.size % folds] += 1
        fold_of[members] = np.repeat(np.arange(folds), sizes)
    out = []
    everything = np.arange(ids.size)
    for f in range(folds):
        va = everything[fold_of == f]
        tr = everything[fold_of != f]
        out.append((tr, va))
    return out


@dataclass
class CVCell:
    params: dict[str, Any]
    fold_accuracies: list[float]
    mean: float
    std: float

    def to_dict(self) -> dict:
        return {
            "params": self.params,
            "fold_scores": self.fold_accuracies,
            "mean": self.mean,
            "std": self.std,
        }


@dataclass
class CVResult:
    model_kind: str
    scoring: str
    folds: int
    cells: list[CVCell] = field(default_factory=list)
    best_index: int = 0

    @property
    def best_params(self) -> dict[str, Any]:
        return self.cells[self.best_index].params

    @property
    def best_score(self) -> float:
        return self.cells[self.best_index].mean

    def to_dict(self) -> dict:
        return {
            "model": self.model_kind,
            "scoring": self.scoring,
            "folds": self.folds,
            "best_index": self.best_index,
            "best_params": self.best_params,
            "best_score": self.best_score,
            "cells": [c.to_dict() for c in self.cells],
        }


def enumerate_grid(grid: dict[str, list]) -> list[dict[str, Any]]:
    """All combinations, lexicographic by parameter name then list order."""
    if not grid:
        raise ValueError("parameter grid is empty")
    names = sorted(grid)
    for name in names:
        if not isinstance(grid[name], (list, tuple)) or len(grid[name]) == 0:
            raise ValueError(f"grid entry {name!r} must be a nonempty list")
    return [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]


def _impute_pair(Xtr: np.ndarray, Xva: np.ndarray | None):
    names = [str(i) for i in range(Xtr.shape[1])]
    med = column_medians(FeatureMatrix(Xtr, names))
    out_tr = apply_imputation(FeatureMatrix(Xtr, names), med).values
    if Xva is None:
        return out_tr, None
    return out_tr, apply_imputation(FeatureMatrix(Xva, names), med).values


def _fold_matrices(X: np.ndarray, tr: np.ndarray, va: np.ndarray):
    """Fold-train and fold-validation matrices, imputed from fold-train medians only."""
    Xtr = X[tr]
    Xva = X[va]
    if np.isnan(Xtr).any() or np.isnan(Xva).any():
        Xtr, Xva = _impute_pair(Xtr, Xva)
    return Xtr, Xva


def _score(scoring: str, y_true: np.ndarray, y_pred: np.ndarray, n_classes: int) -> float:
    cm = confusion_matrix(y_true, y_pred, n_classes)
    agg = aggregate_metrics(cm)
    return agg.accuracy if scoring == "accuracy" else agg.macro_f1


def grid_search(
    model_kind: str,
    m,
    y,
    grid: dict[str, list] | None = None,
    folds: int = 5,
    seed: int = 0,
    scoring: str = "accuracy",
):
    """Exhaustive CV search; returns (CVResult, model refit on the full data).

    Ties on mean score go to the earlier combination in enumeration order.
    """
    if model_kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {model_kind!r}")
    if scoring not in SCORINGS:
        raise ValueError(f"scoring must be one of {SCORINGS}, got {scoring!r}")
    X, _ = as_feature_array(m)
    ids, classes, level = as_label_ids(y)
    n_classes = len(classes) if classes else int(ids.max()) + 1
    combos = enumerate_grid(grid if grid is not None else default_grids()[model_kind])
    fold_indices = stratified_kfold(y, folds, seed)
    result = CVResult(model_kind=model_kind, scoring=scoring, folds=folds)
    best = -np.inf
    for i, params in enumerate(combos):
        scores = []
        for tr, va in fold_indices:
            Xtr, Xva = _fold_matrices(X, tr, va)
            model = make_model(model_kind, params, seed=seed)
            try:
                model.fit(Xtr, ids[tr])
                pred = model.predict(Xva)
            except Exception as exc:
                raise RuntimeError(f"fit failed for params {params!r}: {exc}") from exc
            scores.append(_score(scoring, ids[va], pred, n_classes))
        arr = np.asarray(scores)
        cell = CVCell(
            params=params,
            fold_accuracies=[float(s) for s in scores],
            mean=float(arr.mean()),
            std=float(arr.std()),
        )
        result.cells.append(cell)
        if cell.mean > best:
            best = cell.mean
            result.best_index = i
    X_full = X
    if np.isnan(X_full).any():
        X_full, _ = _impute_pair(X_full, None)
    best_model = make_model(model_kind, result.best_params, seed=seed)
    best_model.fit(X_full, y if classes else ids)
    return result, best_model
