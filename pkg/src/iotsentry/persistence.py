"""Save and load fitted classifiers as self-describing JSON documents.

Every document carries a format version, the model kind, the feature
schema and class names it was fitted on, and enough numeric state to
reproduce predictions exactly.  Floats are written with Python's
round-trip repr, so a loaded model scores byte-for-byte like the one
that was saved.  Writes go to a temporary file in the target directory
followed by an atomic rename, so readers never observe a half-written
document.  The creation timestamp honours SOURCE_DATE_EPOCH to keep
repeated builds reproducible.
"""

from __future__ import annotations

import base64
import dataclasses
import json
import os
import tempfile
import time
from datetime import datetime, timezone

import numpy as np

from .data import Standardization
from .ensemble import (
    AdaBoostClassifier,
    AdaBoostConfig,
    ForestConfig,
    GBMConfig,
    GradientBoostingClassifier,
    RandomForestClassifier,
    RegressionTree,
)
from .neighbors import KnnConfig, KNeighborsClassifier
from .tree import DecisionTreeClassifier, TreeConfig, TreeNodes

FORMAT_VERSION = 1

_KINDS = {
    DecisionTreeClassifier: "decision_tree",
    RandomForestClassifier: "random_forest",
    AdaBoostClassifier: "adaboost",
    GradientBoostingClassifier: "gradient_boosting",
    KNeighborsClassifier: "knn",
}


def _ints(a) -> list[int]:
    return [int(v) for v in np.asarray(a).ravel()]


def _floats(a) -> list[float]:
    return [float(v) for v in np.asarray(a).ravel()]


def _pack_matrix(a: np.ndarray) -> dict:
    """Exact binary encoding for bulky float matrices."""
    arr = np.ascontiguousarray(a, dtype=np.float64)
    return {
        "shape": list(arr.shape),
        "dtype": "<f8",
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def _unpack_matrix(doc: dict) -> np.ndarray:
    raw = base64.b64decode(doc["data"])
    arr = np.frombuffer(raw, dtype=np.dtype(doc["dtype"])).astype(np.float64)
    return np.ascontiguousarray(arr.reshape(doc["shape"]))


def _class_tree_doc(t: TreeNodes) -> dict:
    return {
        "feature": _ints(t.feature),
        "threshold": _floats(t.threshold),
        "left": _ints(t.left),
        "right": _ints(t.right),
        "counts": [_floats(row) for row in t.counts],
    }


def _class_tree_load(doc: dict) -> TreeNodes:
    return TreeNodes(
        feature=np.asarray(doc["feature"], dtype=np.int32),
        threshold=np.asarray(doc["threshold"], dtype=np.float64),
        left=np.asarray(doc["left"], dtype=np.int32),
        right=np.asarray(doc["right"], dtype=np.int32),
        counts=np.asarray(doc["counts"], dtype=np.float64),
    )


def _reg_tree_doc(t: RegressionTree) -> dict:
    return {
        "feature": _ints(t.feature),
        "threshold": _floats(t.threshold),
        "left": _ints(t.left),
        "right": _ints(t.right),
        "value": _floats(t.value),
    }


def _reg_tree_load(doc: dict) -> RegressionTree:
    return RegressionTree(
        feature=np.asarray(doc["feature"], dtype=np.int32),
        threshold=np.asarray(doc["threshold"], dtype=np.float64),
        left=np.asarray(doc["left"], dtype=np.int32),
        right=np.asarray(doc["right"], dtype=np.int32),
        value=np.asarray(doc["value"], dtype=np.float64),
    )


def _tree_config_load(doc: dict) -> TreeConfig:
    return TreeConfig(**doc)


def _state_of(model) -> dict:
    if isinstance(model, DecisionTreeClassifier):
        return {"nodes": _class_tree_doc(model.nodes_)}
    if isinstance(model, RandomForestClassifier):
        return {"trees": [_class_tree_doc(t) for t in model.trees_]}
    if isinstance(model, AdaBoostClassifier):
        return {"trees": [_class_tree_doc(t) for t in model.trees_]}
    if isinstance(model, GradientBoostingClassifier):
        return {
            "init_score": _floats(model.init_score_),
            "stages": [[_reg_tree_doc(t) for t in stage] for stage in model.stages_],
            "train_deviance": _floats(model.train_deviance_),
        }
    if isinstance(model, KNeighborsClassifier):
        return {
            "mean": _floats(model.standardization_.mean),
            "std": _floats(model.standardization_.std),
            "train_matrix": _pack_matrix(model.X_),
            "train_labels": _ints(model.ids_),
        }
    raise TypeError(f"cannot serialise a {type(model).__name__}")


def _created_stamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    ts = int(epoch) if epoch is not None else int(time.time())
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def save_model(model, path: str) -> None:
    """Write one fitted classifier to ``path`` as JSON, atomically."""
    kind = _KINDS.get(type(model))
    if kind is None:
        raise TypeError(f"cannot serialise a {type(model).__name__}")
    if getattr(model, "classes_", None) is None:
        raise ValueError("refusing to save an unfitted model")
    doc = {
        "format_version": FORMAT_VERSION,
        "kind": kind,
        "created": _created_stamp(),
        "feature_names": model.feature_names_,
        "n_features": model.n_features_,
        "classes": model.classes_,
        "level": model.level_,
        "config": dataclasses.asdict(model.config),
        "state": _state_of(model),
    }
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=".model-", suffix=".json", dir=directory)
    try:
        with os.fdopen(fd, "w") as fh:
            json.dump(doc, fh, sort_keys=True, separators=(",", ":"), allow_nan=False)
            fh.write("\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _restore_meta(model, doc: dict) -> None:
    model.classes_ = list(doc["classes"])
    model.level_ = doc["level"]
    names = doc["feature_names"]
    model.feature_names_ = list(names) if names is not None else None
    model.n_features_ = int(doc["n_features"])


def load_model(path: str):
    """Rebuild a fitted classifier saved by :func:`save_model`."""
    with open(path) as fh:
        doc = json.load(fh)
    version = doc.get("format_version")
    if version != FORMAT_VERSION:
        raise ValueError(f"unsupported model format version: {version!r}")
    kind = doc.get("kind")
    state = doc["state"]
    cfg = doc["config"]
    if kind == "decision_tree":
        model = DecisionTreeClassifier(_tree_config_load(cfg))
        model.nodes_ = _class_tree_load(state["nodes"])
    elif kind == "random_forest":
        tree_cfg = _tree_config_load(cfg.pop("tree"))
        model = RandomForestClassifier(ForestConfig(tree=tree_cfg, **cfg))
        model.trees_ = [_class_tree_load(t) for t in state["trees"]]
        model._fitted = True
    elif kind == "adaboost":
        tree_cfg = _tree_config_load(cfg.pop("base_tree"))
        model = AdaBoostClassifier(AdaBoostConfig(base_tree=tree_cfg, **cfg))
        model.trees_ = [_class_tree_load(t) for t in state["trees"]]
        model.sample_weights_ = None
        model._fitted = True
    elif kind == "gradient_boosting":
        model = GradientBoostingClassifier(GBMConfig(**cfg))
        model.init_score_ = np.asarray(state["init_score"], dtype=np.float64)
        model.stages_ = [[_reg_tree_load(t) for t in stage] for stage in state["stages"]]
        model.train_deviance_ = np.asarray(state["train_deviance"], dtype=np.float64)
        model._fitted = True
    elif kind == "knn":
        model = KNeighborsClassifier(KnnConfig(**cfg))
        model.standardization_ = Standardization(
            mean=np.asarray(state["mean"], dtype=np.float64),
            std=np.asarray(state["std"], dtype=np.float64),
        )
        model.X_ = _unpack_matrix(state["train_matrix"])
        model.ids_ = np.asarray(state["train_labels"], dtype=np.int64)
    else:
        raise ValueError(f"unknown model kind: {kind!r}")
    _restore_meta(model, doc)
    return model
