"""Versioned JSON persistence for the five fitted model kinds."""

from __future__ import annotations

import json
from dataclasses import asdict

import numpy as np

from ..errors import DataError
from .forest import ForestModel, ForestParams
from .knn import KnnModel
from .logreg import LogRegModel
from .svm import SvmModel
from .tree import TreeModel, TreeNode, TreeParams

FORMAT = "tabmlkit-model/1"


def _node_to_dict(node: TreeNode) -> dict:
    out = {
        "n_samples": int(node.n_samples),
        "counts": [float(c) for c in node.counts],
        "impurity": float(node.impurity),
    }
    if not node.is_leaf:
        out["feature"] = int(node.feature)
        out["threshold"] = float(node.threshold)
        out["left"] = _node_to_dict(node.left)
        out["right"] = _node_to_dict(node.right)
    return out


def _node_from_dict(d: dict) -> TreeNode:
    node = TreeNode(int(d["n_samples"]), np.array(d["counts"], dtype=np.float64), float(d["impurity"]))
    if "feature" in d:
        node.feature = int(d["feature"])
        node.threshold = float(d["threshold"])
        node.left = _node_from_dict(d["left"])
        node.right = _node_from_dict(d["right"])
    return node


def _tree_fields(m: TreeModel) -> dict:
    return {
        "params": asdict(m.params),
        "n_features": int(m.n_features),
        "class_weights": [float(w) for w in m.class_weights],
        "root": _node_to_dict(m.root),
    }


def _tree_from_fields(f: dict) -> TreeModel:
    params = TreeParams(**f["params"])
    return TreeModel(
        _node_from_dict(f["root"]),
        params,
        int(f["n_features"]),
        np.array(f["class_weights"], dtype=np.float64),
    )


def model_to_dict(model) -> dict:
    if isinstance(model, LogRegModel):
        kind, fields = "logreg", {
            "weights": [float(w) for w in model.weights],
            "bias": float(model.bias),
            "penalty": model.penalty,
            "c": float(model.c),
            "converged": bool(model.converged),
            "n_iter": int(model.n_iter),
        }
    elif isinstance(model, TreeModel):
        kind, fields = "tree", _tree_fields(model)
    elif isinstance(model, ForestModel):
        kind, fields = "forest", {
            "params": asdict(model.params),
            "trees": [_tree_fields(t) for t in model.trees],
        }
    elif isinstance(model, KnnModel):
        kind, fields = "knn", {
            "train_x": model.train_x.tolist(),
            "train_y": [int(v) for v in model.train_y],
            "k": int(model.k),
            "weighting": model.weighting,
            "metric": model.metric,
        }
    elif isinstance(model, SvmModel):
        kind, fields = "svm", {
            "support_vectors": model.support_vectors.tolist(),
            "dual_coef": [float(v) for v in model.dual_coef],
            "intercept": float(model.intercept),
            "c": float(model.c),
            "gamma": float(model.gamma),
            "gamma_rule": model.gamma_rule,
            "kernel": model.kernel,
            "converged": bool(model.converged),
            "support_indices": [int(i) for i in model.support_indices],
        }
    else:
        raise DataError(f"cannot serialize model of type {type(model).__name__}")
    return {"format": FORMAT, "kind": kind, "fields": fields}


def model_from_dict(d: dict):
    if d.get("format") != FORMAT:
        raise DataError(f"unsupported model format {d.get('format')!r}")
    kind = d.get("kind")
    f = d.get("fields", {})
    if kind == "logreg":
        return LogRegModel(
            np.array(f["weights"], dtype=np.float64),
            float(f["bias"]),
            f["penalty"],
            float(f["c"]),
            bool(f["converged"]),
            int(f["n_iter"]),
        )
    if kind == "tree":
        return _tree_from_fields(f)
    if kind == "forest":
        return ForestModel(
            tuple(_tree_from_fields(t) for t in f["trees"]),
            ForestParams(**f["params"]),
        )
    if kind == "knn":
        return KnnModel(
            np.array(f["train_x"], dtype=np.float64),
            np.array(f["train_y"], dtype=np.int64),
            int(f["k"]),
            f["weighting"],
            f["metric"],
        )
    if kind == "svm":
        return SvmModel(
            support_vectors=np.array(f["support_vectors"], dtype=np.float64).reshape(
                len(f["support_vectors"]), -1
            ),
            dual_coef=np.array(f["dual_coef"], dtype=np.float64),
            intercept=float(f["intercept"]),
            c=float(f["c"]),
            gamma=float(f["gamma"]),
            gamma_rule=f["gamma_rule"],
            kernel=f["kernel"],
            converged=bool(f["converged"]),
            support_indices=np.array(f["support_indices"], dtype=np.int64),
        )
    raise DataError(f"unknown model kind {kind!r}")


def save_model(model, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_model(path):
    with open(path, "r", encoding="utf-8") as fh:
        return model_from_dict(json.load(fh))
