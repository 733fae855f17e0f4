"""Binary CART classifier: greedy impurity-minimizing splits, optional
best-first growth under a leaf budget, and minimal cost-complexity pruning.

Thresholds are midpoints of consecutive distinct sorted values; impurity
gain is the size-weighted decrease ``(W_node/W_root) * (imp - (W_L*imp_L +
W_R*imp_R)/W_node)`` computed with class weights. Sample-count constraints
(min_samples_split/leaf) always use raw counts. Ties between equally good
splits go to the lowest feature index, then the lowest threshold. Zero-gain
splits are allowed (an impure node keeps splitting while constraints permit),
which is what lets a depth-2 tree solve XOR exactly.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import DimensionMismatch, EmptyInput
from ..rng import Stream, derive_seed


@dataclass
class TreeNode:
    n_samples: int
    counts: np.ndarray  # weighted class counts (2,)
    impurity: float
    feature: int = -1  # -1 marks a leaf
    threshold: float = 0.0
    left: "TreeNode | None" = None
    right: "TreeNode | None" = None

    @property
    def is_leaf(self) -> bool:
        return self.feature < 0


@dataclass(frozen=True)
class TreeParams:
    criterion: str = "gini"  # gini | entropy | log_loss
    max_depth: int | None = None
    min_samples_split: int = 2
    min_samples_leaf: int = 1
    max_features: str | int | None = None  # None | "sqrt" | "log2" | int
    max_leaf_nodes: int | None = None
    min_impurity_decrease: float = 0.0
    splitter: str = "best"  # best | random
    class_weight: str | None = None  # None | "balanced"
    ccp_alpha: float = 0.0
    seed: int = 0


@dataclass(frozen=True)
class TreeModel:
    root: TreeNode
    params: TreeParams
    n_features: int
    class_weights: np.ndarray


def impurity_from_counts(counts: np.ndarray, criterion: str) -> float:
    """Gini 1 - sum p^2, entropy in bits, or log_loss (entropy in nats)."""
    total = counts.sum()
    if total <= 0:
        return 0.0
    p = counts / total
    p = p[p > 0]
    if criterion == "gini":
        return float(1.0 - (p**2).sum())
    if criterion == "entropy":
        return float(-(p * np.log2(p)).sum())
    if criterion == "log_loss":
        return float(-(p * np.log(p)).sum())
    raise ValueError(f"unknown criterion {criterion!r}")


def _resolve_max_features(max_features, p: int) -> int:
    if max_features is None:
        return p
    if max_features == "sqrt":
        return max(1, int(math.floor(math.sqrt(p))))
    if max_features == "log2":
        return max(1, int(math.floor(math.log2(p)))) if p > 1 else 1
    if isinstance(max_features, (int, np.integer)):
        return max(1, min(p, int(max_features)))
    raise ValueError(f"unknown max_features {max_features!r}")


class _Builder:
    def __init__(self, x, y, params: TreeParams, class_weights: np.ndarray):
        self.x = x
        self.y = y
        self.params = params
        self.cw = class_weights
        self.sw = class_weights[y]
        self.w_root = float(self.sw.sum())
        self.n_candidate_features = _resolve_max_features(params.max_features, x.shape[1])
        self.stream = Stream(derive_seed(params.seed, "tree"))

    def node_of(self, idx: np.ndarray) -> TreeNode:
        counts = np.array(
            [float(self.sw[idx][self.y[idx] == c].sum()) for c in (0, 1)]
        )
        return TreeNode(len(idx), counts, impurity_from_counts(counts, self.params.criterion))

    def _candidate_features(self) -> np.ndarray:
        p = self.x.shape[1]
        if self.n_candidate_features >= p:
            return np.arange(p)
        return np.sort(self.stream.sample_without_replacement(p, self.n_candidate_features))

    def _eval_feature_best(self, idx, f, node):
        vals = self.x[idx, f]
        order = np.argsort(vals, kind="stable")
        sv = vals[order]
        boundaries = np.nonzero(sv[:-1] < sv[1:])[0]  # split after position i
        if len(boundaries) == 0:
            return None
        yw = (self.sw[idx] * self.y[idx])[order]
        wall = self.sw[idx][order]
        cum1 = np.cumsum(yw)[boundaries]
        cumw = np.cumsum(wall)[boundaries]
        left_n = boundaries + 1
        right_n = len(idx) - left_n
        ok = (left_n >= self.params.min_samples_leaf) & (right_n >= self.params.min_samples_leaf)
        if not np.any(ok):
            return None
        w_total = node.counts.sum()
        left_counts = np.stack([cumw - cum1, cum1], axis=1)
        right_counts = node.counts - left_counts
        imp_l = _impurity_rows(left_counts, self.params.criterion)
        imp_r = _impurity_rows(right_counts, self.params.criterion)
        child = (cumw * imp_l + (w_total - cumw) * imp_r) / w_total
        gain = (w_total / self.w_root) * (node.impurity - child)
        gain[~ok] = -np.inf
        best = int(np.argmax(gain))  # first max -> lowest threshold
        if not np.isfinite(gain[best]):
            return None
        b = boundaries[best]
        threshold = float((sv[b] + sv[b + 1]) / 2.0)
        return float(gain[best]), threshold

    def _eval_feature_random(self, idx, f, node):
        vals = self.x[idx, f]
        lo, hi = float(vals.min()), float(vals.max())
        if lo == hi:
            return None
        threshold = self.stream.next_uniform() * (hi - lo) + lo
        left = vals <= threshold
        n_l = int(left.sum())
        n_r = len(idx) - n_l
        if n_l < self.params.min_samples_leaf or n_r < self.params.min_samples_leaf:
            return None
        if n_l == 0 or n_r == 0:
            return None
        w = self.sw[idx]
        yy = self.y[idx]
        left_counts = np.array([float(w[left & (yy == c)].sum()) for c in (0, 1)])
        right_counts = node.counts - left_counts
        w_total = node.counts.sum()
        child = (
            left_counts.sum() * impurity_from_counts(left_counts, self.params.criterion)
            + right_counts.sum() * impurity_from_counts(right_counts, self.params.criterion)
        ) / w_total
        gain = (w_total / self.w_root) * (node.impurity - child)
        return float(gain), float(threshold)

    def best_split(self, idx: np.ndarray, node: TreeNode):
        """(gain, feature, threshold) of the best admissible split, or None."""
        evaluate = (
            self._eval_feature_best if self.params.splitter == "best" else self._eval_feature_random
        )
        best = None
        for f in self._candidate_features():
            got = evaluate(idx, int(f), node)
            if got is None:
                continue
            gain, threshold = got
            if best is None or gain > best[0]:  # strict: ties keep lowest feature
                best = (gain, int(f), threshold)
        if best is None or best[0] < self.params.min_impurity_decrease:
            return None
        return best

    def splittable(self, node: TreeNode, depth: int) -> bool:
        p = self.params
        if node.impurity <= 0.0:
            return False
        if node.n_samples < p.min_samples_split or node.n_samples < 2 * p.min_samples_leaf:
            return False
        if p.max_depth is not None and depth >= p.max_depth:
            return False
        return True

    def grow_depth_first(self, idx: np.ndarray, depth: int) -> TreeNode:
        node = self.node_of(idx)
        if not self.splittable(node, depth):
            return node
        split = self.best_split(idx, node)
        if split is None:
            return node
        _, f, threshold = split
        mask = self.x[idx, f] <= threshold
        node.feature = f
        node.threshold = threshold
        node.left = self.grow_depth_first(idx[mask], depth + 1)
        node.right = self.grow_depth_first(idx[~mask], depth + 1)
        return node

    def grow_best_first(self, idx: np.ndarray) -> TreeNode:
        root = self.node_of(idx)
        heap: list = []
        tick = 0  # FIFO tiebreak keeps expansion order deterministic
        def push(node, node_idx, depth):
            nonlocal tick
            if not self.splittable(node, depth):
                return
            split = self.best_split(node_idx, node)
            if split is None:
                return
            heapq.heappush(heap, (-split[0], tick, node, node_idx, depth, split))
            tick += 1

        push(root, idx, 0)
        n_leaves = 1
        while heap and n_leaves < self.params.max_leaf_nodes:
            _, _, node, node_idx, depth, (gain, f, threshold) = heapq.heappop(heap)
            mask = self.x[node_idx, f] <= threshold
            node.feature = f
            node.threshold = threshold
            node.left = self.node_of(node_idx[mask])
            node.right = self.node_of(node_idx[~mask])
            n_leaves += 1
            push(node.left, node_idx[mask], depth + 1)
            push(node.right, node_idx[~mask], depth + 1)
        return root


def _impurity_rows(counts: np.ndarray, criterion: str) -> np.ndarray:
    totals = counts.sum(axis=1)
    safe = np.where(totals > 0, totals, 1.0)
    p = counts / safe[:, None]
    if criterion == "gini":
        out = 1.0 - (p**2).sum(axis=1)
    else:
        log = np.log2 if criterion == "entropy" else np.log
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = np.where(p > 0, p * log(p), 0.0)
        out = -terms.sum(axis=1)
    out[totals <= 0] = 0.0
    return out


def _collect_internal(node: TreeNode, out: list) -> None:
    if not node.is_leaf:
        out.append(node)
        _collect_internal(node.left, out)
        _collect_internal(node.right, out)


def _subtree_stats(node: TreeNode, w_root: float):
    """(leaf-risk sum, leaf count) with R(t) = (W_t / W_root) * impurity(t)."""
    if node.is_leaf:
        return (node.counts.sum() / w_root) * node.impurity, 1
    rl, nl = _subtree_stats(node.left, w_root)
    rr, nr = _subtree_stats(node.right, w_root)
    return rl + rr, nl + nr


def _prune(root: TreeNode, alpha: float, w_root: float) -> None:
    """Minimal cost-complexity pruning: repeatedly collapse the weakest link
    while its effective alpha is at or below ``alpha``. Skipped entirely at
    alpha = 0 so an unpruned tree stays byte-identical."""
    if alpha <= 0.0:
        return
    while True:
        internal: list[TreeNode] = []
        _collect_internal(root, internal)
        if not internal:
            return
        weakest = None
        for node in internal:  # preorder; first minimum wins ties
            leaf_risk, n_leaves = _subtree_stats(node, w_root)
            own_risk = (node.counts.sum() / w_root) * node.impurity
            g = (own_risk - leaf_risk) / (n_leaves - 1)
            if weakest is None or g < weakest[0]:
                weakest = (g, node)
        if weakest[0] > alpha:
            return
        node = weakest[1]
        node.feature = -1
        node.left = None
        node.right = None


def resolve_class_weights(y: np.ndarray, class_weight) -> np.ndarray:
    """Per-class weights: uniform, 'balanced' (n / (K * n_c)), or explicit."""
    if class_weight is None:
        return np.ones(2)
    if isinstance(class_weight, str) and class_weight == "balanced":
        n = len(y)
        counts = np.array([(y == c).sum() for c in (0, 1)], dtype=np.float64)
        return np.where(counts > 0, n / (2.0 * np.maximum(counts, 1.0)), 0.0)
    return np.asarray(class_weight, dtype=np.float64)


def tree_fit(x: np.ndarray, y: np.ndarray, params: TreeParams | None = None,
             class_weights: np.ndarray | None = None) -> TreeModel:
    """Grow (depth-first, or best-first under max_leaf_nodes) then prune.

    ``class_weights`` overrides the params.class_weight resolution; the
    forest uses it to weight by the full training set rather than each
    bootstrap sample.
    """
    params = params or TreeParams()
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y).astype(np.int64)
    if x.ndim != 2 or x.shape[0] == 0:
        raise EmptyInput("tree_fit requires at least one sample")
    if params.criterion not in ("gini", "entropy", "log_loss"):
        raise ValueError(f"unknown criterion {params.criterion!r}")
    if params.splitter not in ("best", "random"):
        raise ValueError(f"unknown splitter {params.splitter!r}")
    if class_weights is None:
        class_weights = resolve_class_weights(y, params.class_weight)
    builder = _Builder(x, y, params, class_weights)
    idx = np.arange(len(y))
    if params.max_leaf_nodes is not None:
        root = builder.grow_best_first(idx)
    else:
        root = builder.grow_depth_first(idx, 0)
    _prune(root, params.ccp_alpha, builder.w_root)
    return TreeModel(root, params, x.shape[1], class_weights)


def _leaf_for(model: TreeModel, row: np.ndarray) -> TreeNode:
    node = model.root
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node


def tree_score(m: TreeModel, x: np.ndarray) -> np.ndarray:
    """Weighted positive-class fraction at the reached leaf."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(1, -1)
    if x.shape[1] != m.n_features:
        raise DimensionMismatch(f"input has {x.shape[1]} features, model expects {m.n_features}")
    out = np.empty(x.shape[0])
    for i in range(x.shape[0]):
        counts = _leaf_for(m, x[i]).counts
        total = counts.sum()
        out[i] = counts[1] / total if total > 0 else 0.0
    return out


def tree_predict(m: TreeModel, x: np.ndarray) -> np.ndarray:
    """Majority weighted class at the leaf; exact ties go to class 0."""
    return (tree_score(m, x) > 0.5).astype(np.int64)
