"""Binary CART classification trees: the rigid seed models.

Trees are greedy Gini-impurity trees with midpoint thresholds and the
fixed routing convention ``x[feature] <= threshold -> left``.  The same
convention is used by the network compiler so both model families can
only disagree on measure-zero inputs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DataError, DegenerateTreeError
from .metrics import accuracy


@dataclass(frozen=True)
class TreeNode:
    """Inner node (feature/threshold/children) or leaf (class_probs)."""

    feature: int = -1
    threshold: float = float("nan")
    left: int = -1
    right: int = -1
    class_probs: tuple[float, ...] | None = None
    sample_count: int = 0

    @property
    def is_leaf(self) -> bool:
        return self.left < 0


@dataclass(frozen=True)
class DecisionTree:
    nodes: tuple[TreeNode, ...]
    root: int
    depth: int
    class_count: int
    n_features: int

    @property
    def n_leaves(self) -> int:
        return sum(1 for n in self.nodes if n.is_leaf)

    @property
    def n_inner(self) -> int:
        return len(self.nodes) - self.n_leaves


def _gini_weighted(left_counts, right_counts, n_left, n_right):
    gini_left = 1.0 - ((left_counts / n_left[:, None]) ** 2).sum(axis=1)
    gini_right = 1.0 - ((right_counts / n_right[:, None]) ** 2).sum(axis=1)
    n = n_left + n_right
    return (n_left * gini_left + n_right * gini_right) / n


def _best_split(X, y, class_count, min_leaf):
    """Lowest weighted-Gini (feature, threshold) over midpoint candidates.

    Ties resolve to the lowest feature index, then the lowest threshold.
    Returns None when no candidate leaves both children with >= min_leaf
    rows (e.g. all features constant).
    """
    n = y.size
    onehot = np.zeros((n, class_count))
    onehot[np.arange(n), y] = 1.0
    best = None
    for f in range(X.shape[1]):
        col = X[:, f]
        order = np.argsort(col, kind="stable")
        sorted_col = col[order]
        cuts = np.flatnonzero(sorted_col[:-1] < sorted_col[1:])
        if cuts.size == 0:
            continue
        cum = np.cumsum(onehot[order], axis=0)
        left_counts = cum[cuts]
        right_counts = cum[-1] - left_counts
        n_left = (cuts + 1).astype(np.float64)
        n_right = n - n_left
        usable = (n_left >= min_leaf) & (n_right >= min_leaf)
        if not usable.any():
            continue
        impurity = _gini_weighted(left_counts, right_counts, n_left, n_right)
        impurity[~usable] = np.inf
        j = int(np.argmin(impurity))  # cuts ascend, so first min = lowest threshold
        if best is None or impurity[j] < best[0]:
            threshold = 0.5 * (sorted_col[cuts[j]] + sorted_col[cuts[j] + 1])
            best = (float(impurity[j]), f, threshold)
    return best


def fit_tree(X, y, class_count: int, max_depth: int, min_leaf: int = 1) -> DecisionTree:
    """Greedy CART fit; deterministic given (data, hyperparameters).

    A node stops splitting at ``max_depth``, when it is pure, when it has
    fewer than ``2 * min_leaf`` rows, or when no usable candidate split
    remains.  Leaves store empirical class frequencies.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.int64)
    if X.ndim != 2 or y.shape != (X.shape[0],):
        raise DataError("X must be 2-D with one label per row")
    if y.size == 0:
        raise DataError("empty training view")
    if not np.isfinite(X).all():
        raise DataError("training features must be finite")
    if class_count < 2 or y.min() < 0 or y.max() >= class_count:
        raise DataError("labels must be dense ids in [0, class_count)")
    if max_depth < 1:
        raise ConfigError("max_depth must be >= 1")
    if min_leaf < 1:
        raise ConfigError("min_leaf must be >= 1")

    nodes: list[TreeNode | None] = []

    def build(idx: np.ndarray, depth: int) -> tuple[int, int]:
        node_id = len(nodes)
        nodes.append(None)  # reserve the slot so ids come out in preorder
        y_node = y[idx]
        counts = np.bincount(y_node, minlength=class_count)
        split = None
        if depth < max_depth and counts.max() < idx.size and idx.size >= 2 * min_leaf:
            split = _best_split(X[idx], y_node, class_count, min_leaf)
        if split is None:
            probs = counts / idx.size
            nodes[node_id] = TreeNode(class_probs=tuple(float(p) for p in probs),
                                      sample_count=int(idx.size))
            return node_id, depth
        _, feature, threshold = split
        mask = X[idx, feature] <= threshold
        left_id, left_depth = build(idx[mask], depth + 1)
        right_id, right_depth = build(idx[~mask], depth + 1)
        nodes[node_id] = TreeNode(feature=feature, threshold=float(threshold),
                                  left=left_id, right=right_id)
        return node_id, max(left_depth, right_depth)

    root, depth = build(np.arange(y.size), 0)
    return DecisionTree(tuple(nodes), root, depth, class_count, X.shape[1])


def predict_tree(tree: DecisionTree, x) -> tuple[int, int]:
    """Route one feature vector; returns (class id, leaf id).

    Boundary convention: ``x[feature] <= threshold`` goes left.  Class is
    the argmax of the leaf distribution, ties toward the lower class id.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (tree.n_features,):
        raise DataError(f"expected a vector of {tree.n_features} features")
    node_id = tree.root
    node = tree.nodes[node_id]
    while not node.is_leaf:
        node_id = node.left if x[node.feature] <= node.threshold else node.right
        node = tree.nodes[node_id]
    return int(np.argmax(node.class_probs)), node_id


def route(tree: DecisionTree, X) -> np.ndarray:
    """Leaf id reached by each row of X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != tree.n_features:
        raise DataError(f"expected rows of {tree.n_features} features")
    out = np.empty(X.shape[0], dtype=np.int64)
    for i, x in enumerate(X):
        node_id = tree.root
        node = tree.nodes[node_id]
        while not node.is_leaf:
            node_id = node.left if x[node.feature] <= node.threshold else node.right
            node = tree.nodes[node_id]
        out[i] = node_id
    return out


def predict(tree: DecisionTree, X) -> np.ndarray:
    """Class id for each row of X."""
    leaf_ids = route(tree, X)
    leaf_class = {i: int(np.argmax(n.class_probs))
                  for i, n in enumerate(tree.nodes) if n.is_leaf}
    return np.array([leaf_class[i] for i in leaf_ids], dtype=np.int64)


def select_depth_cv(dataset, depth_grid=range(1, 11), folds: int = 5,
                    rng: np.random.Generator | None = None,
                    min_leaf: int = 1) -> int:
    """Depth with the best stratified k-fold CV mean accuracy.

    Folds are drawn once and reused for every depth; ties break toward
    the smaller depth.
    """
    if rng is None:
        raise ConfigError("select_depth_cv requires an explicit generator")
    grid = sorted({int(d) for d in depth_grid})
    if not grid or grid[0] < 1:
        raise ConfigError("depth grid must contain integers >= 1")
    if folds < 2:
        raise ConfigError("need at least 2 folds")
    fold_of = np.empty(dataset.n_instances, dtype=np.int64)
    for c in range(dataset.class_count):
        members = np.flatnonzero(dataset.labels == c)
        if members.size < folds:
            raise DataError(f"class {c} has {members.size} instances: "
                            f"too few for {folds}-fold CV")
        perm = rng.permutation(members)
        for j, chunk in enumerate(np.array_split(perm, folds)):
            fold_of[chunk] = j

    X, y = dataset.features, dataset.labels
    best_depth, best_score = None, -1.0
    for depth in grid:
        scores = []
        for j in range(folds):
            train, test = fold_of != j, fold_of == j
            fitted = fit_tree(X[train], y[train], dataset.class_count, depth, min_leaf)
            scores.append(accuracy(predict(fitted, X[test]), y[test]))
        score = float(np.mean(scores))
        if score > best_score:
            best_depth, best_score = depth, score
    return best_depth


@dataclass(frozen=True)
class StructureIndex:
    """Preorder view of a tree's split/leaf structure.

    ``paths[l, k]`` is +1 when leaf l lies in the right subtree of inner
    node k, -1 when in the left subtree, and 0 when k is off l's root
    path.  ``path_lengths[l]`` counts the nonzeros of row l.
    """

    inner_ids: tuple[int, ...]
    leaf_ids: tuple[int, ...]
    paths: np.ndarray
    path_lengths: np.ndarray


def enumerate_structure(tree: DecisionTree) -> StructureIndex:
    """Inner nodes, leaves, and the signed root-to-leaf path matrix."""
    if tree.n_leaves < 2:
        raise DegenerateTreeError("single-leaf tree has no split structure")
    inner_ids: list[int] = []
    leaf_ids: list[int] = []
    rows: list[list[tuple[int, int]]] = []

    def walk(node_id: int, path: list[tuple[int, int]]) -> None:
        node = tree.nodes[node_id]
        if node.is_leaf:
            leaf_ids.append(node_id)
            rows.append(path)
            return
        k = len(inner_ids)
        inner_ids.append(node_id)
        walk(node.left, path + [(k, -1)])
        walk(node.right, path + [(k, +1)])

    walk(tree.root, [])
    paths = np.zeros((len(leaf_ids), len(inner_ids)), dtype=np.int8)
    for l, row in enumerate(rows):
        for k, sign in row:
            paths[l, k] = sign
    paths.setflags(write=False)
    lengths = np.count_nonzero(paths, axis=1)
    lengths.setflags(write=False)
    return StructureIndex(tuple(inner_ids), tuple(leaf_ids), paths, lengths)


def tree_to_json(tree: DecisionTree) -> dict:
    """JSON-safe interchange document for export and debugging."""
    nodes = []
    for i, node in enumerate(tree.nodes):
        if node.is_leaf:
            nodes.append({"id": i, "kind": "leaf",
                          "class_probs": [float(p) for p in node.class_probs],
                          "sample_count": node.sample_count})
        else:
            nodes.append({"id": i, "kind": "inner", "feature": node.feature,
                          "threshold": node.threshold,
                          "left": node.left, "right": node.right})
    return {"format": "decision-tree", "version": 1, "root": tree.root,
            "depth": tree.depth, "class_count": tree.class_count,
            "n_features": tree.n_features, "n_leaves": tree.n_leaves,
            "degenerate": tree.n_leaves < 2, "nodes": nodes}


def tree_from_json(doc: dict) -> DecisionTree:
    if doc.get("format") != "decision-tree":
        raise DataError("not a decision-tree document")
    slots: list[TreeNode | None] = [None] * len(doc["nodes"])
    for entry in doc["nodes"]:
        if entry["kind"] == "leaf":
            slots[entry["id"]] = TreeNode(
                class_probs=tuple(float(p) for p in entry["class_probs"]),
                sample_count=int(entry["sample_count"]))
        else:
            slots[entry["id"]] = TreeNode(
                feature=int(entry["feature"]), threshold=float(entry["threshold"]),
                left=int(entry["left"]), right=int(entry["right"]))
    if any(s is None for s in slots):
        raise DataError("node ids must cover 0..len(nodes)-1")
    return DecisionTree(tuple(slots), int(doc["root"]), int(doc["depth"]),
                        int(doc["class_count"]), int(doc["n_features"]))


def tree_sha256(tree: DecisionTree) -> str:
    """Stable content hash used as model provenance."""
    canonical = json.dumps(tree_to_json(tree), sort_keys=True,
                           separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
