"""CART regression trees, bootstrap random forests, and least-squares
gradient boosting.

Split criterion is reduction in total sum of squared errors, with candidate
thresholds at midpoints between consecutive distinct feature values.
Comparison rule is "<= goes left". Ties between features break toward the
lower feature index, ties between thresholds toward the smaller value, so
fits are fully deterministic given (data, config, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Below this node size the pure-Python scan beats numpy call overhead;
# both paths implement the identical split rule.
_SMALL_NODE = 48


@dataclass
class Leaf:
    value: float


@dataclass
class Internal:
    feature_index: int
    threshold: float
    left: "TreeNode"
    right: "TreeNode"


TreeNode = Leaf | Internal


@dataclass(frozen=True)
class TreeConfig:
    max_depth: int | None = None  # None = unbounded
    min_samples_split: int = 2
    seed: int = 42

    def validate(self) -> None:
        if self.max_depth is not None and self.max_depth < 1:
            raise ValueError("max_depth must be >= 1 when bounded")
        if self.min_samples_split < 2:
            raise ValueError("min_samples_split must be >= 2")


@dataclass
class ForestModel:
    trees: list[TreeNode]
    tree_count: int
    bootstrap: bool
    seed: int
    tree_config: TreeConfig


@dataclass
class GbrModel:
    initial_value: float
    stages: list[TreeNode]
    learning_rate: float
    stage_count: int
    max_depth: int
    seed: int
    # Training MSE after initialization and after each boosting stage.
    train_mse_per_stage: list[float] = field(default_factory=list)


def _best_split_small(x, y) -> tuple[float, float] | None:
    """Python-loop split scan for small nodes; same rule as the array path."""
    pairs = sorted(zip(x, y))
    m = len(pairs)
    total1 = 0.0
    total2 = 0.0
    for _, yv in pairs:
        total1 += yv
        total2 += yv * yv
    parent = total2 - total1 * total1 / m

    best_red = 0.0
    best_thr = None
    left1 = 0.0
    left2 = 0.0
    for p in range(1, m):
        xv, yv = pairs[p - 1]
        left1 += yv
        left2 += yv * yv
        if pairs[p][0] == xv:
            continue
        right1 = total1 - left1
        right2 = total2 - left2
        sse = (left2 - left1 * left1 / p) + (right2 - right1 * right1 / (m - p))
        red = parent - sse
        if red > best_red:
            best_red = red
            best_thr = (xv + pairs[p][0]) / 2.0
    if best_thr is None:
        return None
    return best_thr, best_red


def _best_split_arrays(x: np.ndarray, y: np.ndarray) -> tuple[float, float] | None:
    """Vectorized split scan over one feature column."""
    m = x.shape[0]
    order = np.argsort(x)
    xs = x[order]
    if xs[0] == xs[-1]:
        return None  # no candidate thresholds
    ys = y[order]

    c1 = np.cumsum(ys)
    c2 = np.cumsum(ys * ys)
    total1 = c1[-1]
    total2 = c2[-1]
    parent = total2 - total1 * total1 / m

    p = np.nonzero(xs[1:] != xs[:-1])[0] + 1  # left block sizes at boundaries
    left1 = c1[p - 1]
    left2 = c2[p - 1]
    nl = p.astype(np.float64)
    nr = m - nl
    sse = (left2 - left1 * left1 / nl) + ((total2 - left2) - (total1 - left1) ** 2 / nr)
    red = parent - sse
    best = int(np.argmax(red))  # first max = smallest threshold on ties
    if red[best] <= 0.0:
        return None
    pos = p[best]
    return float((xs[pos - 1] + xs[pos]) / 2.0), float(red[best])


def best_split(feature_column: np.ndarray, targets: np.ndarray) -> tuple[float, float] | None:
    """Best threshold for one feature, or None.

    Candidates are midpoints between consecutive distinct sorted feature
    values; the returned threshold maximizes the reduction in total SSE
    (parent minus children). Returns None when the feature is constant or
    no candidate gives a strictly positive reduction.
    """
    x = np.asarray(feature_column, dtype=np.float64)
    y = np.asarray(targets, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("feature column and targets must be equal-length vectors")
    if x.size < 2:
        raise ValueError("need at least 2 samples to split")
    if y.min() == y.max():
        return None  # constant target: every reduction is exactly zero
    return _best_split_arrays(x, y)


def _find_node_split(X: np.ndarray, y: np.ndarray) -> tuple[int, float] | None:
    """Best (feature, threshold) across all features; lower feature index
    wins ties on reduction."""
    if y.min() == y.max():
        return None
    m, d = X.shape
    best_red = 0.0
    best: tuple[int, float] | None = None
    small = m <= _SMALL_NODE
    if small:
        ylist = y.tolist()
    for f in range(d):
        if small:
            res = _best_split_small(X[:, f].tolist(), ylist)
        else:
            res = _best_split_arrays(np.ascontiguousarray(X[:, f]), y)
        if res is not None and res[1] > best_red:
            best_red = res[1]
            best = (f, res[0])
    return best


def _grow_tree(X: np.ndarray, y: np.ndarray, max_depth: int | None, min_samples_split: int) -> TreeNode:
    """Iterative greedy CART growth (explicit stack; unbalanced splits on
    monotone data would overflow Python's recursion limit)."""
    root_holder: list[TreeNode] = [None]  # type: ignore[list-item]
    # Stack entries: (X, y, depth, parent_holder, slot) where slot is
    # "left"/"right" or an index into root_holder.
    stack: list[tuple[np.ndarray, np.ndarray, int, object, object]] = [
        (X, y, 0, root_holder, 0)
    ]
    while stack:
        Xn, yn, depth, parent, slot = stack.pop()
        m = yn.shape[0]
        split = None
        if m >= min_samples_split and (max_depth is None or depth < max_depth):
            split = _find_node_split(Xn, yn)
        if split is None:
            node: TreeNode = Leaf(float(yn.mean()))
        else:
            f, thr = split
            node = Internal(f, thr, None, None)  # children filled via stack
            mask = Xn[:, f] <= thr
            stack.append((Xn[mask], yn[mask], depth + 1, node, "left"))
            notmask = ~mask
            stack.append((Xn[notmask], yn[notmask], depth + 1, node, "right"))
        if isinstance(parent, list):
            parent[slot] = node
        else:
            setattr(parent, slot, node)
    return root_holder[0]


def fit_tree(ds, cfg: TreeConfig = TreeConfig(max_depth=3)) -> TreeNode:
    """Greedy CART regression tree; leaf values are target means."""
    cfg.validate()
    if ds.n < 1:
        raise ValueError("cannot fit a tree on an empty dataset")
    X = np.ascontiguousarray(ds.features, dtype=np.float64)
    y = np.ascontiguousarray(ds.target, dtype=np.float64)
    return _grow_tree(X, y, cfg.max_depth, cfg.min_samples_split)


def predict_tree(tree: TreeNode, row: np.ndarray) -> float:
    """Descend the tree: feature value <= threshold goes left."""
    row = np.asarray(row, dtype=np.float64)
    node = tree
    while isinstance(node, Internal):
        if node.feature_index >= row.shape[0]:
            raise ValueError(
                f"row has {row.shape[0]} features but tree tests feature {node.feature_index}"
            )
        node = node.left if row[node.feature_index] <= node.threshold else node.right
    return node.value


def _flatten_tree(tree: TreeNode):
    """Array form (feature, threshold, left, right, value) for batch
    prediction; leaves have feature -1. Iterative, so arbitrarily deep
    trees cannot overflow the interpreter stack."""
    feat: list[int] = []
    thr: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    stack: list[tuple[TreeNode, int, bool]] = [(tree, -1, False)]
    while stack:
        node, parent, is_left = stack.pop()
        i = len(feat)
        if parent >= 0:
            if is_left:
                left[parent] = i
            else:
                right[parent] = i
        if isinstance(node, Leaf):
            feat.append(-1)
            thr.append(0.0)
            left.append(-1)
            right.append(-1)
            value.append(node.value)
        else:
            feat.append(node.feature_index)
            thr.append(node.threshold)
            left.append(0)
            right.append(0)
            value.append(0.0)
            stack.append((node.right, i, False))
            stack.append((node.left, i, True))
    return (
        np.array(feat, dtype=np.int64),
        np.array(thr, dtype=np.float64),
        np.array(left, dtype=np.int64),
        np.array(right, dtype=np.int64),
        np.array(value, dtype=np.float64),
    )


def tree_max_feature(tree: TreeNode) -> int:
    """Highest feature index referenced, or -1 for a bare leaf."""
    best = -1
    stack = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, Internal):
            best = max(best, node.feature_index)
            stack.append(node.left)
            stack.append(node.right)
    return best


def predict_tree_many(tree: TreeNode, rows: np.ndarray) -> np.ndarray:
    """Vectorized batch prediction, identical to predict_tree per row."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    maxf = tree_max_feature(tree)
    if maxf >= rows.shape[1]:
        raise ValueError(f"rows have {rows.shape[1]} features but tree tests feature {maxf}")
    feat, thr, left, right, value = _flatten_tree(tree)
    idx = np.zeros(rows.shape[0], dtype=np.int64)
    while True:
        f = feat[idx]
        active = f >= 0
        if not active.any():
            break
        ai = np.nonzero(active)[0]
        node = idx[ai]
        go_left = rows[ai, feat[node]] <= thr[node]
        idx[ai] = np.where(go_left, left[node], right[node])
    return value[idx]


def fit_forest(
    ds,
    tree_count: int = 100,
    bootstrap: bool = True,
    tree_config: TreeConfig | None = None,
    seed: int = 42,
) -> ForestModel:
    """Bootstrap-aggregated forest of CART trees.

    Each member tree trains on n draws with replacement from its own
    generator seeded seed + tree index (so member training is
    order-independent), or on the full data when bootstrap is off. All
    features are considered at every split.
    """
    if ds.n < 1:
        raise ValueError("cannot fit a forest on an empty dataset")
    if tree_count < 1:
        raise ValueError("tree_count must be >= 1")
    cfg = tree_config if tree_config is not None else TreeConfig(max_depth=None)
    cfg.validate()
    X = np.ascontiguousarray(ds.features, dtype=np.float64)
    y = np.ascontiguousarray(ds.target, dtype=np.float64)
    n = ds.n
    trees: list[TreeNode] = []
    for i in range(tree_count):
        if bootstrap:
            rng = np.random.default_rng(seed + i)
            idx = rng.integers(0, n, size=n)
            trees.append(_grow_tree(X[idx], y[idx], cfg.max_depth, cfg.min_samples_split))
        else:
            trees.append(_grow_tree(X, y, cfg.max_depth, cfg.min_samples_split))
    return ForestModel(trees=trees, tree_count=tree_count, bootstrap=bootstrap, seed=seed, tree_config=cfg)


def predict_forest(forest: ForestModel, row: np.ndarray) -> float:
    """Arithmetic mean of member tree predictions."""
    if not forest.trees:
        raise ValueError("forest has no trees")
    return float(np.mean([predict_tree(t, row) for t in forest.trees]))


def predict_forest_many(forest: ForestModel, rows: np.ndarray) -> np.ndarray:
    if not forest.trees:
        raise ValueError("forest has no trees")
    acc = predict_tree_many(forest.trees[0], rows)
    for t in forest.trees[1:]:
        acc = acc + predict_tree_many(t, rows)
    return acc / len(forest.trees)


def fit_gbr(
    ds,
    stage_count: int = 100,
    learning_rate: float = 0.2,
    max_depth: int = 5,
    seed: int = 42,
    min_samples_split: int = 2,
) -> GbrModel:
    """Squared-error gradient boosting: start from the target mean, then
    repeatedly fit a depth-bounded tree to the current residuals and add it
    scaled by the learning rate. Training MSE is recorded per stage."""
    if ds.n < 1:
        raise ValueError("cannot fit GBR on an empty dataset")
    if stage_count < 0:
        raise ValueError("stage_count must be >= 0")
    if learning_rate <= 0.0:
        raise ValueError("learning_rate must be > 0")
    X = np.ascontiguousarray(ds.features, dtype=np.float64)
    y = np.ascontiguousarray(ds.target, dtype=np.float64)
    initial = float(y.mean())
    current = np.full(ds.n, initial)
    mse_history = [float(np.mean((y - current) ** 2))]
    stages: list[TreeNode] = []
    for _ in range(stage_count):
        residual = y - current
        tree = _grow_tree(X, residual, max_depth, min_samples_split)
        stages.append(tree)
        current = current + learning_rate * predict_tree_many(tree, X)
        mse_history.append(float(np.mean((y - current) ** 2)))
    return GbrModel(
        initial_value=initial,
        stages=stages,
        learning_rate=learning_rate,
        stage_count=stage_count,
        max_depth=max_depth,
        seed=seed,
        train_mse_per_stage=mse_history,
    )


def predict_gbr(model: GbrModel, row: np.ndarray) -> float:
    total = model.initial_value
    for tree in model.stages:
        total += model.learning_rate * predict_tree(tree, row)
    return float(total)


def predict_gbr_many(model: GbrModel, rows: np.ndarray) -> np.ndarray:
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim == 1:
        rows = rows.reshape(1, -1)
    acc = np.full(rows.shape[0], model.initial_value)
    for tree in model.stages:
        acc = acc + model.learning_rate * predict_tree_many(tree, rows)
    return acc
