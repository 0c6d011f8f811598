"""
Histogram regression trees grown leaf-wise, and the leaf-averaging operator.

A tree is fit to per-sample values z_i = g_i / w_i with weights w_i by
weighted least squares: every leaf predicts the w-weighted mean of the z_i
of its members, i.e. sum(g) / sum(w). Leaf averaging applied to an arbitrary
vector is exposed as ``project``.
"""

import heapq
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp
from sklearn.metrics import pairwise_distances

from core.errors import DimensionMismatchError, ForestFormatError, ProjectionError, TreeBuildError
from dataset.models import FeatureBins, SparseDataset
from .loss import GradientVector


logger = logging.getLogger(__name__)

LEAF = -1
GAIN_TOLERANCE = 1e-10


@dataclass(frozen=True)
class TreeParams:
    """
    Growth limits for a single tree.

    ``min_samples_leaf`` bounds the summed sample weight of each child, not
    its row count; with inverse-probability weights a single drawn row can
    satisfy it on its own, while a lone row of smaller weight is never split off.
    """
    max_leaves: int = 100
    min_samples_leaf: float = 1.0
    feature_fraction: float = 1.0
    feature_seed: int = 0

    def __post_init__(self):
        if self.max_leaves < 1:
            raise ValueError(f"max_leaves must be >= 1, got {self.max_leaves}")
        if self.min_samples_leaf <= 0:
            raise ValueError(f"min_samples_leaf must be positive, got {self.min_samples_leaf}")
        if not 0.0 < self.feature_fraction <= 1.0:
            raise ValueError(f"feature_fraction must be in (0, 1], got {self.feature_fraction}")


@dataclass(frozen=True, eq=False)
class RegressionTree:
    """
    Array-encoded binary tree. Node 0 is the root.

    For an internal node n, samples with ``x[feature[n]] <= threshold[n]``
    (equivalently bin <= ``bin[n]``) go to ``left[n]``. Leaves have
    ``feature == LEAF`` and predict ``value``.
    """
    feature: np.ndarray
    bin: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    draw_index: int = 0

    def __post_init__(self):
        for name in ("feature", "bin", "threshold", "left", "right", "value"):
            getattr(self, name).flags.writeable = False

    @property
    def n_nodes(self) -> int:
        return self.feature.size

    @property
    def n_leaves(self) -> int:
        return int((self.feature == LEAF).sum())

    @property
    def leaf_ids(self) -> np.ndarray:
        return np.flatnonzero(self.feature == LEAF)

    @classmethod
    def constant(cls, value: float, draw_index: int = 0) -> "RegressionTree":
        """Single-leaf tree."""
        return cls(
            feature=np.array([LEAF], dtype=np.int64),
            bin=np.array([-1], dtype=np.int64),
            threshold=np.array([0.0]),
            left=np.array([-1], dtype=np.int64),
            right=np.array([-1], dtype=np.int64),
            value=np.array([float(value)]),
            draw_index=draw_index,
        )

    def used_features(self) -> np.ndarray:
        return np.unique(self.feature[self.feature != LEAF])

    def max_feature(self) -> int:
        used = self.used_features()
        return int(used.max()) if used.size else -1


# Growth

@dataclass
class _Split:
    gain: float
    feature: int
    bin: int


class _TreeGrower:
    """Best-first growth on the included rows of a binned dataset."""

    def __init__(
        self,
        binned: np.ndarray,
        features: np.ndarray,
        n_bins: int,
        grad: np.ndarray,
        weights: np.ndarray,
        params: TreeParams,
    ):
        self.binned = binned
        self.features = features
        self.n_bins = n_bins
        self.grad = grad
        self.weights = weights
        self.params = params
        self.k = features.size
        self.column_offsets = (np.arange(self.k, dtype=np.int64) * n_bins)[None, :]

    def best_split(self, members: np.ndarray) -> Optional[_Split]:
        if members.size < 2 or self.k == 0 or self.n_bins < 2:
            return None

        w = self.weights[members]
        g = self.grad[members]
        flat = (self.binned[members] + self.column_offsets).ravel()
        size = self.k * self.n_bins
        w_hist = np.bincount(flat, weights=np.repeat(w, self.k), minlength=size).reshape(self.k, self.n_bins)
        g_hist = np.bincount(flat, weights=np.repeat(g, self.k), minlength=size).reshape(self.k, self.n_bins)

        left_w = np.cumsum(w_hist, axis=1)[:, :-1]
        left_g = np.cumsum(g_hist, axis=1)[:, :-1]
        total_w = w.sum()
        total_g = g.sum()
        right_w = total_w - left_w
        right_g = total_g - left_g

        min_leaf = self.params.min_samples_leaf
        valid = (left_w >= min_leaf) & (right_w >= min_leaf) & (left_w > 0) & (right_w > 0)
        if not valid.any():
            return None

        with np.errstate(divide="ignore", invalid="ignore"):
            gain = left_g ** 2 / left_w + right_g ** 2 / right_w - total_g ** 2 / total_w
        gain = np.where(valid, gain, -np.inf)

        # first maximum: lowest feature, then lowest bin
        best = int(np.argmax(gain))
        best_gain = float(gain.flat[best])
        scale = float(np.dot(g, g / w))
        if not best_gain > GAIN_TOLERANCE * max(scale, 1e-300):
            return None
        position, bin_index = divmod(best, self.n_bins - 1)
        return _Split(best_gain, position, bin_index)

    def leaf_value(self, members: np.ndarray) -> float:
        return float(self.grad[members].sum() / self.weights[members].sum())


def _select_features(n_features: int, params: TreeParams, draw_index: int) -> np.ndarray:
    if params.feature_fraction >= 1.0:
        return np.arange(n_features, dtype=np.int64)
    k = max(1, math.ceil(params.feature_fraction * n_features))
    rng = np.random.default_rng([params.feature_seed, draw_index])
    return np.sort(rng.choice(n_features, size=k, replace=False)).astype(np.int64)


def fit(
    bins: FeatureBins,
    target: Union[GradientVector, np.ndarray],
    weights: np.ndarray,
    params: TreeParams,
    draw_index: int = 0,
    included: Optional[np.ndarray] = None,
) -> RegressionTree:
    """
    Fit a tree to weighted target components g_i with weights w_i.

    The tree fits z_i = g_i / w_i over the included samples, splitting the
    leaf with the largest weighted variance reduction until ``max_leaves`` is
    reached or no split has positive gain.

    Raises:
        TreeBuildError: If no sample is included
    """
    if isinstance(target, GradientVector):
        grad = target.values
        if included is None:
            included = target.included
    else:
        grad = np.asarray(target, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)

    n = bins.n_samples
    if grad.size != n:
        raise DimensionMismatchError(n, grad.size, "tree target")
    if weights.size != n:
        raise DimensionMismatchError(n, weights.size, "tree weights")
    if not np.isfinite(grad).all():
        raise TreeBuildError("tree target must be finite")

    mask = weights > 0
    if included is not None:
        mask &= np.asarray(included, dtype=bool)
    rows = np.flatnonzero(mask)
    if rows.size == 0:
        raise TreeBuildError("cannot fit a tree on an empty view")

    features = _select_features(bins.n_features, params, draw_index)
    n_bins = max((bins.n_bins(int(f)) for f in features), default=1)
    grower = _TreeGrower(
        bins.binned[np.ix_(rows, features)].astype(np.int64),
        features,
        n_bins,
        grad[rows],
        weights[rows],
        params,
    )

    # node fields: feature, bin, left, right, value
    nodes: List[List] = [[LEAF, -1, -1, -1, 0.0]]
    members: Dict[int, np.ndarray] = {0: np.arange(rows.size)}
    heap: List[Tuple[float, int, _Split]] = []

    def consider(node_id: int) -> None:
        split = grower.best_split(members[node_id])
        if split is not None:
            heapq.heappush(heap, (-split.gain, node_id, split))

    consider(0)
    n_leaves = 1
    while n_leaves < params.max_leaves and heap:
        _, node_id, split = heapq.heappop(heap)
        node_members = members.pop(node_id)
        goes_left = grower.binned[node_members, split.feature] <= split.bin

        left_id, right_id = len(nodes), len(nodes) + 1
        nodes[node_id][:4] = [int(features[split.feature]), split.bin, left_id, right_id]
        nodes.append([LEAF, -1, -1, -1, 0.0])
        nodes.append([LEAF, -1, -1, -1, 0.0])
        members[left_id] = node_members[goes_left]
        members[right_id] = node_members[~goes_left]
        n_leaves += 1
        consider(left_id)
        consider(right_id)

    for node_id, node_members in members.items():
        nodes[node_id][4] = grower.leaf_value(node_members)

    feature = np.array([node[0] for node in nodes], dtype=np.int64)
    bin_index = np.array([node[1] for node in nodes], dtype=np.int64)
    threshold = np.array([
        bins.threshold_value(f, b) if f != LEAF else 0.0
        for f, b in zip(feature, bin_index)
    ])
    tree = RegressionTree(
        feature=feature,
        bin=bin_index,
        threshold=threshold,
        left=np.array([node[2] for node in nodes], dtype=np.int64),
        right=np.array([node[3] for node in nodes], dtype=np.int64),
        value=np.array([node[4] for node in nodes], dtype=np.float64),
        draw_index=draw_index,
    )
    logger.debug(
        "Fit tree on %d rows: %d leaves (draw %d)", rows.size, tree.n_leaves, draw_index
    )
    return tree


# Routing

def predict(tree: RegressionTree, x: Mapping[int, float]) -> float:
    """Route one sparse vector (missing features are 0) and return its leaf value."""
    node = 0
    while tree.feature[node] != LEAF:
        value = x.get(int(tree.feature[node]), 0.0)
        node = tree.left[node] if value <= tree.threshold[node] else tree.right[node]
    return float(tree.value[node])


def _route(tree: RegressionTree, n_rows: int, column_of) -> np.ndarray:
    node = np.zeros(n_rows, dtype=np.int64)
    active = np.flatnonzero(tree.feature[node] != LEAF)
    depth = 0
    while active.size:
        depth += 1
        if depth > tree.n_nodes:
            raise ForestFormatError("tree routing does not terminate")
        current = node[active]
        goes_left = column_of(active, current)
        node[active] = np.where(goes_left, tree.left[current], tree.right[current])
        active = active[tree.feature[node[active]] != LEAF]
    return node


def apply(tree: RegressionTree, X: sp.csr_matrix) -> np.ndarray:
    """Leaf node id of every row of a sparse matrix, routing on real thresholds."""
    X = sp.csr_matrix(X)
    used = tree.used_features()
    if used.size and used.max() >= X.shape[1]:
        raise DimensionMismatchError(int(used.max()) + 1, X.shape[1], "feature matrix")
    dense = X[:, used].toarray() if used.size else np.zeros((X.shape[0], 0))
    position = np.full(max(tree.max_feature() + 1, 1), -1, dtype=np.int64)
    position[used] = np.arange(used.size)

    def column_of(rows, nodes):
        return dense[rows, position[tree.feature[nodes]]] <= tree.threshold[nodes]

    return _route(tree, X.shape[0], column_of)


def apply_binned(tree: RegressionTree, binned: np.ndarray) -> np.ndarray:
    """Leaf node id of every row of a binned matrix, routing on bin indices."""
    def column_of(rows, nodes):
        return binned[rows, tree.feature[nodes]] <= tree.bin[nodes]

    return _route(tree, binned.shape[0], column_of)


def predict_dataset(tree: RegressionTree, ds: SparseDataset) -> np.ndarray:
    """Predictions for every sample of a dataset."""
    return tree.value[apply(tree, ds.features)]


def predict_binned(tree: RegressionTree, bins: FeatureBins) -> np.ndarray:
    return tree.value[apply_binned(tree, bins.binned)]


# Leaf partition and projection

@dataclass(frozen=True, eq=False)
class LeafPartition:
    """
    Assignment of samples to leaves.

    ``leaf_of[i]`` is a compact leaf index in ``[0, n_leaves)``; only samples
    with ``members[i]`` set belong to a block.
    """
    leaf_of: np.ndarray
    n_leaves: int
    members: np.ndarray

    @property
    def n_samples(self) -> int:
        return self.leaf_of.size

    @property
    def blocks(self) -> List[np.ndarray]:
        """Member sample indices per leaf (empty leaves included)."""
        order = np.flatnonzero(self.members)
        return [order[self.leaf_of[order] == b] for b in range(self.n_leaves)]

    def restrict(self, mask: np.ndarray) -> "LeafPartition":
        """Partition of the members selected by ``mask``."""
        mask = np.asarray(mask, dtype=bool)
        if mask.size != self.n_samples:
            raise DimensionMismatchError(self.n_samples, mask.size, "partition mask")
        return LeafPartition(self.leaf_of, self.n_leaves, self.members & mask)


def _partition_from_nodes(tree: RegressionTree, nodes: np.ndarray, members: Optional[np.ndarray]) -> LeafPartition:
    compact = np.full(tree.n_nodes, -1, dtype=np.int64)
    leaf_ids = tree.leaf_ids
    compact[leaf_ids] = np.arange(leaf_ids.size)
    if members is None:
        members = np.ones(nodes.size, dtype=bool)
    return LeafPartition(compact[nodes], int(leaf_ids.size), np.asarray(members, dtype=bool))


def leaf_partition(
    tree: RegressionTree,
    ds: SparseDataset,
    members: Optional[np.ndarray] = None,
) -> LeafPartition:
    """Group the dataset's samples by the leaf they reach."""
    return _partition_from_nodes(tree, apply(tree, ds.features), members)


def leaf_partition_binned(
    tree: RegressionTree,
    bins: FeatureBins,
    members: Optional[np.ndarray] = None,
) -> LeafPartition:
    return _partition_from_nodes(tree, apply_binned(tree, bins.binned), members)


def project(p: LeafPartition, g: np.ndarray, w: np.ndarray) -> np.ndarray:
    """
    Weighted leaf-mean of ``g`` broadcast back to every member.

    Non-members get 0.

    Raises:
        ProjectionError: If a non-empty block has zero total weight
    """
    g = np.asarray(g, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64)
    if g.size != p.n_samples:
        raise DimensionMismatchError(p.n_samples, g.size, "projected vector")
    if w.size != p.n_samples:
        raise DimensionMismatchError(p.n_samples, w.size, "projection weights")

    rows = np.flatnonzero(p.members)
    leaves = p.leaf_of[rows]
    weight_sum = np.bincount(leaves, weights=w[rows], minlength=p.n_leaves)
    value_sum = np.bincount(leaves, weights=w[rows] * g[rows], minlength=p.n_leaves)
    occupied = np.bincount(leaves, minlength=p.n_leaves) > 0
    if np.any(occupied & (weight_sum <= 0)):
        raise ProjectionError("a leaf block has zero total weight")

    out = np.zeros(p.n_samples, dtype=np.float64)
    means = np.divide(value_sum, weight_sum, out=np.zeros_like(value_sum), where=occupied)
    out[rows] = means[leaves]
    return out


def zeta_estimate(p: LeafPartition, g: np.ndarray, w: np.ndarray, tol: float = 1e-12) -> int:
    """Number of members whose value moves by more than ``tol`` under projection."""
    residual = np.abs(project(p, g, w) - np.asarray(g, dtype=np.float64))
    return int((residual[p.members] > tol).sum())


def leaf_diameter(p: LeafPartition, ds: SparseDataset) -> float:
    """Largest Euclidean distance between two feature vectors sharing a leaf."""
    if p.n_samples != ds.n_samples:
        raise DimensionMismatchError(ds.n_samples, p.n_samples, "leaf partition")
    diameter = 0.0
    for block in p.blocks:
        if block.size < 2:
            continue
        distances = pairwise_distances(ds.features[block], metric="euclidean")
        diameter = max(diameter, float(distances.max()))
    return diameter


# Text form

def tree_to_lines(tree: RegressionTree, step: Optional[float] = None) -> List[str]:
    header = f"tree nodes={tree.n_nodes} draw={tree.draw_index}"
    if step is not None:
        header += f" step={float(step)!r}"
    lines = [header]
    for n in range(tree.n_nodes):
        if tree.feature[n] == LEAF:
            lines.append(f"{n} leaf {float(tree.value[n])!r}")
        else:
            lines.append(
                f"{n} split {tree.feature[n]} {tree.bin[n]} "
                f"{float(tree.threshold[n])!r} {tree.left[n]} {tree.right[n]}"
            )
    return lines


def _header_fields(header: str) -> Dict[str, str]:
    parts = header.split()
    if not parts or parts[0] != "tree":
        raise ForestFormatError(f"expected a tree header, got {header!r}")
    fields = {}
    for part in parts[1:]:
        key, sep, value = part.partition("=")
        if not sep:
            raise ForestFormatError(f"malformed tree header field {part!r}")
        fields[key] = value
    return fields


def tree_from_lines(lines: Iterable[str]) -> Tuple[RegressionTree, Optional[float]]:
    """Parse the output of ``tree_to_lines``; returns the tree and its step, if any."""
    lines = list(lines)
    if not lines:
        raise ForestFormatError("empty tree block")
    try:
        fields = _header_fields(lines[0])
        n_nodes = int(fields["nodes"])
        draw_index = int(fields.get("draw", 0))
        step = float(fields["step"]) if "step" in fields else None
    except (KeyError, ValueError) as e:
        raise ForestFormatError(f"bad tree header {lines[0]!r}: {e}") from e
    if len(lines) - 1 != n_nodes:
        raise ForestFormatError(f"tree declares {n_nodes} nodes but has {len(lines) - 1}")

    feature = np.full(n_nodes, LEAF, dtype=np.int64)
    bin_index = np.full(n_nodes, -1, dtype=np.int64)
    threshold = np.zeros(n_nodes)
    left = np.full(n_nodes, -1, dtype=np.int64)
    right = np.full(n_nodes, -1, dtype=np.int64)
    value = np.zeros(n_nodes)

    for line in lines[1:]:
        parts = line.split()
        try:
            n = int(parts[0])
            if not 0 <= n < n_nodes:
                raise ValueError(f"node id {n} out of range")
            if parts[1] == "leaf" and len(parts) == 3:
                value[n] = float(parts[2])
            elif parts[1] == "split" and len(parts) == 7:
                feature[n] = int(parts[2])
                bin_index[n] = int(parts[3])
                threshold[n] = float(parts[4])
                left[n] = int(parts[5])
                right[n] = int(parts[6])
                if not (0 < left[n] < n_nodes and 0 < right[n] < n_nodes) or feature[n] < 0:
                    raise ValueError("child or feature out of range")
            else:
                raise ValueError("unknown node kind")
        except (IndexError, ValueError) as e:
            raise ForestFormatError(f"bad tree node line {line!r}: {e}") from e

    tree = RegressionTree(feature, bin_index, threshold, left, right, value, draw_index)
    return tree, step
