"""
The additive model F(x) = f0 + sum_k v_k * tree_k(x) and its text form.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import scipy.sparse as sp

from core.errors import DatasetError, DimensionMismatchError, ForestFormatError
from dataset.models import SparseDataset
from .tree import RegressionTree, apply, tree_from_lines, tree_to_lines


logger = logging.getLogger(__name__)

FOREST_MAGIC = "forest"


@dataclass(frozen=True, eq=False)
class Forest:
    """Initial constant plus step-scaled trees, in the order they were applied."""
    f0: float
    trees: Tuple[Tuple[RegressionTree, float], ...] = ()
    fingerprint: str = ""
    n_features: int = 0

    def __len__(self) -> int:
        return len(self.trees)

    def with_tree(self, tree: RegressionTree, step: float) -> "Forest":
        return Forest(self.f0, self.trees + ((tree, float(step)),), self.fingerprint, self.n_features)

    def truncated(self, n_trees: int) -> "Forest":
        return Forest(self.f0, self.trees[:n_trees], self.fingerprint, self.n_features)


def init_forest(ds: SparseDataset) -> Forest:
    """Forest with no trees whose constant is the m-weighted mean label."""
    if ds.n_samples == 0:
        raise DatasetError("cannot initialise a forest on an empty dataset")
    f0 = float(np.dot(ds.frequencies, ds.labels) / ds.n_raw)
    return Forest(f0=f0, fingerprint=ds.fingerprint(), n_features=ds.n_features)


def _aligned_features(forest: Forest, ds: SparseDataset) -> sp.csr_matrix:
    if forest.n_features and ds.n_features > forest.n_features:
        raise DimensionMismatchError(forest.n_features, ds.n_features, "dataset feature dimension")
    if ds.n_features < forest.n_features:
        # absent trailing features are zero
        X = ds.features
        return sp.csr_matrix((X.data, X.indices, X.indptr), shape=(ds.n_samples, forest.n_features))
    return ds.features


def score_vector(forest: Forest, ds: SparseDataset) -> np.ndarray:
    """F_i = f0 + sum_k v_k * tree_k(x_i), accumulated in tree order."""
    X = _aligned_features(forest, ds)
    F = np.full(ds.n_samples, forest.f0, dtype=np.float64)
    for tree, step in forest.trees:
        F += step * tree.value[apply(tree, X)]
    return F


def forest_to_text(forest: Forest) -> str:
    lines: List[str] = [
        FOREST_MAGIC,
        f"f0={forest.f0!r}",
        f"fingerprint={forest.fingerprint}",
        f"n_features={forest.n_features}",
        f"n_trees={len(forest.trees)}",
    ]
    for tree, step in forest.trees:
        lines.extend(tree_to_lines(tree, step))
    return "\n".join(lines) + "\n"


def _header_value(line: str, key: str) -> str:
    name, sep, value = line.partition("=")
    if not sep or name != key:
        raise ForestFormatError(f"expected '{key}=...', got {line!r}")
    return value


def forest_from_text(text: str) -> Forest:
    """
    Parse a forest written by ``forest_to_text``.

    Raises:
        ForestFormatError: On empty or malformed input
    """
    lines = [line.strip() for line in text.splitlines() if line.strip()]
    if not lines:
        raise ForestFormatError("forest file is empty")
    if lines[0] != FOREST_MAGIC or len(lines) < 5:
        raise ForestFormatError("not a forest file")

    try:
        f0 = float(_header_value(lines[1], "f0"))
        fingerprint = _header_value(lines[2], "fingerprint")
        n_features = int(_header_value(lines[3], "n_features"))
        n_trees = int(_header_value(lines[4], "n_trees"))
    except ValueError as e:
        raise ForestFormatError(f"bad forest header: {e}") from e

    trees = []
    cursor = 5
    for _ in range(n_trees):
        if cursor >= len(lines) or not lines[cursor].startswith("tree"):
            raise ForestFormatError(f"expected {n_trees} trees, found {len(trees)}")
        header = lines[cursor].split()
        try:
            n_nodes = int(dict(p.split("=", 1) for p in header[1:] if "=" in p)["nodes"])
        except (KeyError, ValueError) as e:
            raise ForestFormatError(f"bad tree header {lines[cursor]!r}") from e
        tree, step = tree_from_lines(lines[cursor:cursor + n_nodes + 1])
        if step is None:
            raise ForestFormatError(f"tree {len(trees)} has no step length")
        if n_features and tree.max_feature() >= n_features:
            raise ForestFormatError(f"tree {len(trees)} uses a feature beyond n_features={n_features}")
        trees.append((tree, step))
        cursor += n_nodes + 1

    if cursor != len(lines):
        raise ForestFormatError("trailing content after the last tree")
    return Forest(f0, tuple(trees), fingerprint, n_features)


def save_forest(forest: Forest, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(forest_to_text(forest), encoding="utf-8")
    return path


def load_forest(path: Union[str, Path]) -> Forest:
    path = Path(path)
    if not path.is_file():
        raise ForestFormatError(f"forest file not found: {path}")
    return forest_from_text(path.read_text(encoding="utf-8"))
