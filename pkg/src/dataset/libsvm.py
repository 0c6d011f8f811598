"""
LIBSVM text format reader and writer.

On disk, feature indices are one-based; in memory they are zero-based.
"""

import logging
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np
import scipy.sparse as sp

from core.errors import DatasetError, LibSVMParseError
from .models import SparseDataset
from .validation import FeatureTokenValidator, LabelValidator, ValidationError


logger = logging.getLogger(__name__)


def parse_libsvm(
    source: Union[str, Iterable[str]],
    n_features: Optional[int] = None,
) -> SparseDataset:
    """
    Parse LIBSVM text into a raw dataset, one sample per non-empty line.

    Args:
        source: Whole text, or an iterable of lines (e.g. an open file)
        n_features: Optional fixed feature dimension; inferred from the
            largest index otherwise

    Returns:
        Raw dataset with every frequency equal to 1 (not deduplicated)

    Raises:
        LibSVMParseError: On a malformed line, with its one-based line number
    """
    lines = source.splitlines() if isinstance(source, str) else source

    labels: List[int] = []
    indptr: List[int] = [0]
    indices: List[int] = []
    data: List[float] = []
    width = 0

    for line_number, raw_line in enumerate(lines, start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue

        tokens = line.split()
        try:
            label = LabelValidator.validate(tokens[0])
            previous = 0
            for token in tokens[1:]:
                index, value = FeatureTokenValidator.validate(token, previous, n_features)
                previous = index + 1
                if value != 0.0:
                    indices.append(index)
                    data.append(value)
            width = max(width, previous)
        except ValidationError as e:
            raise LibSVMParseError(str(e), line_number) from e

        labels.append(label)
        indptr.append(len(indices))

    if n_features is None:
        n_features = width

    matrix = sp.csr_matrix(
        (np.asarray(data, dtype=np.float64),
         np.asarray(indices, dtype=np.int64),
         np.asarray(indptr, dtype=np.int64)),
        shape=(len(labels), n_features),
    )
    dataset = SparseDataset(
        matrix,
        np.asarray(labels, dtype=np.int8),
        np.ones(len(labels), dtype=np.int64),
        n_features,
    )
    logger.debug("Parsed %d LIBSVM rows with %d features", len(labels), n_features)
    return dataset


def read_libsvm(path: Union[str, Path], n_features: Optional[int] = None) -> SparseDataset:
    """Parse a LIBSVM file from disk."""
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"dataset file not found: {path}")
    with path.open("r", encoding="utf-8") as handle:
        return parse_libsvm(handle, n_features=n_features)


def _format_row(label: int, indices: np.ndarray, values: np.ndarray) -> str:
    features = " ".join(f"{j + 1}:{float(v)!r}" for j, v in zip(indices, values))
    return f"{label} {features}" if features else str(label)


def serialize_libsvm(ds: SparseDataset) -> str:
    """
    Write a dataset as LIBSVM text, repeating each sample ``m_i`` times.

    Values are written with ``repr`` so re-parsing is bit-exact.
    """
    out: List[str] = []
    for i in range(ds.n_samples):
        start, stop = ds.features.indptr[i], ds.features.indptr[i + 1]
        row = _format_row(
            int(ds.labels[i]),
            ds.features.indices[start:stop],
            ds.features.data[start:stop],
        )
        out.extend([row] * int(ds.frequencies[i]))
    return "\n".join(out) + ("\n" if out else "")


def write_libsvm(ds: SparseDataset, path: Union[str, Path]) -> Path:
    """Serialize a dataset to a LIBSVM file."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_libsvm(ds), encoding="utf-8")
    logger.info("Wrote %d raw rows to %s", ds.n_raw, path)
    return path
