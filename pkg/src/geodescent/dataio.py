"""LIBSVM-format sparse dataset parsing, serialization, and synthetic data.

Format: one sample per line, `label idx:val idx:val ...` with 1-based,
strictly increasing feature indices; text after `#` is a comment.  Any two
distinct raw label values map to {-1, +1}: {0, 1} by convention, otherwise by
sorted order (smaller -> -1).  Files whose labels are already +/-1 pass
through unchanged, including single-class files.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse

from .errors import (
    AmbiguousLabels,
    EmptyInput,
    InvalidParameter,
    MalformedLine,
    TooManyClasses,
)


@dataclass
class SparseDataset:
    """Rows of (1-based feature index, value) pairs plus +/-1 labels."""

    n_samples: int
    n_features: int
    rows: list
    labels: np.ndarray

    def to_csr(self) -> scipy.sparse.csr_matrix:
        indptr = [0]
        indices = []
        data = []
        for row in self.rows:
            for idx, val in row:
                indices.append(idx - 1)
                data.append(val)
            indptr.append(len(indices))
        return scipy.sparse.csr_matrix(
            (np.asarray(data, dtype=float), np.asarray(indices, dtype=np.int64),
             np.asarray(indptr, dtype=np.int64)),
            shape=(self.n_samples, self.n_features))

    def to_dense(self) -> np.ndarray:
        return self.to_csr().toarray()


def _map_labels(raw):
    distinct = sorted(set(raw))
    if len(distinct) > 2:
        raise TooManyClasses(f"{len(distinct)} distinct label values: {distinct[:5]}...")
    if set(distinct) <= {-1.0, 1.0}:
        return np.asarray(raw, dtype=float)
    if set(distinct) <= {0.0, 1.0}:
        return np.asarray([1.0 if v == 1.0 else -1.0 for v in raw])
    if len(distinct) == 1:
        raise AmbiguousLabels(f"single label value {distinct[0]!r} has no +/-1 mapping")
    lo = distinct[0]
    return np.asarray([-1.0 if v == lo else 1.0 for v in raw])


def parse_libsvm(source, n_features=None) -> SparseDataset:
    """Parse LIBSVM text from a string, bytes, or file-like object.

    n_features, when given, must be at least the largest index seen; it lets
    callers force train/test dimension agreement.
    """
    if isinstance(source, bytes):
        source = source.decode("utf-8", errors="replace")
    if isinstance(source, str):
        source = io.StringIO(source)

    rows = []
    raw_labels = []
    max_index = 0
    for line_no, line in enumerate(source, start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        tokens = text.split()
        try:
            label = float(tokens[0])
        except ValueError:
            raise MalformedLine(line_no, f"label {tokens[0]!r} is not numeric") from None
        if not np.isfinite(label):
            raise MalformedLine(line_no, f"label {tokens[0]!r} is not finite")
        row = []
        prev_idx = 0
        for tok in tokens[1:]:
            idx_str, sep, val_str = tok.partition(":")
            if not sep:
                raise MalformedLine(line_no, f"feature {tok!r} lacks a colon")
            try:
                idx = int(idx_str)
            except ValueError:
                raise MalformedLine(line_no, f"index {idx_str!r} is not an integer") from None
            try:
                val = float(val_str)
            except ValueError:
                raise MalformedLine(line_no, f"value {val_str!r} is not numeric") from None
            if not np.isfinite(val):
                raise MalformedLine(line_no, f"value {val_str!r} is not finite")
            if idx < 1:
                raise MalformedLine(line_no, f"index {idx} must be >= 1")
            if idx <= prev_idx:
                raise MalformedLine(line_no, f"index {idx} not strictly increasing")
            row.append((idx, val))
            prev_idx = idx
        max_index = max(max_index, prev_idx)
        rows.append(row)
        raw_labels.append(label)

    if not rows:
        raise EmptyInput("no data lines")
    if n_features is None:
        n_features = max_index
    elif int(n_features) < max_index:
        raise InvalidParameter(f"n_features={n_features} below largest index {max_index}")
    labels = _map_labels(raw_labels)
    return SparseDataset(len(rows), int(n_features), rows, labels)


def serialize_libsvm(dataset: SparseDataset) -> str:
    """Inverse of parse_libsvm up to label normalization; values use repr so
    the round trip is exact."""
    lines = []
    for label, row in zip(dataset.labels, dataset.rows):
        parts = ["+1" if label > 0 else "-1"]
        parts.extend(f"{idx}:{val!r}" for idx, val in row)
        lines.append(" ".join(parts))
    return "\n".join(lines) + "\n"


def load_libsvm(path, n_features=None) -> SparseDataset:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_libsvm(fh, n_features=n_features)


def save_libsvm(dataset: SparseDataset, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(serialize_libsvm(dataset))


def synthetic_classification(n_samples, n_features, separation=2.0, density=0.2,
                             seed=0) -> SparseDataset:
    """Sparse binary classification data with a planted direction.

    Labels are sign(separation * a_i'w + noise) for a unit ground-truth w, so
    large separation gives (near-)separable data.  Deterministic for a fixed
    seed.
    """
    n_samples = int(n_samples)
    n_features = int(n_features)
    if n_samples < 1 or n_features < 1:
        raise InvalidParameter("n_samples and n_features must be >= 1")
    if not 0.0 < density <= 1.0:
        raise InvalidParameter(f"density must lie in (0, 1], got {density}")
    if separation < 0.0:
        raise InvalidParameter(f"separation must be >= 0, got {separation}")
    rng = np.random.default_rng(seed)
    w = rng.standard_normal(n_features)
    w /= np.linalg.norm(w)
    rows = []
    labels = np.empty(n_samples)
    for i in range(n_samples):
        mask = rng.random(n_features) < density
        if not mask.any():
            mask[rng.integers(n_features)] = True
        idxs = np.flatnonzero(mask)
        vals = rng.standard_normal(idxs.shape[0])
        margin = separation * float(vals @ w[idxs]) + float(rng.standard_normal())
        labels[i] = 1.0 if margin >= 0.0 else -1.0
        rows.append([(int(j) + 1, float(v)) for j, v in zip(idxs, vals)])
    return SparseDataset(n_samples, n_features, rows, labels)
