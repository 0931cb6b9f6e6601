"""Sparse feature rows, ordinal label handling and LIBSVM-format I/O.

Feature indices are 0-based in memory and 1-based on disk. Labels read from a
file are remapped to consecutive ranks ``1..p``; the original values are kept
in :attr:`SparseDataset.labels` so predictions can be reported in the
caller's label space.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


class DataFormatError(ValueError):
    """Raised for malformed sparse text input or inconsistent label sets."""


@dataclass(frozen=True)
class SparseVector:
    indices: np.ndarray
    values: np.ndarray
    squared_norm: float = field(init=False)

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        val = np.asarray(self.values, dtype=np.float64)
        if idx.shape != val.shape or idx.ndim != 1:
            raise ValueError("indices and values must be 1-d arrays of equal length")
        if idx.size and (idx[0] < 0 or np.any(np.diff(idx) <= 0)):
            raise ValueError("feature indices must be non-negative and strictly increasing")
        if np.any(val == 0):
            raise ValueError("explicit zeros are not stored")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "values", val)
        object.__setattr__(self, "squared_norm", float(np.dot(val, val)))

    @classmethod
    def from_pairs(cls, pairs):
        pairs = list(pairs)
        if not pairs:
            return cls(np.empty(0, np.int64), np.empty(0))
        idx, val = zip(*pairs)
        return cls(np.array(idx), np.array(val, dtype=float))

    @property
    def entries(self):
        return list(zip(self.indices.tolist(), self.values.tolist()))

    def dot(self, w) -> float:
        w = np.asarray(w)
        keep = self.indices < w.shape[0]
        return float(np.dot(w[self.indices[keep]], self.values[keep]))

    def __len__(self):
        return self.indices.size


def _clean_csr(X) -> sp.csr_matrix:
    X = sp.csr_matrix(X, dtype=np.float64)
    X.eliminate_zeros()
    X.sort_indices()
    return X


class SparseDataset:
    """Immutable CSR feature matrix with ordinal ranks ``1..p``.

    ``labels[r - 1]`` is the original label value of rank ``r``. When
    ``bias`` is not None the last column holds that constant for every row.
    """

    def __init__(self, X, y, labels=None, bias: float | None = None, check_ranks: bool = True):
        X = _clean_csr(X)
        y = np.asarray(y, dtype=np.int64)
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise ValueError("label vector does not match number of rows")
        if labels is None:
            p = int(y.max()) if y.size else 0
            labels = np.arange(1, p + 1)
        labels = np.asarray(labels)
        p = labels.shape[0]
        if y.size and (y.min() < 1 or y.max() > p):
            raise DataFormatError(f"ranks must lie in 1..{p}")
        if check_ranks:
            if p < 2:
                raise DataFormatError("need at least 2 distinct labels")
            missing = np.setdiff1d(np.arange(1, p + 1), y)
            if missing.size:
                raise DataFormatError(f"ranks {missing.tolist()} have no instances")
        self.X = X
        self.y = y
        self.labels = labels
        self.bias = None if bias is None else float(bias)
        self._sqnorm = None

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]

    @property
    def p(self) -> int:
        return self.labels.shape[0]

    @property
    def bias_augmented(self) -> bool:
        return self.bias is not None

    @property
    def n_raw_features(self) -> int:
        """Feature count excluding the bias column."""
        return self.m - 1 if self.bias_augmented else self.m

    @property
    def squared_norms(self) -> np.ndarray:
        if self._sqnorm is None:
            self._sqnorm = np.asarray(self.X.multiply(self.X).sum(axis=1)).ravel()
        return self._sqnorm

    def row(self, i: int) -> SparseVector:
        lo, hi = self.X.indptr[i], self.X.indptr[i + 1]
        return SparseVector(self.X.indices[lo:hi], self.X.data[lo:hi])

    @property
    def rows(self):
        return [self.row(i) for i in range(self.n)]

    def subset(self, idx, check_ranks: bool = False) -> "SparseDataset":
        idx = np.asarray(idx, dtype=np.int64)
        return SparseDataset(self.X[idx], self.y[idx], self.labels, self.bias, check_ranks=check_ranks)

    def with_bias(self, bias: float) -> "SparseDataset":
        if self.bias_augmented:
            raise ValueError("dataset already carries a bias column")
        if not bias > 0:
            raise ValueError("bias value must be positive")
        col = sp.csr_matrix(np.full((self.n, 1), float(bias)))
        X = sp.hstack([self.X, col], format="csr")
        return SparseDataset(X, self.y, self.labels, bias, check_ranks=False)

    def original_labels(self, ranks) -> np.ndarray:
        return self.labels[np.asarray(ranks, dtype=np.int64) - 1]

    def __repr__(self):
        return (f"SparseDataset(n={self.n}, m={self.m}, p={self.p}, "
                f"nnz={self.X.nnz}, bias={self.bias})")


def align_features(X, n_raw: int, bias: float | None) -> sp.csr_matrix:
    """Truncate/pad ``X`` to ``n_raw`` columns and append the bias column if any."""
    X = sp.csr_matrix(X)
    if X.shape[1] > n_raw:
        X = X[:, :n_raw]
    elif X.shape[1] < n_raw:
        X = sp.csr_matrix((X.data, X.indices, X.indptr), shape=(X.shape[0], n_raw))
    if bias is not None:
        X = sp.hstack([X, sp.csr_matrix(np.full((X.shape[0], 1), bias))], format="csr")
    return X


def _parse_label(tok: str, lineno: int) -> int:
    try:
        v = float(tok)
    except ValueError:
        raise DataFormatError(f"line {lineno}: non-numeric label {tok!r}") from None
    if not np.isfinite(v) or v != int(v):
        raise DataFormatError(f"line {lineno}: label {tok!r} is not an integer")
    return int(v)


def parse_libsvm_lines(lines):
    """Parse LIBSVM text into ``(labels, indptr, indices, values)`` with 0-based indices."""
    labels, indptr, indices, values = [], [0], [], []
    for lineno, line in enumerate(lines, start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        toks = line.split()
        labels.append(_parse_label(toks[0], lineno))
        prev = 0
        for tok in toks[1:]:
            k, sep, v = tok.partition(":")
            if not sep:
                raise DataFormatError(f"line {lineno}: malformed feature {tok!r}")
            try:
                idx, val = int(k), float(v)
            except ValueError:
                raise DataFormatError(f"line {lineno}: malformed feature {tok!r}") from None
            if idx <= prev:
                raise DataFormatError(f"line {lineno}: feature indices must be 1-based and strictly increasing")
            prev = idx
            if val != 0.0:
                indices.append(idx - 1)
                values.append(val)
        indptr.append(len(indices))
    return labels, indptr, indices, values


def load_libsvm(path, bias: float | None = None, label_map=None,
                n_features: int | None = None) -> SparseDataset:
    """Read a LIBSVM file.

    Without ``label_map`` the distinct labels are sorted and mapped to ranks
    ``1..p`` and every rank must occur. With ``label_map`` (the original
    label values of a trained model, in rank order) labels are mapped through
    it and ranks may be absent, which is the situation for held-out files.
    ``n_features`` fixes the raw column count; extra columns are dropped.
    """
    with open(path, encoding="utf-8") as fh:
        try:
            raw, indptr, indices, values = parse_libsvm_lines(fh)
        except DataFormatError as exc:
            raise DataFormatError(f"{path}: {exc}") from None
    if not raw:
        raise DataFormatError(f"{path}: no instances")
    m = max(indices) + 1 if indices else 0
    X = sp.csr_matrix((np.array(values, dtype=float), np.array(indices, dtype=np.int64),
                       np.array(indptr, dtype=np.int64)), shape=(len(raw), m))
    raw = np.array(raw)
    if label_map is None:
        labels = np.unique(raw)
        if labels.size < 2:
            raise DataFormatError(f"{path}: fewer than 2 distinct labels")
        check = True
    else:
        labels = np.asarray(label_map)
        unknown = np.setdiff1d(raw, labels)
        if unknown.size:
            raise DataFormatError(f"{path}: labels {unknown.tolist()} not in the label map")
        check = False
    y = np.searchsorted(labels, raw) + 1
    if n_features is not None:
        X = align_features(X, n_features, None)
    data = SparseDataset(X, y, labels, check_ranks=check)
    return data.with_bias(bias) if bias is not None else data


def write_libsvm(data: SparseDataset, path, include_bias: bool = False):
    """Write ``data`` in LIBSVM format with original labels and 17-digit values."""
    X = data.X
    ncol = data.m if include_bias or not data.bias_augmented else data.m - 1
    orig = data.original_labels(data.y)
    with open(path, "w", encoding="utf-8") as fh:
        for i in range(data.n):
            lo, hi = X.indptr[i], X.indptr[i + 1]
            feats = " ".join(f"{j + 1}:{v:.17g}" for j, v in zip(X.indices[lo:hi], X.data[lo:hi]) if j < ncol)
            fh.write(f"{orig[i]} {feats}".rstrip() + "\n")


def stratified_split(data: SparseDataset, test_fraction: float, seed: int):
    """Split into (train, test) keeping per-rank proportions.

    Each rank contributes ``floor(count * test_fraction + 0.5)`` rows to the
    test part; both parts must receive at least one row of every rank.
    """
    if not 0 < test_fraction < 1:
        raise ValueError("test_fraction must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    test = []
    for r in range(1, data.p + 1):
        idx = np.flatnonzero(data.y == r)
        n_test = int(np.floor(idx.size * test_fraction + 0.5))
        if n_test < 1 or n_test > idx.size - 1:
            raise ValueError(f"rank {r} has {idx.size} instances, too few to populate both parts")
        test.append(rng.permutation(idx)[:n_test])
    test = np.sort(np.concatenate(test))
    train = np.setdiff1d(np.arange(data.n), test)
    return data.subset(train, check_ranks=True), data.subset(test, check_ranks=True)


@dataclass(frozen=True)
class RankDecomposition:
    k: int
    left: np.ndarray
    middle: np.ndarray
    right: np.ndarray
    signed_label: np.ndarray


def decompose(data_or_y, k: int) -> RankDecomposition:
    """Indices below, at and above rank ``k`` plus signed labels (-1 iff y <= k)."""
    y = data_or_y.y if isinstance(data_or_y, SparseDataset) else np.asarray(data_or_y)
    p = data_or_y.p if isinstance(data_or_y, SparseDataset) else int(y.max())
    if not 1 <= k <= p:
        raise ValueError(f"rank {k} outside 1..{p}")
    return RankDecomposition(
        k=k,
        left=np.flatnonzero(y < k),
        middle=np.flatnonzero(y == k),
        right=np.flatnonzero(y > k),
        signed_label=np.where(y > k, 1.0, -1.0),
    )
