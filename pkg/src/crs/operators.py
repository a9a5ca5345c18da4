"""Matrix-free symmetric operators with matvec accounting.

Every solver in the package touches the data matrix only through
:meth:`SymmetricOperator.apply`, so the counter on the operator is the
number of matrix-vector products a run consumed.
"""

from __future__ import annotations

import threading
from pathlib import Path

import numpy as np
import scipy.io
import scipy.sparse as sp

__all__ = [
    "SymmetricOperator",
    "DenseOperator",
    "SparseOperator",
    "ShiftedOperator",
    "as_operator",
    "identity",
    "apply",
    "norm_upper_bound",
    "load_matrix_market",
    "load_dense_text",
    "save_matrix_market",
]

SYMMETRY_RTOL = 1e-12


class SymmetricOperator:
    """Base class: a symmetric linear map on R^n.

    Subclasses implement ``_matvec``, ``abs_row_sums`` and ``diagonal``.
    The counter is protected by a lock so one operator can be shared
    between concurrent solver runs.
    """

    storage = "abstract"

    def __init__(self, dim):
        dim = int(dim)
        if dim <= 0:
            raise ValueError("operator dimension must be positive")
        self.dim = dim
        self._count = 0
        self._lock = threading.Lock()

    @property
    def matvec_count(self):
        return self._count

    def reset_count(self):
        with self._lock:
            self._count = 0

    @property
    def shape(self):
        return (self.dim, self.dim)

    def apply(self, v):
        v = np.asarray(v, dtype=float)
        if v.shape != (self.dim,):
            raise ValueError(f"expected vector of length {self.dim}, got shape {v.shape}")
        out = self._matvec(v)
        with self._lock:
            self._count += 1
        return out

    __matmul__ = apply

    def _matvec(self, v):
        raise NotImplementedError

    def abs_row_sums(self):
        raise NotImplementedError

    def diagonal(self):
        raise NotImplementedError

    def norm_upper_bound(self):
        """Matrix infinity-norm, an upper bound on the spectral norm."""
        return float(np.max(self.abs_row_sums()))

    def shifted(self, shift):
        return ShiftedOperator(self, shift)

    def to_dense(self):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}(dim={self.dim})"


class DenseOperator(SymmetricOperator):
    """Full row-major storage of a symmetric matrix."""

    storage = "dense-symmetric"

    def __init__(self, matrix, check=True):
        a = np.array(matrix, dtype=float, ndmin=2)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("dense operator needs a square matrix")
        if check:
            _check_symmetric(a, np.max(np.abs(a)) if a.size else 0.0)
        super().__init__(a.shape[0])
        self.matrix = np.ascontiguousarray(a)

    def _matvec(self, v):
        return self.matrix @ v

    def abs_row_sums(self):
        return np.abs(self.matrix).sum(axis=1)

    def diagonal(self):
        return np.diag(self.matrix).copy()

    def to_dense(self):
        return self.matrix.copy()


class SparseOperator(SymmetricOperator):
    """Symmetric matrix in CSR storage."""

    storage = "sparse-CSR"

    def __init__(self, matrix, check=True):
        m = sp.csr_matrix(matrix, dtype=float)
        if m.shape[0] != m.shape[1]:
            raise ValueError("sparse operator needs a square matrix")
        if check:
            scale = abs(m).max() if m.nnz else 0.0
            diff = m - m.T
            asym = abs(diff).max() if diff.nnz else 0.0
            if asym > SYMMETRY_RTOL * scale:
                raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")
        super().__init__(m.shape[0])
        m.sum_duplicates()
        self.matrix = m

    def _matvec(self, v):
        return self.matrix @ v

    def abs_row_sums(self):
        return np.asarray(abs(self.matrix).sum(axis=1)).ravel()

    def diagonal(self):
        return self.matrix.diagonal()

    @property
    def nnz(self):
        return self.matrix.nnz

    def to_dense(self):
        return self.matrix.toarray()


class ShiftedOperator(SymmetricOperator):
    """Lazy ``base + shift * I``; never materializes a copy of ``base``."""

    storage = "composite"

    def __init__(self, base, shift):
        super().__init__(base.dim)
        self.base = base
        self.shift = float(shift)

    def _matvec(self, v):
        out = self.base.apply(v)
        if self.shift != 0.0:
            out = out + self.shift * v
        return out

    def diagonal(self):
        return self.base.diagonal() + self.shift

    def abs_row_sums(self):
        d = self.base.diagonal()
        return self.base.abs_row_sums() - np.abs(d) + np.abs(d + self.shift)

    def to_dense(self):
        return self.base.to_dense() + self.shift * np.eye(self.dim)

    def __repr__(self):
        return f"ShiftedOperator({self.base!r}, shift={self.shift:g})"


class _IdentityOperator(SymmetricOperator):
    storage = "dense-symmetric"

    def _matvec(self, v):
        return v.copy()

    def abs_row_sums(self):
        return np.ones(self.dim)

    def diagonal(self):
        return np.ones(self.dim)

    def to_dense(self):
        return np.eye(self.dim)


def identity(n):
    return _IdentityOperator(n)


def as_operator(a):
    """Wrap an ndarray, scipy sparse matrix or operator as a SymmetricOperator."""
    if isinstance(a, SymmetricOperator):
        return a
    if sp.issparse(a):
        return SparseOperator(a)
    return DenseOperator(a)


def apply(op, v):
    return op.apply(v)


def norm_upper_bound(op):
    return op.norm_upper_bound()


def _check_symmetric(a, scale):
    asym = np.max(np.abs(a - a.T)) if a.size else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise ValueError(f"matrix is not symmetric (max asymmetry {asym:.3e})")


def load_matrix_market(path):
    """Read a real symmetric matrix in Matrix Market coordinate (or array) format."""
    m = scipy.io.mmread(str(path))
    if sp.issparse(m):
        return SparseOperator(m.tocsr())
    return DenseOperator(np.asarray(m, dtype=float))


def save_matrix_market(path, op):
    if isinstance(op, SparseOperator):
        m = op.matrix
    else:
        m = sp.csr_matrix(op.to_dense())
    scipy.io.mmwrite(str(path), sp.coo_matrix(m), symmetry="symmetric")


def load_dense_text(path):
    """Read a square array from whitespace- or comma-separated text."""
    text = Path(path).read_text()
    delimiter = "," if "," in text else None
    a = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    return DenseOperator(a)
