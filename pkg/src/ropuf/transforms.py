"""Orthonormal 2-D transforms over r x c arrays and decorrelation efficiency.

Coefficient arrays are kept as r x c arrays in row-major order. Coefficient
index 1 is the first row, first column; indices increase along a row, so
the second row starts at index c + 1 (see :func:`coefficient_index`).
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.fft import dct
from scipy.linalg import hadamard


@dataclass(frozen=True, eq=False)
class Transform:
    """A transform kind: ``"dct"``, ``"dwht"``, ``"dht"`` or ``"klt"`` with its basis."""

    kind: str
    basis: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown transform kind {self.kind!r}")
        if self.kind == "klt":
            if self.basis is None:
                raise ValueError("KLT requires a basis")
            b = np.asarray(self.basis, dtype=float)
            if b.ndim != 2 or b.shape[0] != b.shape[1]:
                raise ValueError("KLT basis must be a square matrix")
            if np.max(np.abs(b.T @ b - np.eye(b.shape[0]))) > 1e-10:
                raise ValueError("KLT basis is not orthonormal")
        elif self.basis is not None:
            raise ValueError(f"{self.kind} takes no basis")

    def __repr__(self):
        return self.kind.upper() if self.basis is None else f"KLT(L={self.basis.shape[0]})"


KINDS = ("dct", "dwht", "dht", "klt")
DCT = Transform("dct")
DWHT = Transform("dwht")
DHT = Transform("dht")


def get_transform(kind):
    if isinstance(kind, Transform):
        return kind
    kind = kind.lower()
    if kind == "klt":
        raise ValueError("a KLT needs a fitted basis; use klt_fit()")
    return Transform(kind)


def _check_pow2(n, kind):
    if n < 1 or n & (n - 1):
        raise ValueError(f"{kind.upper()} needs power-of-two dimensions, got {n}")


@lru_cache(maxsize=None)
def dct_matrix(n):
    """Orthonormal DCT-II matrix (rows are basis vectors)."""
    return dct(np.eye(n), norm="ortho", axis=0)


@lru_cache(maxsize=None)
def walsh_hadamard_matrix(n):
    """Orthonormal Hadamard matrix in natural (Sylvester) order."""
    _check_pow2(n, "dwht")
    return hadamard(n) / np.sqrt(n)


@lru_cache(maxsize=None)
def haar_matrix(n):
    """Orthonormal full-depth Haar matrix; row 0 is the scaling function."""
    _check_pow2(n, "dht")
    h = np.array([[1.0]])
    while h.shape[0] < n:
        m = h.shape[0]
        h = np.vstack([np.kron(h, [1.0, 1.0]), np.kron(np.eye(m), [1.0, -1.0])])
    return h / np.linalg.norm(h, axis=1, keepdims=True)


def _axis_matrix(kind, n):
    if kind == "dct":
        _check_pow2(n, kind)
        return dct_matrix(n)
    if kind == "dwht":
        return walsh_hadamard_matrix(n)
    return haar_matrix(n)


def transform_matrix(transform, rows, cols):
    """L x L matrix M with vec(forward(x)) = M @ vec(x) (row-major vec)."""
    transform = get_transform(transform)
    if transform.kind == "klt":
        _check_klt(transform, rows, cols)
        return transform.basis.T
    return np.kron(_axis_matrix(transform.kind, rows), _axis_matrix(transform.kind, cols))


def _check_klt(transform, rows, cols):
    if transform.basis.shape[0] != rows * cols:
        raise ValueError(f"KLT basis is {transform.basis.shape[0]}-dimensional, array has {rows * cols} cells")


def forward(transform, array):
    """Forward transform of an r x c array (or a stack ``(..., r, c)``)."""
    transform = get_transform(transform)
    x = np.asarray(array, dtype=float)
    if x.ndim < 2:
        raise ValueError("expected an r x c array")
    rows, cols = x.shape[-2:]
    if transform.kind == "klt":
        _check_klt(transform, rows, cols)
        flat = x.reshape(x.shape[:-2] + (rows * cols,))
        return (flat @ transform.basis).reshape(x.shape)
    a = _axis_matrix(transform.kind, rows)
    b = _axis_matrix(transform.kind, cols)
    return a @ x @ b.T


def inverse(transform, coeffs):
    transform = get_transform(transform)
    t = np.asarray(coeffs, dtype=float)
    if t.ndim < 2:
        raise ValueError("expected an r x c coefficient array")
    rows, cols = t.shape[-2:]
    if transform.kind == "klt":
        _check_klt(transform, rows, cols)
        flat = t.reshape(t.shape[:-2] + (rows * cols,))
        return (flat @ transform.basis.T).reshape(t.shape)
    a = _axis_matrix(transform.kind, rows)
    b = _axis_matrix(transform.kind, cols)
    return a.T @ t @ b


def coefficient_index(row, col, cols):
    """1-based coefficient index of array position (row, col), both 0-based."""
    return row * cols + col + 1


def coefficient_position(index, cols):
    """Inverse of :func:`coefficient_index`."""
    return divmod(index - 1, cols)


def klt_fit(cov, tol=1e-10):
    """KLT basis from an autocovariance matrix.

    Columns are orthonormal eigenvectors in descending eigenvalue order;
    equal eigenvalues are ordered by the index of each eigenvector's
    largest-magnitude entry, which is made positive.
    """
    c = np.asarray(cov, dtype=float)
    if c.ndim != 2 or c.shape[0] != c.shape[1]:
        raise ValueError("covariance must be a square matrix")
    scale = max(np.max(np.abs(c)), 1.0)
    if np.max(np.abs(c - c.T)) > tol * scale:
        raise ValueError("covariance matrix is not symmetric")
    w, v = np.linalg.eigh((c + c.T) / 2)
    lead = np.argmax(np.abs(v), axis=0)
    signs = np.sign(v[lead, np.arange(v.shape[1])])
    v = v * np.where(signs == 0, 1.0, signs)
    # descending eigenvalue; ties broken by the position of the leading entry
    order = np.lexsort((lead, -np.round(w / scale, 12)))
    v = v[:, order]
    return Transform("klt", v)


def transform_covariance(transform, cov, rows, cols):
    """Covariance of the coefficients, M C M^T."""
    m = transform_matrix(transform, rows, cols)
    return m @ np.asarray(cov, dtype=float) @ m.T


def _offdiag_abs_sum(c):
    c = np.abs(np.asarray(c, dtype=float))
    return c.sum() - np.trace(c)


def decorrelation_efficiency(cov_coeffs, cov_source):
    """1 - (off-diagonal |C_TT| mass) / (off-diagonal |C_XX| mass)."""
    cov_coeffs = np.asarray(cov_coeffs, dtype=float)
    cov_source = np.asarray(cov_source, dtype=float)
    if cov_coeffs.shape != cov_source.shape:
        raise ValueError("covariance matrices differ in shape")
    denom = _offdiag_abs_sum(cov_source)
    if denom <= 0:
        raise ValueError("source covariance is already diagonal; efficiency undefined")
    return 1.0 - _offdiag_abs_sum(cov_coeffs) / denom
