"""Histogram equalization, equiprobable Gaussian quantizers and bit allocation.

Two reliability metrics drive the number of bits K_i taken from each
coefficient:

* fixed measurement channel: largest K with mean fractional Hamming
  distance D_i(K) <= p_b (every extracted bit sees roughly a BSC(p_b));
* fixed error count: largest K with correctness probability
  P_c,i(K) >= threshold(C_max), so a decoder correcting the bits of
  C_max coefficients meets the block-error target.
"""

import hashlib
import json
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy.special import ndtr, ndtri

from .analysis import binary_entropy, binomial_tail
from .transforms import forward

K_CAP = 8
TRUNCATION = 8.0
_GL_ORDER = 16
_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(_GL_ORDER)


@dataclass(frozen=True)
class Quantizer:
    """K-bit quantizer with boundaries b_k = Phi^-1(k / 2^K), b_0 = -inf, b_2^K = +inf."""

    K: int

    def __post_init__(self):
        if not 1 <= self.K <= K_CAP:
            raise ValueError(f"K must be in 1..{K_CAP}, got {self.K}")

    @property
    def levels(self):
        return 1 << self.K

    @property
    def boundaries(self):
        return boundaries(self.K)

    def __call__(self, t):
        return quantize_value(t, self.K)


@lru_cache(maxsize=None)
def _boundaries(K):
    b = ndtri(np.arange((1 << K) + 1) / (1 << K))
    b.setflags(write=False)
    return b


def boundaries(K):
    """All 2^K + 1 boundaries including the infinite ends."""
    return _boundaries(K)


def quantize_value(t, K):
    """Interval index k in 1..2^K with b_{k-1} < t <= b_k (vectorized)."""
    inner = boundaries(K)[1:-1]
    k = np.searchsorted(inner, np.asarray(t, dtype=float), side="left") + 1
    return k if np.ndim(k) else int(k)


def gray_bits(k, K):
    """Reflected Gray code of k - 1, K bits, most significant first."""
    k = np.asarray(k, dtype=np.int64)
    if np.any(k < 1) or np.any(k > (1 << K)):
        raise ValueError(f"interval index out of range 1..{1 << K}")
    g = (k - 1) ^ ((k - 1) >> 1)
    shifts = np.arange(K - 1, -1, -1)
    return ((g[..., None] >> shifts) & 1).astype(np.uint8)


@lru_cache(maxsize=None)
def gray_distance_matrix(K):
    codes = gray_bits(np.arange(1, (1 << K) + 1), K)
    return (codes[:, None, :] != codes[None, :, :]).sum(axis=-1)


def equalize(coeffs, stats, used=None):
    """(T_i - mu_i) / sigma_i over the trailing coefficient axes.

    ``coeffs`` may be an r x c array, a stack of them, or flat L-vectors.
    Coefficients with sigma_i = 0 map to NaN and must not be ``used``.
    """
    t = np.asarray(coeffs, dtype=float)
    L = len(stats)
    shape = t.shape
    if t.size % L:
        raise ValueError(f"coefficient arrays must hold a multiple of {L} values")
    flat = t.reshape(-1, L)
    if used is not None and np.any(np.asarray(used, bool) & ~(stats.sigma > 0)):
        bad = np.flatnonzero(np.asarray(used, bool) & ~(stats.sigma > 0))[0] + 1
        raise ValueError(f"coefficient {bad} has zero deviation but is used")
    ok = stats.sigma > 0
    safe = np.where(ok, stats.sigma, 1.0)
    out = np.where(ok, (flat - stats.mu) / safe, np.nan)
    return out.reshape(shape)


_SAT = 9.5  # Phi(z) equals 0 or 1 to ~1e-21 beyond this many noise deviations
_GRADING = np.array([0.0, 0.25, 1.0, 4.0, 16.0])


def _gl(a, b, y, sigma):
    """Gauss-Legendre rule for phi(t) Phi((y - t) / sigma) on each panel [a, b]."""
    half = (b - a) / 2
    t = ((a + b) / 2)[:, None] + half[:, None] * _GL_NODES
    f = np.exp(-0.5 * t * t) / np.sqrt(2 * np.pi) * ndtr((y[:, None] - t) / sigma)
    return (f @ _GL_WEIGHTS) * half


def _pair_integrals(lo, hi, y, sigma, tol):
    """int_{lo_p}^{hi_p} phi(t) Phi((y_p - t) / sigma) dt for every pair p.

    Adaptive composite Gauss-Legendre: each pair starts from a mesh graded
    toward t = y_p, where the integrand changes on the scale sigma, and a
    panel is bisected until the two halves agree with the whole panel to
    tol * width / 16.
    """
    n = lo.size
    cand = np.clip(y[:, None] + sigma * np.concatenate([-_GRADING[1:], _GRADING])[None, :], lo[:, None], hi[:, None])
    pts = np.sort(np.concatenate([lo[:, None], hi[:, None], cand], axis=1), axis=1)
    a, b = pts[:, :-1].ravel(), pts[:, 1:].ravel()
    pid = np.repeat(np.arange(n), pts.shape[1] - 1)
    keep = b > a
    a, b, pid = a[keep], b[keep], pid[keep]
    out = np.zeros(n)
    span = 2 * TRUNCATION
    for _ in range(60):
        if a.size == 0:
            return out
        yy = y[pid]
        mid = (a + b) / 2
        whole = _gl(a, b, yy, sigma)
        halves = _gl(a, mid, yy, sigma) + _gl(mid, b, yy, sigma)
        err = np.abs(halves - whole)
        ok = (err <= tol * (b - a) / span) | (err <= 8 * np.finfo(float).eps * np.abs(halves))
        np.add.at(out, pid[ok], halves[ok])
        bad = ~ok
        a, b, pid = np.concatenate([a[bad], mid[bad]]), np.concatenate([mid[bad], b[bad]]), np.concatenate([pid[bad], pid[bad]])
    raise RuntimeError("transition-matrix quadrature did not converge")


@lru_cache(maxsize=4096)
def _transition_matrix(K, sigma_n, tol):
    M = 1 << K
    if sigma_n == 0:
        P = np.eye(M) / M
        P.setflags(write=False)
        return P
    b = boundaries(K)
    # A[j, k] = P(T in interval j+1, T + N <= b_k); A[:, 0] = 0, A[:, M] = 2^-K
    A = np.zeros((M, M + 1))
    A[:, M] = 1.0 / M
    rows = np.arange(M)[:, None]
    y = b[1:-1][None, :]
    with np.errstate(invalid="ignore"):
        z_min = (y - b[1:][:, None]) / sigma_n  # at the top of the row interval
        z_max = (y - b[:-1][:, None]) / sigma_n
    ones = np.broadcast_to(z_min >= _SAT, (M, M - 1))
    zeros = np.broadcast_to(z_max <= -_SAT, (M, M - 1))
    A[:, 1:M] = np.where(ones, 1.0 / M, 0.0)
    jj, kk = np.nonzero(~(ones | zeros))
    if jj.size:
        lo = np.maximum(b[jj], -TRUNCATION)
        hi = np.minimum(b[jj + 1], TRUNCATION)
        A[jj, kk + 1] = _pair_integrals(lo, hi, b[kk + 1], sigma_n, tol)
    P = np.diff(A, axis=1)
    P.setflags(write=False)
    return P


def transition_matrix(K, sigma_n, tol=1e-12):
    """Joint probabilities P[j-1, k-1] of enrollment interval j and noisy interval k.

    The enrollment value is standard normal; the re-measurement adds
    independent N(0, sigma_n^2) noise.
    """
    if K < 1 or K > K_CAP:
        raise ValueError(f"K must be in 1..{K_CAP}")
    if sigma_n < 0:
        raise ValueError("noise deviation must be nonnegative")
    return _transition_matrix(int(K), float(sigma_n), float(tol))


def hd_metric(K, sigma_n):
    """Mean fractional Hamming distance D(K) between Gray labels of the two intervals."""
    P = transition_matrix(K, sigma_n)
    return float((P * gray_distance_matrix(K)).sum() / K)


def correctness(K, sigma_n):
    """P_c(K): probability that all K bits of a coefficient survive re-measurement."""
    return float(np.trace(transition_matrix(K, sigma_n)))


def smax(p_b, N):
    """Maximum secret-key length (1 - H_b(p_b)) * N."""
    if not 0 <= p_b <= 0.5:
        raise ValueError("p_b must lie in [0, 0.5]")
    return (1.0 - binary_entropy(p_b)) * N


def correctness_threshold(c_max, n_coeffs, target=1e-9, precision=1e-12):
    """Smallest P with P[Binomial(n_coeffs, 1 - P) > c_max] <= target (bisection)."""
    if not 0 <= c_max <= n_coeffs:
        raise ValueError("need 0 <= c_max <= n_coeffs")
    if c_max == n_coeffs:
        return 0.0
    lo, hi = 0.0, 1.0
    while hi - lo > precision:
        mid = (lo + hi) / 2
        if binomial_tail(n_coeffs, 1.0 - mid, c_max) <= target:
            hi = mid
        else:
            lo = mid
    return hi


@dataclass(eq=False)
class BitAllocation:
    """Bits per coefficient (index order, K[0] is the unused DC) plus metric metadata."""

    K: np.ndarray
    metric: str
    p_b: Optional[float] = None
    c_max: Optional[int] = None
    p_c_bar: Optional[float] = None

    def __post_init__(self):
        self.K = np.asarray(self.K, dtype=np.int64).copy()
        if self.K.ndim != 1 or self.K.size < 1:
            raise ValueError("K must be a non-empty vector")
        if self.K[0] != 0:
            raise ValueError("the DC coefficient cannot carry bits")
        if np.any(self.K < 0) or np.any(self.K > K_CAP):
            raise ValueError(f"K_i must be in 0..{K_CAP}")
        if self.metric not in ("fixed_bsc", "fixed_errors"):
            raise ValueError(f"unknown metric {self.metric!r}")

    @property
    def N(self):
        return int(self.K[1:].sum())

    @property
    def k_max(self):
        return int(self.K.max())

    @property
    def e(self):
        """Bit errors to correct when the c_max most loaded coefficients fail."""
        if self.c_max is None:
            return None
        return int(np.sort(self.K)[::-1][: self.c_max].sum())

    @property
    def d_min_required(self):
        e = self.e
        return None if e is None else 2 * e + 1

    @property
    def used(self):
        return self.K > 0

    def to_dict(self):
        d = {"metric": self.metric}
        if self.metric == "fixed_bsc":
            d["p_b"] = self.p_b
        else:
            d["c_max"] = self.c_max
        d.update(
            p_c_bar=self.p_c_bar, K=self.K.tolist(), N=self.N, e=self.e, d_min_required=self.d_min_required
        )
        return d

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text):
        d = json.loads(text)
        alloc = cls(d["K"], d["metric"], d.get("p_b"), d.get("c_max"), d.get("p_c_bar"))
        if d.get("N") is not None and d["N"] != alloc.N:
            raise ValueError("allocation N does not match its K vector")
        return alloc

    def digest(self):
        canon = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canon.encode()).hexdigest()


def allocate_fixed_bsc(stats, p_b, k_cap=K_CAP):
    """K_i = largest K with D_i(K) <= p_b; the scan stops at the first K that fails."""
    if not 0 < p_b < 0.5:
        raise ValueError("p_b must lie in (0, 0.5)")
    K = np.zeros(len(stats), dtype=np.int64)
    for i in np.flatnonzero(stats.usable):
        for k in range(1, k_cap + 1):
            if hd_metric(k, stats.sigma_n[i]) > p_b:
                break
            K[i] = k
    return BitAllocation(K, "fixed_bsc", p_b=float(p_b))


def allocate_fixed_errors(stats, c_max, force_K=None, n_coeffs=None, target=1e-9):
    """K_i = largest K (<= force_K if given) with P_c,i(K) >= threshold(c_max).

    ``n_coeffs`` is the binomial size in the threshold, by default the
    number of non-DC coefficients.
    """
    if n_coeffs is None:
        n_coeffs = len(stats) - 1
    p_bar = correctness_threshold(c_max, n_coeffs, target)
    cap = K_CAP if force_K is None else min(int(force_K), K_CAP)
    K = np.zeros(len(stats), dtype=np.int64)
    for i in np.flatnonzero(stats.usable):
        for k in range(1, cap + 1):
            if correctness(k, stats.sigma_n[i]) < p_bar:
                break
            K[i] = k
    return BitAllocation(K, "fixed_errors", c_max=int(c_max), p_c_bar=p_bar)


def extract_bits(array, transform, stats, alloc):
    """Bit sequence(s) of length N from r x c array(s).

    Coefficients are visited in ascending index; each used coefficient
    contributes gray_bits(Q(t_hat)) with its own K_i.
    """
    x = np.asarray(array, dtype=float)
    lead = x.shape[:-2]
    L = x.shape[-2] * x.shape[-1]
    if L != len(stats) or L != alloc.K.size:
        raise ValueError("array size does not match the statistics/allocation")
    used = alloc.used
    t = forward(transform, x).reshape(lead + (L,))
    t_hat = equalize(t, stats, used)
    parts = []
    for i in np.flatnonzero(used):
        k = alloc.K[i]
        parts.append(gray_bits(quantize_value(t_hat[..., i], k), k))
    if not parts:
        return np.zeros(lead + (0,), dtype=np.uint8)
    return np.concatenate(parts, axis=-1)
