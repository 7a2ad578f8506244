"""Block-error probabilities, Monte Carlo for the inner RM code, rate regions, uniqueness."""

import csv
import math
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.optimize import brentq

_DPS = 40


@dataclass(frozen=True)
class RatePoint:
    R_s: float
    R_l: float

    def __post_init__(self):
        if self.R_s < 0 or self.R_l < 0:
            raise ValueError("rates must be nonnegative")


# finite-length reference pair used only for plot overlays
FINITE_LENGTH_REFERENCE = RatePoint(0.691, 0.309)


def binary_entropy(p):
    """H_b(p) in bits, with H_b(0) = H_b(1) = 0."""
    p = float(p)
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if p in (0.0, 1.0):
        return 0.0
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def bsc_conv(a, p):
    """Crossover of two cascaded BSCs, a * p = a(1 - p) + (1 - a)p."""
    return a * (1 - p) + (1 - a) * p


def binomial_tail(n, p, t):
    """P[X > t] for X ~ Binomial(n, p), summed in 40-digit arithmetic."""
    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if not 0 <= t <= n:
        raise ValueError("need 0 <= t <= n")
    if p == 0 or t == n:
        return 0.0
    with mpmath.workdps(_DPS):
        p = mpmath.mpf(p)
        q = 1 - p
        total = mpmath.fsum(mpmath.binomial(n, j) * p**j * q ** (n - j) for j in range(t + 1, n + 1))
        return float(total)


def ee_tail(n, d, p_err, p_era):
    """P[2e + nu >= d] for (e, nu, rest) ~ Multinomial(n; p_err, p_era, 1 - p_err - p_era)."""
    if p_err < 0 or p_era < 0 or p_err + p_era > 1 + 1e-15:
        raise ValueError("need nonnegative probabilities with p_err + p_era <= 1")
    if d <= 0:
        return 1.0
    with mpmath.workdps(_DPS):
        pe, pv = mpmath.mpf(p_err), mpmath.mpf(p_era)
        pr = 1 - pe - pv
        terms = []
        for e in range(n + 1):
            for nu in range(max(0, d - 2 * e), n - e + 1):
                if (e and pe == 0) or (nu and pv == 0):
                    continue
                coef = mpmath.factorial(n) / (
                    mpmath.factorial(e) * mpmath.factorial(nu) * mpmath.factorial(n - e - nu)
                )
                terms.append(coef * pe**e * pv**nu * pr ** (n - e - nu))
        return float(mpmath.fsum(terms))


def _profile(q):
    q = np.asarray(q, dtype=float).ravel()
    if np.any(q < 0) or np.any(q > 1):
        raise ValueError("error probabilities must lie in [0, 1]")
    return q


def _log_mgf(logq, log1mq, theta):
    return np.logaddexp(log1mq, logq + theta)


def poisson_binomial_tail_dftcf(q, t, tilt=True):
    """P[W > t] for W a sum of independent Bernoulli(q_i), by DFT of the characteristic function.

    The characteristic function is evaluated on the n + 1 roots of unity
    with the per-factor products accumulated as sums of complex logarithms
    (log-magnitude plus phase). To keep relative accuracy for tails far
    below machine epsilon the distribution is first exponentially tilted
    so that its mean sits just above t; the tilt is undone exactly on the
    recovered masses.
    """
    q = _profile(q)
    n = q.size
    if not 0 <= t <= n:
        raise ValueError("need 0 <= t <= n")
    n_pos = int(np.count_nonzero(q > 0))
    if n_pos <= t:
        return 0.0
    with np.errstate(divide="ignore"):
        logq = np.log(q)
        log1mq = np.log1p(-q)

    theta = 0.0
    target = min(t + 1.0, n_pos - 0.5)
    if tilt and q.sum() < target:
        def excess(th):
            return np.exp(logq + th - _log_mgf(logq, log1mq, th)).sum() - target

        hi = 1.0
        while excess(hi) < 0:
            hi *= 2
        theta = brentq(excess, 0.0, hi, xtol=1e-12)
    log_m = _log_mgf(logq, log1mq, theta)
    qt = np.exp(logq + theta - log_m)

    k = np.arange(n + 1)
    omega = np.exp(2j * np.pi * k / (n + 1))
    factors = 1 - qt[:, None] + qt[:, None] * omega[None, :]
    cf = np.exp(np.log(factors).sum(axis=0))
    pmf = np.fft.fft(cf) / (n + 1)
    residue = np.max(np.abs(pmf.imag))
    assert residue <= 1e-12, f"DFT-CF imaginary residue {residue:.3g}"
    j = np.arange(t + 1, n + 1)
    scale = log_m.sum() - theta * j
    vals = np.clip(pmf.real[t + 1 :], 0.0, None) * np.exp(scale)
    return float(min(1.0, math.fsum(vals)))


def poisson_binomial_tail_dp(q, t):
    """Same tail by direct convolution of the Bernoulli masses in long double."""
    q = _profile(q).astype(np.longdouble)
    n = q.size
    if not 0 <= t <= n:
        raise ValueError("need 0 <= t <= n")
    pmf = np.zeros(n + 1, dtype=np.longdouble)
    pmf[0] = 1
    for i, qi in enumerate(q):
        pmf[1 : i + 2] = pmf[1 : i + 2] * (1 - qi) + pmf[: i + 1] * qi
        pmf[0] *= 1 - qi
    return float(pmf[t + 1 :].sum())


def avg_crossover(p_c):
    """Average bit-error probability 1 - mean(P_c,i) over the used coefficients (K_i = 1)."""
    p_c = np.asarray(p_c, dtype=float)
    if p_c.size == 0:
        raise ValueError("empty profile")
    return float(1.0 - p_c.mean())


def repetition_crossover(p, n=3):
    """Crossover of the BSC seen after majority decoding of an n-fold repetition (n odd)."""
    if n % 2 == 0:
        raise ValueError("repetition length must be odd")
    return float(sum(math.comb(n, j) * p**j * (1 - p) ** (n - j) for j in range(n // 2 + 1, n + 1)))


@dataclass(frozen=True)
class MCResult:
    trials: int
    p_era: float
    p_err: float
    se_era: float
    se_err: float


def _se(rate, trials):
    return math.sqrt(rate * (1 - rate) / trials)


def _rm_chunk(code, p, count, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    msgs = rng.integers(0, 2, size=(count, code.k), dtype=np.uint8)
    flips = (rng.random((count, code.n)) < p).astype(np.uint8)
    decoded, erased = code.decode_batch(code.encode_batch(msgs) ^ flips)
    wrong = ~erased & np.any(decoded != msgs, axis=1)
    return int(erased.sum()), int(wrong.sum())


def rm_channel_mc(p, trials, seed, chunk=1 << 16):
    """Erasure and error rates of RM(1,5) minimum-distance decoding over a BSC(p).

    Trials are split into fixed-size chunks, each with its own seed spawned
    from ``seed``, so the result depends only on (p, trials, seed, chunk).
    """
    from .codes import get_code

    if not 0 <= p <= 1:
        raise ValueError("p must lie in [0, 1]")
    if trials < 1:
        raise ValueError("need at least one trial")
    code = get_code("rm32_6")
    n_chunks = -(-trials // chunk)
    seeds = np.random.SeedSequence(seed).spawn(n_chunks)
    era = err = 0
    for i, ss in enumerate(seeds):
        count = min(chunk, trials - i * chunk)
        a, b = _rm_chunk(code, p, count, ss)
        era += a
        err += b
    p_era, p_err = era / trials, err / trials
    return MCResult(trials, p_era, p_err, _se(p_era, trials), _se(p_err, trials))


def repetition_mc(p, trials, seed, n=3):
    """Empirical crossover after majority decoding of n-fold repetition."""
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    flips = rng.random((trials, n)) < p
    rate = float((flips.sum(axis=1) > n // 2).mean())
    return rate, _se(rate, trials)


@dataclass(frozen=True)
class RateRegion:
    p: float
    optimal: RatePoint
    boundary: tuple

    def contains(self, point):
        return point.R_s <= self.optimal.R_s + 1e-15 and point.R_l >= 1 - point.R_s - 1e-15


def fc_region(p, samples=101):
    """Fuzzy-commitment region {0 <= R_s <= 1 - H_b(p), R_l >= 1 - R_s} and its optimal corner."""
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    rs_max = 1 - binary_entropy(p)
    rs = np.linspace(0, rs_max, samples)
    boundary = tuple(RatePoint(float(r), float(1 - r)) for r in rs)
    return RateRegion(float(p), RatePoint(rs_max, binary_entropy(p)), boundary)


def cs_region_mgl(p, grid=None):
    """Chosen-secret boundary with BSC(alpha) test channels.

    R_s(alpha) = 1 - H_b(alpha * p), R_l(alpha) = H_b(alpha * p) - H_b(alpha).
    """
    if not 0 <= p <= 0.5:
        raise ValueError("p must lie in [0, 0.5]")
    grid = np.linspace(0, 0.5, 101) if grid is None else np.asarray(grid, dtype=float)
    if np.any(grid < 0) or np.any(grid > 0.5):
        raise ValueError("alpha grid must lie in [0, 0.5]")
    out = []
    for a in grid:
        h = binary_entropy(bsc_conv(a, p))
        out.append(RatePoint(max(0.0, 1 - h), max(0.0, h - binary_entropy(a))))
    return out


def code_rates(k_used, n):
    """(R_s, R_l) = (k/n, 1 - k/n) for a code used in the fuzzy-commitment scheme."""
    if not 0 <= k_used <= n or n < 1:
        raise ValueError("need 0 <= k <= n")
    return RatePoint(k_used / n, 1 - k_used / n)


def pairwise_hamming(bits):
    """Matrix of Hamming distances between rows of a 0/1 array."""
    x = np.asarray(bits, dtype=np.float64)
    return x @ (1 - x).T + (1 - x) @ x.T


def uniqueness(sequences):
    """Mean and variance of the fractional Hamming distance over all unordered device pairs."""
    x = np.asarray(sequences)
    if x.ndim != 2:
        raise ValueError("sequences must be equal-length rows")
    m, n = x.shape
    if m < 2:
        raise ValueError("need at least two devices")
    if n == 0:
        raise ValueError("empty sequences")
    hd = pairwise_hamming(x)[np.triu_indices(m, 1)] / n
    return {"pair_count": int(hd.size), "mean": float(hd.mean()), "variance": float(hd.var())}


REPORT_SCHEMAS = {
    "pb_report": ("method", "n", "t", "params", "P_B"),
    "rate_region": ("source", "alpha", "Rs", "Rl"),
    "smax": ("p_b", "N", "Smax"),
    "uniqueness": ("pair_count", "mean", "variance"),
}


def write_report(stream, schema, rows):
    """Write report rows under one of the fixed CSV schemas."""
    header = REPORT_SCHEMAS[schema]
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        if len(row) != len(header):
            raise ValueError(f"{schema} rows have {len(header)} fields")
        w.writerow(row)
