"""RO-array source model, synthetic datasets, CSV ingestion and statistics.

Synthetic data use numpy's Philox counter-based generator seeded with an
explicit 64-bit integer, so a (model, seed) pair always reproduces the
same dataset.
"""

import csv
import io
import json
from dataclasses import dataclass, field
from typing import List

import numpy as np

from .transforms import forward, transform_matrix

CSV_HEADER = ("device", "measurement", "row", "col", "count")


class DatasetFormatError(ValueError):
    """Malformed dataset file; the message names the line or device."""


@dataclass(frozen=True, eq=False)
class SourceModel:
    """Gaussian RO array: latent mean/covariance plus i.i.d. measurement noise."""

    rows: int
    cols: int
    mean: np.ndarray
    cov: np.ndarray
    noise_var: float = 0.0

    def __post_init__(self):
        L = self.rows * self.cols
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be positive")
        mean = np.broadcast_to(np.asarray(self.mean, dtype=float), (L,)).copy()
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (L, L):
            raise ValueError(f"covariance must be {L}x{L}, got {cov.shape}")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise ValueError("covariance is not symmetric")
        if self.noise_var < 0:
            raise ValueError("noise variance must be nonnegative")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def size(self):
        return self.rows * self.cols

    @classmethod
    def exponential(cls, rows=16, cols=16, sigma2=1500.0**2, rho=0.97, mean=20000.0, noise_var=0.5):
        """Separable exponential correlation sigma2 * rho**(|di| + |dj|)."""
        if not 0 <= rho < 1:
            raise ValueError(f"correlation rho must lie in [0, 1), got {rho}")
        if sigma2 <= 0:
            raise ValueError("sigma2 must be positive")
        r, c = np.divmod(np.arange(rows * cols), cols)
        dist = np.abs(r[:, None] - r[None, :]) + np.abs(c[:, None] - c[None, :])
        return cls(rows, cols, mean, sigma2 * rho**dist, noise_var)


@dataclass(eq=False)
class RODataset:
    """Counter values per device: ``measurements[d]`` has shape (m_d, rows, cols)."""

    rows: int
    cols: int
    device_ids: List[str] = field(default_factory=list)
    measurements: List[np.ndarray] = field(default_factory=list)

    def __post_init__(self):
        if len(self.device_ids) != len(self.measurements):
            raise ValueError("one measurement stack per device required")
        if len(set(self.device_ids)) != len(self.device_ids):
            raise ValueError("device ids must be unique")
        stacks = []
        for dev, m in zip(self.device_ids, self.measurements):
            m = np.asarray(m, dtype=float)
            if m.ndim != 3 or m.shape[1:] != (self.rows, self.cols) or m.shape[0] < 1:
                raise ValueError(f"device {dev}: expected (m, {self.rows}, {self.cols}) array, got {m.shape}")
            stacks.append(m)
        self.measurements = stacks

    @property
    def n_devices(self):
        return len(self.device_ids)

    def __eq__(self, other):
        if not isinstance(other, RODataset):
            return NotImplemented
        return (
            (self.rows, self.cols) == (other.rows, other.cols)
            and self.device_ids == other.device_ids
            and all(a.shape == b.shape and np.array_equal(a, b) for a, b in zip(self.measurements, other.measurements))
        )

    def device_means(self):
        """(n_devices, rows, cols) per-device average over measurements."""
        return np.stack([m.mean(axis=0) for m in self.measurements])

    def measurement(self, index):
        """(n_devices, rows, cols) array of one measurement index across devices."""
        return np.stack([m[index] for m in self.measurements])

    def device(self, device_id):
        return self.measurements[self.device_ids.index(str(device_id))]


def _psd_factor(cov):
    w, v = np.linalg.eigh(cov)
    tol = 1e-10 * max(1.0, np.abs(w).max())
    if w.min() < -tol:
        raise ValueError(f"covariance is not positive semidefinite: eigenvalue {w.min():.6g}")
    return v * np.sqrt(np.clip(w, 0.0, None))


def make_rng(seed):
    """Philox generator for an explicit 64-bit seed."""
    return np.random.Generator(np.random.Philox(int(seed) & 0xFFFFFFFFFFFFFFFF))


def synth_dataset(model, n_devices, n_measurements, seed):
    """Draw one latent array per device and add i.i.d. noise per measurement."""
    if n_devices < 1 or n_measurements < 1:
        raise ValueError("need at least one device and one measurement")
    factor = _psd_factor(model.cov)
    rng = make_rng(seed)
    L = model.size
    latent = model.mean + rng.standard_normal((n_devices, L)) @ factor.T
    noise = np.sqrt(model.noise_var) * rng.standard_normal((n_devices, n_measurements, L))
    obs = (latent[:, None, :] + noise).reshape(n_devices, n_measurements, model.rows, model.cols)
    return RODataset(model.rows, model.cols, [str(i) for i in range(n_devices)], list(obs))


def synth_latents(model, n_devices, seed):
    """Latent device arrays only, (n_devices, L); same draw as :func:`synth_dataset`."""
    factor = _psd_factor(model.cov)
    rng = make_rng(seed)
    return model.mean + rng.standard_normal((n_devices, model.size)) @ factor.T


def estimate_autocovariance(values):
    """Unbiased sample autocovariance of per-device L-vectors, shape (D, L)."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 2:
        raise ValueError("expected a (devices, L) array")
    if x.shape[0] < 2:
        raise ValueError("autocovariance needs at least two devices")
    centered = x - x.mean(axis=0)
    cov = centered.T @ centered / (x.shape[0] - 1)
    return (cov + cov.T) / 2


@dataclass(eq=False)
class CoefficientStats:
    """Per-coefficient mean, deviation and equalized noise deviation.

    Arrays are indexed by coefficient index - 1. ``sigma_n`` is the noise
    deviation divided by ``sigma``. The DC coefficient is never usable.
    """

    mu: np.ndarray
    sigma: np.ndarray
    sigma_n: np.ndarray
    usable: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=float)
        self.sigma = np.asarray(self.sigma, dtype=float)
        self.sigma_n = np.asarray(self.sigma_n, dtype=float)
        self.usable = np.asarray(self.usable, dtype=bool).copy()
        L = self.mu.size
        if not (self.sigma.size == self.sigma_n.size == self.usable.size == L):
            raise ValueError("stat arrays differ in length")
        if np.any(self.sigma_n < 0):
            raise ValueError("noise deviations must be nonnegative")
        if np.any(self.usable & ~(self.sigma > 0)):
            raise ValueError("usable coefficients need sigma > 0")
        self.usable[0] = False

    def __len__(self):
        return self.mu.size

    @classmethod
    def homogeneous(cls, L, sigma_n, mu=0.0, sigma=1.0):
        """Synthetic stats with the same noise level on every coefficient."""
        return cls(np.full(L, mu), np.full(L, sigma), np.broadcast_to(sigma_n, (L,)), np.ones(L, bool))

    def to_records(self):
        return [
            {"index": i + 1, "mu": float(m), "sigma": float(s), "sigma_n": float(n), "usable": bool(u)}
            for i, (m, s, n, u) in enumerate(zip(self.mu, self.sigma, self.sigma_n, self.usable))
        ]

    def to_json(self):
        return json.dumps(self.to_records(), indent=1)

    @classmethod
    def from_json(cls, text):
        recs = sorted(json.loads(text), key=lambda r: r["index"])
        if [r["index"] for r in recs] != list(range(1, len(recs) + 1)):
            raise ValueError("stats indices must be 1..L without gaps")
        return cls(
            [r["mu"] for r in recs],
            [r["sigma"] for r in recs],
            [r["sigma_n"] for r in recs],
            [r["usable"] for r in recs],
        )


def estimate_stats(dataset, transform):
    """Coefficient statistics from a dataset.

    mu and sigma (ddof=1) come from the transforms of the per-device mean
    arrays. The noise deviation is the pooled within-device deviation of
    the coefficients (for two measurements this is |difference| / sqrt(2)),
    expressed in units of sigma.
    """
    if dataset.n_devices < 2:
        raise ValueError("statistics need at least two devices")
    L = dataset.rows * dataset.cols
    means = forward(transform, dataset.device_means()).reshape(-1, L)
    mu = means.mean(axis=0)
    sigma = means.std(axis=0, ddof=1)

    sq = np.zeros(L)
    dof = 0
    for m in dataset.measurements:
        if m.shape[0] < 2:
            continue
        t = forward(transform, m).reshape(m.shape[0], L)
        sq += ((t - t.mean(axis=0)) ** 2).sum(axis=0)
        dof += m.shape[0] - 1
    if dof == 0:
        raise ValueError("noise estimation needs a device with at least two measurements")
    noise_sd = np.sqrt(sq / dof)

    scale = max(np.abs(sigma).max(), 1.0)
    usable = sigma > 1e-12 * scale
    sigma_n = np.where(usable, noise_sd / np.where(usable, sigma, 1.0), 0.0)
    return CoefficientStats(mu, sigma, sigma_n, usable)


def model_stats(model, transform):
    """Exact coefficient statistics implied by a source model.

    The noise is white, so an orthonormal transform leaves its variance
    unchanged on every coefficient.
    """
    m = transform_matrix(transform, model.rows, model.cols)
    mu = m @ model.mean
    sigma = np.sqrt(np.clip(np.einsum("ij,jk,ik->i", m, model.cov, m), 0.0, None))
    scale = max(sigma.max(), 1.0)
    usable = sigma > 1e-12 * scale
    sigma_n = np.where(usable, np.sqrt(model.noise_var) / np.where(usable, sigma, 1.0), 0.0)
    return CoefficientStats(mu, sigma, sigma_n, usable)


def _format_count(v):
    return str(int(v)) if float(v).is_integer() and abs(v) < 2**53 else repr(float(v))


def write_csv(dataset, stream):
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for dev, stack in zip(dataset.device_ids, dataset.measurements):
        for k, arr in enumerate(stack):
            for (r, c), v in np.ndenumerate(arr):
                w.writerow((dev, k, r, c, _format_count(v)))


def dataset_to_csv(dataset):
    buf = io.StringIO()
    write_csv(dataset, buf)
    return buf.getvalue()


def ingest_csv(stream):
    """Parse the dataset CSV (header ``device,measurement,row,col,count``)."""
    reader = csv.reader(stream)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetFormatError("line 1: empty file") from None
    if tuple(h.strip() for h in header) != CSV_HEADER:
        raise DatasetFormatError(f"line 1: header must be {','.join(CSV_HEADER)}, got {','.join(header)}")

    cells = {}
    order = []
    for lineno, row in enumerate(reader, start=2):
        if not row:
            continue
        if len(row) != 5:
            raise DatasetFormatError(f"line {lineno}: expected 5 fields, got {len(row)}")
        dev = row[0].strip()
        try:
            meas, r, c = int(row[1]), int(row[2]), int(row[3])
        except ValueError:
            raise DatasetFormatError(f"line {lineno}: measurement/row/col must be integers") from None
        try:
            value = float(row[4])
        except ValueError:
            raise DatasetFormatError(f"line {lineno}: non-numeric count {row[4]!r}") from None
        if not np.isfinite(value):
            raise DatasetFormatError(f"line {lineno}: count must be finite")
        if meas < 0 or r < 0 or c < 0:
            raise DatasetFormatError(f"line {lineno}: negative index")
        if dev not in cells:
            cells[dev] = {}
            order.append(dev)
        key = (meas, r, c)
        if key in cells[dev]:
            raise DatasetFormatError(f"line {lineno}: duplicate cell {key} for device {dev}")
        cells[dev][key] = value
    if not order:
        raise DatasetFormatError("no data rows")

    rows = 1 + max(k[1] for d in cells.values() for k in d)
    cols = 1 + max(k[2] for d in cells.values() for k in d)
    stacks = []
    for dev in order:
        meas_ids = sorted({k[0] for k in cells[dev]})
        if meas_ids != list(range(len(meas_ids))):
            raise DatasetFormatError(f"device {dev}: measurement indices must be 0..m-1")
        if len(cells[dev]) != len(meas_ids) * rows * cols:
            raise DatasetFormatError(
                f"device {dev}: {len(cells[dev])} cells, expected {len(meas_ids)} x {rows} x {cols}"
            )
        stack = np.empty((len(meas_ids), rows, cols))
        for (m, r, c), v in cells[dev].items():
            stack[m, r, c] = v
        stacks.append(stack)
    return RODataset(rows, cols, order, stacks)


def read_csv(path):
    with open(path, newline="") as fh:
        return ingest_csv(fh)
