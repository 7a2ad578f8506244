"""Bit-exact model of the fixed-point datapath: RO counters, the 16x16 DWHT built
from four-point butterflies, and the quantizer boundary ROM.

Division by two is an arithmetic right shift, so odd negative sums round
toward minus infinity (e.g. -3 >> 1 == -2).
"""

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

COUNTER_BITS = 16
DATAPATH_BITS = 20
ROM_WORD_BITS = 20


def signed_range(width):
    return -(1 << (width - 1)), (1 << (width - 1)) - 1


def signed_width(values):
    """Smallest two's-complement width holding every value (at least 1)."""
    v = np.asarray(values, dtype=np.int64)
    if v.size == 0:
        return 1
    hi, lo = int(v.max()), int(v.min())
    return max(1, max(hi, 0).bit_length() + 1 if hi > 0 else 1, (-lo - 1).bit_length() + 1 if lo < 0 else 1)


def check_width(values, width, what="value"):
    lo, hi = signed_range(width)
    v = np.asarray(values, dtype=np.int64)
    if v.size and (v.min() < lo or v.max() > hi):
        bad = int(v.min()) if v.min() < lo else int(v.max())
        raise OverflowError(f"{what} {bad} does not fit in {width} signed bits")


@dataclass(frozen=True)
class FixedWord:
    """Signed two's-complement value with a declared width."""

    value: int
    width: int

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("width must be positive")
        check_width(self.value, self.width, "FixedWord")

    def __int__(self):
        return self.value


def dwht4p(x0, x1, x2, x3, width=COUNTER_BITS):
    """Four-point 2-D Walsh-Hadamard butterfly with a final arithmetic >> 1.

    The sums need at most ``width + 2`` bits; after the shift the outputs fit
    in ``width + 1`` bits. Both are asserted.
    """
    x = [int(v) for v in (x0, x1, x2, x3)]
    check_width(x, width, "butterfly input")
    s = [x[0] + x[1] + x[2] + x[3], x[0] - x[1] + x[2] - x[3], x[0] + x[1] - x[2] - x[3], x[0] - x[1] - x[2] + x[3]]
    check_width(s, width + 2, "butterfly sum")
    y = tuple(v >> 1 for v in s)
    check_width(y, width + 1, "butterfly output")
    return y


def dwht_schedule(size=16):
    """Address schedule: one list per pass of (a0, a1, a2, a3) row-major cell addresses.

    Pass s pairs cells at distance h = 2^s in both directions:
    (r, c), (r, c + h), (r + h, c), (r + h, c + h) for r, c with bit s clear.
    """
    if size < 2 or size & (size - 1):
        raise ValueError("size must be a power of two")
    passes = []
    for s in range(size.bit_length() - 1):
        h = 1 << s
        base = [i for i in range(size) if not i & h]
        passes.append([(r * size + c, r * size + c + h, (r + h) * size + c, (r + h) * size + c + h) for r in base for c in base])
    return passes


@dataclass(frozen=True)
class DWHTTrace:
    """Widest signed value seen per pass, before and after the shift."""

    sum_bits: tuple
    stored_bits: tuple


def dwht2d_fixed(array, in_width=COUNTER_BITS, out_width=DATAPATH_BITS, trace=False):
    """Fixed-point 2-D DWHT of a square power-of-two array (or a stack of them).

    Equals the orthonormal transform up to the accumulated shift truncation.
    Each pass grows the stored width by one bit; every pass is checked
    against ``out_width``.
    """
    a = np.array(array, dtype=np.int64)
    size = a.shape[-1]
    if a.ndim < 2 or a.shape[-2] != size or size & (size - 1):
        raise ValueError("expected square power-of-two arrays")
    check_width(a, in_width, "input")
    sums, stored = [], []
    width = in_width
    for s in range(size.bit_length() - 1):
        h = 1 << s
        # view as (..., R, 2, C, 2) blocks so that the pair index is explicit
        v = a.reshape(a.shape[:-2] + (size // (2 * h), 2, h, size // (2 * h), 2, h))
        x0 = v[..., :, 0, :, :, 0, :]
        x1 = v[..., :, 0, :, :, 1, :]
        x2 = v[..., :, 1, :, :, 0, :]
        x3 = v[..., :, 1, :, :, 1, :]
        s0 = x0 + x1 + x2 + x3
        s1 = x0 - x1 + x2 - x3
        s2 = x0 + x1 - x2 - x3
        s3 = x0 - x1 - x2 + x3
        pre = signed_width(np.stack([s0, s1, s2, s3]))
        if pre > width + 2:
            raise OverflowError(f"pass {s}: sums need {pre} bits from {width}-bit inputs")
        out = np.empty_like(v)
        out[..., :, 0, :, :, 0, :] = s0 >> 1
        out[..., :, 0, :, :, 1, :] = s1 >> 1
        out[..., :, 1, :, :, 0, :] = s2 >> 1
        out[..., :, 1, :, :, 1, :] = s3 >> 1
        a = out.reshape(a.shape)
        width += 1
        check_width(a, min(width, out_width), f"pass {s} output")
        sums.append(pre)
        stored.append(signed_width(a))
    if trace:
        return a, DWHTTrace(tuple(sums), tuple(stored))
    return a


def corner_arrays(size=16, width=COUNTER_BITS):
    """Extremal inputs: every Hadamard sign pattern mapped to the two width limits, and its negation."""
    from .transforms import walsh_hadamard_matrix

    lo, hi = signed_range(width)
    h = np.sign(walsh_hadamard_matrix(size)).astype(np.int64)
    patterns = np.einsum("ui,vj->uvij", h, h).reshape(-1, size, size)
    pos = np.where(patterns > 0, hi, lo)
    neg = np.where(patterns > 0, lo, hi)
    return np.concatenate([pos, neg])


def truncation_bound(size=16):
    """Worst-case |fixed - exact| from floor shifts: 0.5 per pass, doubled by every later pass."""
    passes = size.bit_length() - 1
    return sum(0.5 * 2**k for k in range(passes))


def counter_overload_time(width_bits, f_max):
    """T_min = (2^w - 1) / f_max, the shortest window that can overflow a w-bit counter."""
    if width_bits < 1 or f_max <= 0:
        raise ValueError("need w >= 1 and f > 0")
    return ((1 << width_bits) - 1) / f_max


def no_overload(window, width_bits, f_max):
    return window < counter_overload_time(width_bits, f_max)


@dataclass(frozen=True, eq=False)
class QuantizerROM:
    """Boundary words in coefficient-index order, ascending within each coefficient."""

    words: np.ndarray
    K: np.ndarray
    word_bits: int = ROM_WORD_BITS

    @property
    def n_words(self):
        return int(self.words.size)

    @property
    def total_bytes(self):
        return math.ceil(self.n_words * self.word_bits / 8)

    def coefficient_words(self, i):
        counts = (1 << self.K) - 1
        start, count = int(counts[:i].sum()), int(counts[i])
        return self.words[start : start + count]

    def to_bytes(self):
        if self.word_bits > 24:
            raise ValueError("words wider than 24 bits do not fit the 3-byte layout")
        head = json.dumps({"words": self.n_words, "word_bits": self.word_bits}).encode() + b"\n"
        raw = (self.words.astype(np.int64) & ((1 << self.word_bits) - 1)).astype("<u4")
        body = raw.view(np.uint8).reshape(-1, 4)[:, :3].tobytes()
        return head + body


def read_rom(blob):
    """Parse a ROM image into (signed words, word_bits)."""
    end = blob.find(b"\n")
    if end < 0:
        raise ValueError("ROM header is not terminated")
    head = json.loads(blob[:end])
    n, bits = int(head["words"]), int(head["word_bits"])
    body = np.frombuffer(blob[end + 1 :], dtype=np.uint8)
    if body.size != 3 * n:
        raise ValueError(f"ROM body has {body.size} bytes, expected {3 * n}")
    raw = body.reshape(n, 3).astype(np.int64)
    v = raw[:, 0] | (raw[:, 1] << 8) | (raw[:, 2] << 16)
    if np.any(v >> bits):
        raise ValueError("padding bits set in ROM word")
    v = np.where(v >> (bits - 1), v - (1 << bits), v)
    return v, bits


def quantizer_rom(alloc, stats, scale=1.0, word_bits=ROM_WORD_BITS):
    """ROM of raw-unit boundaries round(scale * (mu_i + sigma_i * Phi^-1(k / 2^K_i)))."""
    K = np.asarray(alloc.K, dtype=np.int64)
    if K.size != len(stats):
        raise ValueError("allocation and statistics differ in length")
    if np.any(K > 8):
        raise ValueError("K_i must not exceed 8")
    words = []
    for i in np.flatnonzero(K):
        levels = 1 << int(K[i])
        b = stats.mu[i] + stats.sigma[i] * ndtri(np.arange(1, levels) / levels)
        words.append(np.rint(scale * b).astype(np.int64))
    words = np.concatenate(words) if words else np.zeros(0, dtype=np.int64)
    check_width(words, word_bits, "ROM boundary")
    return QuantizerROM(words, K, word_bits)


def fixed_quantize(values, rom):
    """Bits from fixed-point coefficients (row-major, flat or (..., r, c)) using the ROM.

    Interval k counts the boundaries strictly below the value, so a value
    equal to a boundary falls in the lower interval; bits are Gray coded.
    """
    from .quantize import gray_bits

    v = np.asarray(values, dtype=np.int64)
    L = rom.K.size
    if v.shape[-1] != L:
        v = v.reshape(v.shape[:-2] + (L,))
    parts = []
    for i in np.flatnonzero(rom.K):
        w = rom.coefficient_words(i)
        k = (v[..., i, None] > w).sum(axis=-1) + 1
        parts.append(gray_bits(k, int(rom.K[i])))
    if not parts:
        return np.zeros(v.shape[:-1] + (0,), dtype=np.uint8)
    return np.concatenate(parts, axis=-1)
