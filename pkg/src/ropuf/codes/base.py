"""Shared types for the codecs."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

DECODED = "decoded"
ERASURE = "erasure"
FAILURE = "failure"


class NoCodecError(TypeError):
    """Raised when encode/decode is requested from an analysis-only code."""


@dataclass(frozen=True, eq=False)
class DecodeOutcome:
    """Result of a decoding attempt.

    ``status`` is one of ``"decoded"``, ``"erasure"`` (inner RM decoder
    only) or ``"failure"``. A ``"decoded"`` outcome beyond the decoding
    radius may be a miscorrection; callers that know the transmitted
    message must compare it themselves.
    """

    status: str
    message: Optional[np.ndarray] = None
    corrected: int = 0

    @property
    def ok(self):
        return self.status == DECODED

    @classmethod
    def failure(cls):
        return cls(FAILURE)

    @classmethod
    def erasure(cls):
        return cls(ERASURE)


def as_bits(x, length=None, what="bits"):
    """Coerce to a 1-D uint8 array of zeros and ones, checking the length."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise ValueError(f"{what} must be one-dimensional, got shape {arr.shape}")
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError(f"{what} must contain only 0 and 1")
    if length is not None and arr.size != length:
        raise ValueError(f"{what} has length {arr.size}, expected {length}")
    return arr.astype(np.uint8)


class Code:
    """Common surface: binary ``encode``/``decode`` plus symbol-level hooks.

    ``n``, ``k`` are in bits. Codes usable as an outer code also provide
    ``n_symbols``, ``k_symbols``, ``symbol_bits``, ``encode_symbols`` and
    ``decode_symbols``.
    """

    name = "code"
    n = k = d = 0
    constructive = True
    symbol_bits = 1

    @property
    def t(self):
        return (self.d - 1) // 2

    @property
    def rate(self):
        return self.k / self.n

    @property
    def n_symbols(self):
        return self.n // self.symbol_bits

    @property
    def k_symbols(self):
        return self.k // self.symbol_bits

    def encode(self, message):
        raise NotImplementedError

    def decode(self, received):
        raise NotImplementedError

    # binary codes: one bit per symbol; erased bits are read as zero
    def encode_symbols(self, symbols):
        return self.encode(symbols)

    def decode_symbols(self, received, erasures=None):
        received = np.asarray(received, dtype=np.uint8)
        if erasures is not None:
            received = np.where(np.asarray(erasures, dtype=bool), 0, received).astype(np.uint8)
        return self.decode(received)

    def __repr__(self):
        return f"<{type(self).__name__} {self.name} ({self.n},{self.k},{self.d})>"


class AnalysisOnly(Code):
    """Parameters of a code whose block-error analysis needs only (n, k, d)."""

    constructive = False

    def __init__(self, name, n, k, d):
        self.name = name
        self.n, self.k, self.d = n, k, d

    def encode(self, message):
        raise NoCodecError(f"{self.name}: no constructive codec")

    def decode(self, received):
        raise NoCodecError(f"{self.name}: no constructive codec")

    encode_symbols = encode

    def decode_symbols(self, received, erasures=None):
        raise NoCodecError(f"{self.name}: no constructive codec")
