"""Fuzzy commitment: helper data M = Enc(pad(S)) xor X and key reconstruction from Y."""

import json
from dataclasses import dataclass
from itertools import product

import numpy as np

from .codes import get_code
from .codes.base import as_bits

MAGIC = b"FCS1"
FORMAT_VERSION = 1
DEFAULT_KEY_BITS = 128


class DecodingFailure(Exception):
    """Reconstruction could not recover a key (decoder failure or bad padding)."""


class HelperMismatch(ValueError):
    """Helper data does not belong to the code or allocation supplied."""


def _code(code):
    return get_code(code) if isinstance(code, str) else code


@dataclass(frozen=True, eq=False)
class HelperData:
    code: str
    n: int
    payload: np.ndarray
    alloc_digest: str = ""
    version: int = FORMAT_VERSION

    def __post_init__(self):
        object.__setattr__(self, "payload", as_bits(self.payload, self.n, "helper payload"))

    def __eq__(self, other):
        return (
            isinstance(other, HelperData)
            and (self.code, self.n, self.alloc_digest, self.version)
            == (other.code, other.n, other.alloc_digest, other.version)
            and np.array_equal(self.payload, other.payload)
        )

    def header(self):
        return {"version": self.version, "code": self.code, "n": self.n, "alloc_digest_hex": self.alloc_digest}

    def to_bytes(self):
        head = json.dumps(self.header()).encode("utf-8") + b"\n"
        return MAGIC + head + np.packbits(self.payload, bitorder="little").tobytes()

    @classmethod
    def from_bytes(cls, blob):
        if not blob.startswith(MAGIC):
            raise ValueError("not a helper-data file (bad magic)")
        end = blob.find(b"\n", len(MAGIC))
        if end < 0:
            raise ValueError("helper-data header is not terminated")
        try:
            head = json.loads(blob[len(MAGIC) : end].decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ValueError(f"malformed helper-data header: {exc}") from None
        missing = {"version", "code", "n", "alloc_digest_hex"} - set(head)
        if missing:
            raise ValueError(f"helper-data header lacks {sorted(missing)}")
        if head["version"] != FORMAT_VERSION:
            raise ValueError(f"unsupported helper-data version {head['version']}")
        n = int(head["n"])
        body = np.frombuffer(blob[end + 1 :], dtype=np.uint8)
        if body.size != -(-n // 8):
            raise ValueError(f"payload has {body.size} bytes, expected {-(-n // 8)}")
        bits = np.unpackbits(body, bitorder="little")
        if np.any(bits[n:]):
            raise ValueError("nonzero padding after the payload bits")
        return cls(head["code"], n, bits[:n], head["alloc_digest_hex"], head["version"])

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def _key_bits(code, key_bits):
    key_bits = min(DEFAULT_KEY_BITS, code.k) if key_bits is None else key_bits
    if not 1 <= key_bits <= code.k:
        raise ValueError(f"key length must be in 1..{code.k} for {code.name}")
    return key_bits


def enroll(key, x, code, alloc_digest=""):
    """Helper data for ``key`` bound to the identifier bits ``x``.

    The key is zero-padded at the tail to the code dimension.
    """
    code = _code(code)
    key = as_bits(key, what="key")
    if key.size > code.k:
        raise ValueError(f"key has {key.size} bits but {code.name} carries {code.k}")
    x = as_bits(x, code.n, "identifier bits")
    padded = np.concatenate([key, np.zeros(code.k - key.size, dtype=np.uint8)])
    return HelperData(code.name, code.n, code.encode(padded) ^ x, alloc_digest)


def reconstruct(helper, y, code, alloc_digest=None, key_bits=None):
    """Recover the key from helper data and noisy bits ``y``.

    Raises :class:`HelperMismatch` before decoding if the helper data names
    another code, length or allocation, and :class:`DecodingFailure` if the
    decoder gives up or the padding bits come back nonzero.
    """
    code = _code(code)
    if helper.code != code.name or helper.n != code.n:
        raise HelperMismatch(f"helper data is for {helper.code} (n={helper.n}), not {code.name} (n={code.n})")
    if alloc_digest is not None and alloc_digest != helper.alloc_digest:
        raise HelperMismatch("allocation digest differs from the one used at enrollment")
    key_bits = _key_bits(code, key_bits)
    y = as_bits(y, code.n, "identifier bits")
    out = code.decode(helper.payload ^ y)
    if not out.ok:
        raise DecodingFailure(f"{code.name} decoder: {out.status}")
    msg = np.asarray(out.message, dtype=np.uint8)
    if np.any(msg[key_bits:]):
        raise DecodingFailure("nonzero key padding after decoding")
    return msg[:key_bits]


def _to_int(bits):
    return int(np.dot(np.asarray(bits, dtype=np.int64), 1 << np.arange(len(bits), dtype=np.int64)))


@dataclass(frozen=True)
class SecrecyReport:
    code: str
    n_keys: int
    max_uniform_deviation: float
    max_key_difference: float
    mutual_information: float

    @property
    def perfect(self):
        return self.max_key_difference <= 1e-15 and self.mutual_information <= 1e-12

    @property
    def uniform(self):
        return self.max_uniform_deviation <= 1e-15


def secrecy_check_exhaustive(code, x_pmf=None, key_bits=None):
    """Exact distribution of M given each key, by enumeration over all x.

    ``x_pmf`` is a length-2^n probability vector indexed by the integer whose
    bit i is position i of x (uniform by default). Reports the worst
    deviation from uniformity, the worst difference between keys and
    I(S;M) for a uniform key.
    """
    code = _code(code)
    n = code.n
    key_bits = code.k if key_bits is None else key_bits
    if n > 20 or key_bits + n > 24:
        raise ValueError(f"{code.name} is too large for exhaustive enumeration")
    size = 1 << n
    pmf = np.full(size, 1.0 / size) if x_pmf is None else np.asarray(x_pmf, dtype=float)
    if pmf.shape != (size,) or np.any(pmf < 0) or abs(pmf.sum() - 1) > 1e-12:
        raise ValueError(f"x_pmf must be a probability vector of length {size}")
    idx = np.arange(size)
    dists = []
    for key in product((0, 1), repeat=key_bits):
        padded = np.concatenate([key, np.zeros(code.k - key_bits, dtype=np.uint8)]).astype(np.uint8)
        c = _to_int(code.encode(padded))
        dists.append(pmf[idx ^ c])
    dists = np.array(dists)
    marginal = dists.mean(axis=0)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(dists > 0, dists * np.log2(dists / marginal), 0.0)
    mi = float(terms.sum() / len(dists))
    return SecrecyReport(
        code.name,
        len(dists),
        float(np.abs(dists - 1.0 / size).max()),
        float(np.abs(dists - dists[0]).max()),
        max(mi, 0.0),
    )


def secrecy_check_sampled(code, key_a, key_b, samples, seed):
    """Largest per-bit total-variation distance between M|S=a and M|S=b over sampled uniform x."""
    code = _code(code)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))
    ca = code.encode(np.concatenate([key_a, np.zeros(code.k - len(key_a), np.uint8)]).astype(np.uint8))
    cb = code.encode(np.concatenate([key_b, np.zeros(code.k - len(key_b), np.uint8)]).astype(np.uint8))
    xa = rng.integers(0, 2, size=(samples, code.n), dtype=np.uint8)
    xb = rng.integers(0, 2, size=(samples, code.n), dtype=np.uint8)
    pa = (xa ^ ca).mean(axis=0)
    pb = (xb ^ cb).mean(axis=0)
    return float(np.abs(pa - pb).max())
