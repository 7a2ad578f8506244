"""Narrow-sense primitive binary BCH codes with bounded-distance decoding."""

import numpy as np

from .base import Code, DecodeOutcome, as_bits
from .bm import berlekamp_massey
from .gf import GF2m, cyclotomic_coset, minimal_polynomial


def _bits_to_int(bits):
    return int("".join("1" if b else "0" for b in bits[::-1]) or "0", 2)


def _int_to_bits(value, length):
    return np.array([(value >> i) & 1 for i in range(length)], dtype=np.uint8)


class BCH(Code):
    """Binary BCH code of length 2^m - 1 with designed distance 2t + 1.

    Codewords are coefficient vectors of c(x) = sum c_i x^i. Encoding is
    systematic: parity in positions 0 .. n-k-1, message in n-k .. n-1.
    """

    def __init__(self, m, t, name=None):
        self.field = GF2m(m)
        self.n = self.field.order
        self.d = 2 * t + 1

        gen = 1
        seen = set()
        for s in range(1, 2 * t + 1):
            leader = min(cyclotomic_coset(s, self.n))
            if leader in seen:
                continue
            seen.add(leader)
            gen = _clmul(gen, _poly_to_int(minimal_polynomial(self.field, leader)))
        self.generator = gen
        self.n_parity = gen.bit_length() - 1
        self.k = self.n - self.n_parity
        self.name = name or f"bch{self.n}_{self.k}"

        exps = np.outer(np.arange(1, 2 * t + 1), np.arange(self.n)) % self.n
        self._syndrome_table = self.field.exp[exps]

    def generator_bits(self):
        return _int_to_bits(self.generator, self.n_parity + 1)

    def encode(self, message):
        message = as_bits(message, self.k, "message")
        shifted = _bits_to_int(message) << self.n_parity
        parity = _clmod(shifted, self.generator)
        return _int_to_bits(shifted | parity, self.n)

    def syndromes(self, received):
        received = as_bits(received, self.n, "received word")
        idx = np.flatnonzero(received)
        if idx.size == 0:
            return [0] * (2 * self.t)
        return np.bitwise_xor.reduce(self._syndrome_table[:, idx], axis=1).tolist()

    def decode(self, received):
        received = as_bits(received, self.n, "received word")
        synd = self.syndromes(received)
        if not any(synd):
            return DecodeOutcome("decoded", received[self.n_parity:].copy(), 0)
        locator, n_err = berlekamp_massey(self.field, synd)
        if n_err > self.t or len(locator) - 1 != n_err:
            return DecodeOutcome.failure()
        # Chien search: position i is in error iff Lambda(alpha^-i) = 0
        values = self.field.poly_eval_many(locator, -np.arange(self.n))
        positions = np.flatnonzero(values == 0)
        if positions.size != n_err:
            return DecodeOutcome.failure()
        corrected = received.copy()
        corrected[positions] ^= 1
        return DecodeOutcome("decoded", corrected[self.n_parity:], int(n_err))


def _poly_to_int(coeffs):
    return sum(int(c) << i for i, c in enumerate(coeffs))


def _clmul(a, b):
    out = 0
    while b:
        if b & 1:
            out ^= a
        a <<= 1
        b >>= 1
    return out


def _clmod(a, g):
    dg = g.bit_length() - 1
    while a.bit_length() - 1 >= dg:
        a ^= g << (a.bit_length() - 1 - dg)
    return a
