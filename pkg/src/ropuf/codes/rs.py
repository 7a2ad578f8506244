"""Shortened Reed-Solomon codes with errors-and-erasures decoding."""

import numpy as np

from .base import Code, DecodeOutcome
from .bm import berlekamp_massey
from .gf import GF2m


class ReedSolomon(Code):
    """RS(n, k) over GF(2^m), obtained by shortening RS(2^m - 1, .).

    Generator g(x) = prod_{j=1}^{n-k} (x - alpha^j). Positions n .. 2^m - 2
    of the mother code (the highest-degree information symbols) are fixed
    to zero and never transmitted. Encoding is systematic with parity in
    positions 0 .. n-k-1.
    """

    def __init__(self, n, k, m, name=None):
        self.field = GF2m(m)
        if n > self.field.order:
            raise ValueError(f"length {n} exceeds 2^{m} - 1")
        self.symbol_bits = m
        self._n_sym, self._k_sym = n, k
        self.n, self.k = n * m, k * m
        self.d = n - k + 1
        self.name = name or f"rs{n}_{k}"
        self.n_check = n - k
        gen = [1]
        for j in range(1, self.n_check + 1):
            gen = self.field.poly_mul(gen, [self.field.alpha(j), 1])
        self.generator = gen

    @property
    def n_symbols(self):
        return self._n_sym

    @property
    def k_symbols(self):
        return self._k_sym

    def _check_symbols(self, symbols, length, what):
        symbols = np.asarray(symbols, dtype=np.int64)
        if symbols.shape != (length,):
            raise ValueError(f"{what} must have {length} symbols, got shape {symbols.shape}")
        if symbols.size and (symbols.min() < 0 or symbols.max() >= self.field.size):
            raise ValueError(f"{what} contains values outside GF(2^{self.symbol_bits})")
        return symbols

    def encode_symbols(self, symbols):
        msg = self._check_symbols(symbols, self._k_sym, "message").tolist()
        f = self.field
        # remainder of x^(n-k) m(x) divided by the monic generator
        rem = [0] * self.n_check
        for coef in reversed(msg):
            feedback = coef ^ rem[-1]
            rem = [0] + rem[:-1]
            if feedback:
                for i in range(self.n_check):
                    rem[i] ^= f.mul(feedback, self.generator[i])
        return np.array(rem + msg, dtype=np.int64)

    def syndromes(self, received):
        return [self.field.poly_eval(received, self.field.alpha(j)) for j in range(1, self.n_check + 1)]

    def decode_symbols(self, received, erasures=None):
        """Errors-and-erasures bounded-distance decoding.

        Succeeds whenever 2*errors + erasures < d. Beyond that the result is
        a failure or, rarely, a miscorrection.
        """
        f = self.field
        received = self._check_symbols(received, self._n_sym, "received word")
        if erasures is None:
            erasures = np.zeros(self._n_sym, dtype=bool)
        erasures = np.asarray(erasures, dtype=bool)
        if erasures.shape != (self._n_sym,):
            raise ValueError("erasure flags must match the received length")
        era_pos = np.flatnonzero(erasures).tolist()
        n_era = len(era_pos)
        if n_era >= self.d:
            return DecodeOutcome.failure()

        word = np.where(erasures, 0, received).tolist()
        synd = self.syndromes(word)
        if not any(synd):
            return DecodeOutcome("decoded", np.array(word[self.n_check:], dtype=np.int64), 0)

        gamma = [1]
        for p in era_pos:
            gamma = f.poly_mul(gamma, [1, f.alpha(p)])
        # Forney syndromes: coefficients n_era .. 2t-1 of Gamma(x) S(x)
        modified = f.poly_mul(gamma, synd)[: self.n_check]
        sigma, n_err = berlekamp_massey(f, modified[n_era:])
        if 2 * n_err + n_era >= self.d or len(sigma) - 1 != n_err:
            return DecodeOutcome.failure()

        locator = f.poly_mul(sigma, gamma)
        positions = np.arange(self._n_sym)
        roots = np.flatnonzero(f.poly_eval_many(locator, -positions) == 0)
        if roots.size != len(locator) - 1:
            return DecodeOutcome.failure()

        omega = f.poly_mul(synd, locator)[: self.n_check]
        deriv = [c if i % 2 == 1 else 0 for i, c in enumerate(locator)][1:]
        for pos in roots.tolist():
            x_inv = f.alpha(-pos)
            denom = f.poly_eval(deriv, x_inv)
            if denom == 0:
                return DecodeOutcome.failure()
            word[pos] ^= f.div(f.poly_eval(omega, x_inv), denom)
        if any(self.syndromes(word)):
            return DecodeOutcome.failure()
        changed = sum(1 for p in roots.tolist() if not erasures[p] and word[p] != received[p])
        return DecodeOutcome("decoded", np.array(word[self.n_check:], dtype=np.int64), changed)

    # bit-level view: symbols packed LSB first

    def encode(self, message):
        symbols = bits_to_symbols(message, self.symbol_bits, self._k_sym)
        return symbols_to_bits(self.encode_symbols(symbols), self.symbol_bits)

    def decode(self, received):
        symbols = bits_to_symbols(received, self.symbol_bits, self._n_sym)
        out = self.decode_symbols(symbols)
        if not out.ok:
            return out
        return DecodeOutcome(out.status, symbols_to_bits(out.message, self.symbol_bits), out.corrected)


def symbols_to_bits(symbols, bits):
    symbols = np.asarray(symbols, dtype=np.int64)
    return ((symbols[:, None] >> np.arange(bits)) & 1).astype(np.uint8).reshape(-1)


def bits_to_symbols(bitseq, bits, count):
    arr = np.asarray(bitseq, dtype=np.int64)
    if arr.shape != (bits * count,):
        raise ValueError(f"expected {bits * count} bits, got shape {arr.shape}")
    return (arr.reshape(count, bits) << np.arange(bits)).sum(axis=1)
