"""First-order Reed-Muller codes decoded by fast Hadamard correlation."""

import numpy as np

from .base import Code, DecodeOutcome, as_bits


def fwht(x, axis=-1):
    """Unnormalized fast Walsh-Hadamard transform (natural/Sylvester order)."""
    x = np.moveaxis(np.array(x, copy=True), axis, -1)
    n = x.shape[-1]
    if n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")
    h = 1
    while h < n:
        y = x.reshape(x.shape[:-1] + (n // (2 * h), 2, h))
        a = y[..., 0, :].copy()
        y[..., 0, :] += y[..., 1, :]
        y[..., 1, :] = a - y[..., 1, :]
        h *= 2
    return np.moveaxis(x, -1, axis)


class ReedMuller1(Code):
    """RM(1, m): length 2^m, dimension m + 1, minimum distance 2^(m-1).

    Message bit 0 is the constant term; bit j (1..m) multiplies the j-th
    coordinate function, i.e. bit j-1 of the position index.
    """

    def __init__(self, m=5, name=None):
        self.m = m
        self.n = 1 << m
        self.k = m + 1
        self.d = 1 << (m - 1)
        self.name = name or f"rm{self.n}_{self.k}"
        pos = np.arange(self.n)
        self.generator = np.vstack(
            [np.ones(self.n, dtype=np.uint8)] + [((pos >> j) & 1).astype(np.uint8) for j in range(m)]
        )
        self._weights = 1 << np.arange(m)

    def encode_batch(self, messages):
        messages = np.asarray(messages, dtype=np.uint8)
        return ((messages.astype(np.int64) @ self.generator) & 1).astype(np.uint8)

    def encode(self, message):
        return self.encode_batch(as_bits(message, self.k, "message")[None, :])[0]

    def decode_batch(self, received):
        """Minimum-distance decoding of a (B, n) batch.

        Returns ``(messages, erased)``; rows with two or more codewords at
        the minimum distance are flagged in ``erased`` and carry zeros.
        """
        received = np.asarray(received)
        signs = 1 - 2 * received.astype(np.int32)
        corr = fwht(signs, axis=-1)
        mag = np.abs(corr)
        best = mag.max(axis=-1)
        erased = (mag == best[:, None]).sum(axis=-1) > 1
        a = mag.argmax(axis=-1)
        negative = np.take_along_axis(corr, a[:, None], axis=-1)[:, 0] < 0
        messages = np.zeros((received.shape[0], self.k), dtype=np.uint8)
        messages[:, 0] = negative
        messages[:, 1:] = (a[:, None] >> np.arange(self.m)) & 1
        messages[erased] = 0
        return messages, erased

    def decode(self, received):
        received = as_bits(received, self.n, "received word")
        messages, erased = self.decode_batch(received[None, :])
        if erased[0]:
            return DecodeOutcome.erasure()
        msg = messages[0]
        dist = int(np.count_nonzero(self.encode(msg) ^ received))
        return DecodeOutcome("decoded", msg, dist)


class Repetition(Code):
    """Repetition code; decoding is a majority vote (ML for odd n on a BSC)."""

    def __init__(self, n=3, name=None):
        self.n, self.k, self.d = n, 1, n
        self.name = name or f"rep{n}"

    def encode(self, message):
        message = as_bits(message, 1, "message")
        return np.repeat(message, self.n)

    def decode(self, received):
        received = as_bits(received, self.n, "received word")
        ones = int(received.sum())
        if 2 * ones == self.n:
            return DecodeOutcome.failure()
        bit = int(2 * ones > self.n)
        return DecodeOutcome("decoded", np.array([bit], dtype=np.uint8), ones if bit == 0 else self.n - ones)
