"""Two-level concatenation: outer symbols carried by inner codewords."""

import numpy as np

from .base import Code, DecodeOutcome, NoCodecError, as_bits
from .rs import bits_to_symbols, symbols_to_bits


class Concatenated(Code):
    """Outer code over symbols of ``inner.k`` bits, each sent through the inner code.

    An inner erasure (or failure) becomes an erasure flag for the outer
    decoder. The declared distance is the product bound d_out * d_in.
    """

    def __init__(self, outer, inner, name=None):
        if outer.symbol_bits != inner.k:
            raise ValueError(
                f"outer symbols have {outer.symbol_bits} bits but the inner code carries {inner.k}"
            )
        self.outer, self.inner = outer, inner
        self.n = outer.n_symbols * inner.n
        self.k = outer.k_symbols * outer.symbol_bits
        self.d = outer.d * inner.d
        self.name = name or f"{inner.name}+{outer.name}"
        self.constructive = outer.constructive and inner.constructive

    def _require_codec(self):
        if not self.constructive:
            raise NoCodecError(f"{self.name}: no constructive codec")

    def encode(self, message):
        self._require_codec()
        message = as_bits(message, self.k, "message")
        bits = self.outer.symbol_bits
        symbols = bits_to_symbols(message, bits, self.outer.k_symbols) if bits > 1 else message
        outer_word = self.outer.encode_symbols(symbols)
        inner_msgs = symbols_to_bits(outer_word, bits).reshape(-1, bits)
        return np.concatenate([self.inner.encode(m) for m in inner_msgs])

    def decode(self, received):
        self._require_codec()
        received = as_bits(received, self.n, "received word")
        blocks = received.reshape(self.outer.n_symbols, self.inner.n)
        bits = self.outer.symbol_bits
        inner_msgs = np.zeros((self.outer.n_symbols, bits), dtype=np.uint8)
        erasures = np.zeros(self.outer.n_symbols, dtype=bool)
        for i, block in enumerate(blocks):
            out = self.inner.decode(block)
            if out.ok:
                inner_msgs[i] = out.message
            else:
                erasures[i] = True
        if bits > 1:
            symbols = (inner_msgs.astype(np.int64) << np.arange(bits)).sum(axis=1)
        else:
            symbols = inner_msgs[:, 0]
        out = self.outer.decode_symbols(symbols, erasures)
        if not out.ok:
            return out
        msg = symbols_to_bits(out.message, bits) if bits > 1 else np.asarray(out.message, dtype=np.uint8)
        return DecodeOutcome("decoded", msg, out.corrected)
