"""Codecs used for key binding: repetition, RM(1,5), shortened RS, BCH, concatenations.

Registry names: ``rep3``, ``rm32_6``, ``rs28_22``, ``bch255_131``,
``rm32_6+rs28_22`` and ``rep3+ebch256_132`` (analysis only).
"""

from functools import lru_cache

from .base import AnalysisOnly, Code, DecodeOutcome, NoCodecError, as_bits
from .bch import BCH
from .concat import Concatenated
from .gf import GF2m
from .rm import ReedMuller1, Repetition, fwht
from .rs import ReedSolomon, bits_to_symbols, symbols_to_bits

__all__ = [
    "AnalysisOnly", "BCH", "Code", "Concatenated", "DecodeOutcome", "GF2m", "NoCodecError",
    "ReedMuller1", "ReedSolomon", "Repetition", "CODE_NAMES", "get_code", "encode",
    "decode_bmdd", "rm_decode_mld", "rs_decode_ee", "concat_encode", "concat_decode", "fwht",
    "as_bits", "bits_to_symbols", "symbols_to_bits",
]

CODE_NAMES = ("rep3", "rm32_6", "rs28_22", "bch255_131", "rm32_6+rs28_22", "rep3+ebch256_132")


@lru_cache(maxsize=None)
def get_code(name):
    """Look up a code by registry name (codecs are immutable and cached)."""
    name = name.removesuffix("(analysis-only)")
    if name == "rep3":
        return Repetition(3)
    if name == "rm32_6":
        return ReedMuller1(5)
    if name == "rs28_22":
        return ReedSolomon(28, 22, 6)
    if name == "bch255_131":
        return BCH(8, 18)
    if name == "ebch256_132":
        return AnalysisOnly("ebch256_132", 256, 132, 36)
    if name == "rm32_6+rs28_22":
        return Concatenated(get_code("rs28_22"), get_code("rm32_6"))
    if name == "rep3+ebch256_132":
        return Concatenated(get_code("ebch256_132"), get_code("rep3"))
    raise KeyError(f"unknown code {name!r}; known: {', '.join(CODE_NAMES)}")


def _resolve(code):
    return get_code(code) if isinstance(code, str) else code


def encode(code, message):
    return _resolve(code).encode(message)


def decode_bmdd(code, received):
    return _resolve(code).decode(received)


def rm_decode_mld(received):
    """Minimum-distance RM(1,5) decoding; ties between codewords give an erasure."""
    return get_code("rm32_6").decode(received)


def rs_decode_ee(received, erasures=None):
    """Errors-and-erasures decoding of the shortened RS(28,22) code over GF(64)."""
    return get_code("rs28_22").decode_symbols(received, erasures)


def concat_encode(outer, inner, message):
    return Concatenated(_resolve(outer), _resolve(inner)).encode(message)


def concat_decode(outer, inner, received):
    return Concatenated(_resolve(outer), _resolve(inner)).decode(received)
