"""GF(2) linear-algebra views of a binary-linear codec."""

from functools import lru_cache

import numpy as np


def gf2_rref(a):
    """Reduced row echelon form over GF(2); returns (matrix, pivot columns)."""
    m = np.array(a, dtype=np.uint8) & 1
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        hit = np.flatnonzero(m[r:, c])
        if hit.size == 0:
            continue
        p = r + hit[0]
        m[[r, p]] = m[[p, r]]
        others = np.flatnonzero(m[:, c])
        others = others[others != r]
        m[others] ^= m[r]
        pivots.append(c)
        r += 1
    return m[:r], pivots


def generator_matrix(code):
    """k x n matrix whose row i is the encoding of the i-th unit message."""
    return np.array([code.encode(row) for row in np.eye(code.k, dtype=np.uint8)])


@lru_cache(maxsize=None)
def _parity(code):
    g, pivots = gf2_rref(generator_matrix(code))
    free = [c for c in range(code.n) if c not in set(pivots)]
    h = np.zeros((len(free), code.n), dtype=np.uint8)
    for i, f in enumerate(free):
        h[i, f] = 1
        h[i, pivots] = g[:, f]
    h.setflags(write=False)
    return h


def parity_check_matrix(code):
    """(n - k) x n matrix H with H c = 0 for every codeword c."""
    return _parity(code)


def is_codeword(code, word):
    word = np.asarray(word, dtype=np.int64)
    return not np.any((parity_check_matrix(code).astype(np.int64) @ word) & 1)
