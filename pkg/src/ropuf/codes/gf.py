"""Binary extension fields GF(2^m) with log/antilog tables."""

import numpy as np

PRIMITIVE_POLYNOMIALS = {
    6: 0b1000011,  # x^6 + x + 1
    8: 0b100011101,  # x^8 + x^4 + x^3 + x^2 + 1
}


class GF2m:
    """Arithmetic in GF(2^m), polynomial basis, elements stored as ints.

    Scalar methods take and return Python ints; the ``*_vec`` variants
    work elementwise on integer numpy arrays.
    """

    def __init__(self, m, poly=None):
        if poly is None:
            poly = PRIMITIVE_POLYNOMIALS[m]
        self.m = m
        self.poly = poly
        self.size = 1 << m
        self.order = self.size - 1

        exp = np.zeros(2 * self.order, dtype=np.int64)
        log = np.full(self.size, -1, dtype=np.int64)
        x = 1
        for i in range(self.order):
            exp[i] = x
            if log[x] != -1:
                raise ValueError(f"polynomial {poly:#x} is not primitive for m={m}")
            log[x] = i
            x <<= 1
            if x & self.size:
                x ^= poly
        exp[self.order:] = exp[: self.order]
        self.exp = exp
        self.log = log
        self._exp_list = exp.tolist()
        self._log_list = log.tolist()

    def __repr__(self):
        return f"GF2m(m={self.m}, poly={self.poly:#x})"

    def alpha(self, i):
        """alpha**i for any integer i."""
        return self._exp_list[i % self.order]

    def mul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp_list[self._log_list[a] + self._log_list[b]]

    def div(self, a, b):
        if b == 0:
            raise ZeroDivisionError("division by zero in GF(2^m)")
        if a == 0:
            return 0
        return self._exp_list[(self._log_list[a] - self._log_list[b]) % self.order]

    def inv(self, a):
        return self.div(1, a)

    def pow(self, a, e):
        if a == 0:
            return 0 if e > 0 else 1
        return self._exp_list[(self._log_list[a] * e) % self.order]

    def mul_vec(self, a, b):
        a = np.asarray(a, dtype=np.int64)
        b = np.asarray(b, dtype=np.int64)
        out = self.exp[(self.log[a] + self.log[b]) % self.order]
        return np.where((a == 0) | (b == 0), 0, out)

    # polynomials are lists of coefficients, lowest degree first

    def poly_eval(self, p, x):
        """Horner evaluation of p at x."""
        y = 0
        for c in reversed(p):
            y = self.mul(y, x) ^ c
        return y

    def poly_mul(self, p, q):
        out = [0] * (len(p) + len(q) - 1)
        for i, a in enumerate(p):
            if a == 0:
                continue
            for j, b in enumerate(q):
                out[i + j] ^= self.mul(a, b)
        return out

    def poly_eval_many(self, p, log_points):
        """Evaluate p at alpha**l for every l in ``log_points`` (vectorized Chien search)."""
        log_points = np.asarray(log_points, dtype=np.int64)
        acc = np.zeros(log_points.shape, dtype=np.int64)
        for j, c in enumerate(p):
            if c == 0:
                continue
            acc ^= self.exp[(self._log_list[c] + j * log_points) % self.order]
        return acc


def cyclotomic_coset(s, n):
    """The 2-cyclotomic coset of s modulo n."""
    coset = []
    x = s % n
    while x not in coset:
        coset.append(x)
        x = (2 * x) % n
    return coset


def minimal_polynomial(field, s):
    """Minimal polynomial of alpha**s over GF(2), as a list of 0/1 coefficients."""
    poly = [1]
    for e in cyclotomic_coset(s, field.order):
        poly = field.poly_mul(poly, [field.alpha(e), 1])
    if any(c not in (0, 1) for c in poly):
        raise ArithmeticError("minimal polynomial has non-binary coefficients")
    return poly
