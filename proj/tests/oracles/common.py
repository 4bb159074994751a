"""Shared helpers for the oracle scripts.

Everything here is computed from scratch in exact integer arithmetic or at
high precision with mpmath; nothing is read back from the C++ library.
"""
import math
from fractions import Fraction

import gmpy2
import mpmath

mpmath.mp.prec = 400
S = 1 << 96  # psi and gamma_hat grid
HALF = 1 << 95


def frac_value(name):
    if name == "sqrt2":
        return mpmath.sqrt(2) - 1
    if name == "golden":
        return (mpmath.sqrt(5) - 1) / 2
    if name == "e":
        return mpmath.e - 2
    raise ValueError(name)


def grid96(name):
    """Nearest multiple of 2^-96 to frac(gamma), as the numerator G."""
    g = int(mpmath.floor(frac_value(name) * S + mpmath.mpf(1) / 2))
    return 0 if g == S else g


def fixed(name, bits):
    """floor(frac(gamma) * 2^bits)."""
    return int(mpmath.floor(frac_value(name) * (mpmath.mpf(2) ** bits)))


def psi_c_over_q(c):
    c = Fraction(c)

    def p(q):
        v = (c.numerator * S) // (c.denominator * q)
        return v if v < HALF else 0

    # q0 is the first q with psi(q) < 1/2; below it psi is zero.
    q0 = 1
    while (c.numerator * S) // (c.denominator * q0) >= HALF:
        q0 += 1
    return lambda q: 0 if q < q0 else (c.numerator * S) // (c.denominator * q)


def psi_loglog2(c=Fraction(1)):
    """floor(2^96 c / (q (log2 log2 q)^2)) for q >= 5, zero below."""
    c = Fraction(c)
    cache = {}

    def raw(q):
        if q < 5:
            return 0
        if q not in cache and q & (q - 1) == 0 and (q.bit_length() - 1) & (q.bit_length() - 2) == 0:
            k = q.bit_length() - 1
            m = k.bit_length() - 1
            cache[q] = (c.numerator * S) // (c.denominator * q * m * m)
        if q not in cache:
            ll = mpmath.log(mpmath.log(q, 2), 2)
            v = mpmath.mpf(c.numerator) * S / (c.denominator * q * ll * ll)
            f = int(mpmath.floor(v))
            if abs(v - f) < mpmath.mpf(2) ** -200 or abs(v - f - 1) < mpmath.mpf(2) ** -200:
                raise RuntimeError(f"psi grid value too close to an integer at q={q}")
            cache[q] = f
        return cache[q]

    q0 = 5
    while raw(q0) >= HALF:
        q0 += 1
    return lambda q: 0 if q < q0 else raw(q)


def F_exact(q):
    """F(q) = sum over r | q of log2(r) / r at mpmath precision."""
    s = mpmath.mpf(0)
    for r in divisors(q):
        if r > 1:
            s += mpmath.log(r, 2) / r
    return s


def divisors(q):
    small, large = [], []
    d = 1
    while d * d <= q:
        if q % d == 0:
            small.append(d)
            if d * d != q:
                large.append(q // d)
        d += 1
    return small + large[::-1]


def write_values(path, items):
    with open(path, "w") as f:
        for k, v in items:
            f.write(f"{k} = {v}\n")
