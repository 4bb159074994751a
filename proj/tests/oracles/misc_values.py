"""Smaller frozen values: arithmetic, constants, rotation and divergence examples."""
import math
from fractions import Fraction

import mpmath

from common import F_exact, fixed, frac_value


def f_tail_count(Q, threshold):
    # F(q) via a divisor sieve in float64, then certified against mpmath near the threshold
    F = [0.0] * (Q + 1)
    for r in range(2, Q + 1):
        t = math.log2(r) / r
        for m in range(r, Q + 1, r):
            F[m] += t
    count = 0
    for q in range(1, Q + 1):
        if abs(F[q] - threshold) < 1e-9:
            count += F_exact(q) > threshold
        else:
            count += F[q] > threshold
    return count


def brute_discrepancy(name, N):
    """sup over intervals [a, b) of |count/N - (b - a)| by critical endpoints."""
    pts = sorted(Fraction((q * fixed(name, 200)) % (1 << 200), 1 << 200) for q in range(1, N + 1))
    cand = [Fraction(0)] + pts + [Fraction(1)]
    best = Fraction(0)
    for i, a in enumerate(cand):
        for b in cand[i:]:
            inside_open = sum(1 for x in pts if a < x < b)
            inside_closed = sum(1 for x in pts if a <= x <= b)
            L = b - a
            best = max(best, abs(Fraction(inside_closed, N) - L), abs(Fraction(inside_open, N) - L))
    return best


def etk(name, N, H):
    s = mpmath.mpf(0)
    for h in range(1, H + 1):
        x = frac_value(name) * h
        d = abs(x - mpmath.nint(x))
        s += 1 / (h * d)
    return 3 / mpmath.mpf(H) + 12 * s / N


def sigma(name, Q):
    best, w = None, None
    for q in range(2, Q + 1):
        x = frac_value(name) * q
        d = abs(x - mpmath.nint(x))
        v = mpmath.log(1 / d) / mpmath.log(q)
        if best is None or v > best:
            best, w = v, q
    return best, w


def wex_window(Q):
    upper = int(mpmath.floor(mpmath.mpf(Q) ** (mpmath.log(Q, 2) ** (mpmath.mpf(1) / 8))))
    s = math.fsum(1.0 / (q * math.log2(q)) for q in range(Q, upper + 1))
    return upper, s


def main():
    out = []
    out.append(("F_6", mpmath.nstr(F_exact(6), 25)))
    out.append(("F_8", mpmath.nstr(F_exact(8), 25)))
    out.append(("f_tail_1e4_threshold_4", f_tail_count(10 ** 4, 4.0)))
    mpmath.mp.dps = 40
    out.append(("zeta_3", mpmath.nstr(mpmath.zeta(3), 25)))
    out.append(("neg_zeta_prime_1.5", mpmath.nstr(-mpmath.zeta(1.5, derivative=1), 25)))
    for K in (2, 3, 4):
        c = -mpmath.zeta(1 + mpmath.mpf(1) / K, derivative=1) / K ** 2
        out.append((f"C_log2_{K}", mpmath.nstr(c / mpmath.log(2), 25)))
    d10 = brute_discrepancy("sqrt2", 10)
    out.append(("discrepancy_sqrt2_10", f"{d10.numerator}/{d10.denominator}"))
    out.append(("discrepancy_sqrt2_10_approx", mpmath.nstr(mpmath.mpf(d10.numerator) / d10.denominator, 25)))
    mpmath.mp.prec = 400
    out.append(("etk_sqrt2_100_5", mpmath.nstr(etk("sqrt2", 100, 5), 25)))
    out.append(("etk_golden_10000_50", mpmath.nstr(etk("golden", 10 ** 4, 50), 25)))
    s, w = sigma("golden", 100)
    out.append(("sigma_golden_100", mpmath.nstr(s, 25)))
    out.append(("sigma_golden_100_witness", w))
    s, w = sigma("sqrt2", 2)
    out.append(("sigma_sqrt2_2", mpmath.nstr(s, 25)))
    x = mpmath.e
    quotients = []
    for _ in range(12):
        a = int(mpmath.floor(x))
        quotients.append(a)
        x = 1 / (x - a)
    out.append(("cf_e_12", ",".join(map(str, quotients))))
    upper, ws = wex_window(1 << 16)
    out.append(("wex_upper_65536", upper))
    out.append(("wex_sum_65536", repr(ws)))
    for k, v in out:
        print(f"{k} = {v}")


if __name__ == "__main__":
    main()
