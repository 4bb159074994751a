"""Exhaustive Harman-step scan by direct interval intersection.

For gamma = sqrt2 (rounded to the 2^-96 grid) and psi = 1/(2q) (rounded down
onto the grid), computes sup | |A_q cap A_q'| - 4 psi psi' | / (gcd min(psi/q, psi'/q'))
over 1 <= q' < q <= Q_MAX, skipping pairs with a zero psi value.
"""
import math
import sys
from fractions import Fraction

from common import S, grid96, psi_c_over_q


def intersection_scaled(q, q2, G, P, P2):
    """|A_q cap A_q2| * S * q * q2, by walking the intervals of both sets."""
    top = S * q * q2
    total = 0
    for n in range(-1, q + 1):
        lo = (n * S + G - P) * q2
        hi = (n * S + G + P) * q2
        lo = max(lo, 0)
        hi = min(hi, top)
        if lo >= hi:
            continue
        # intervals of A_q2 scaled by q: ((m S + G - P2) q, (m S + G + P2) q)
        m = (lo // q - G - P2) // S - 1
        while True:
            lo2 = (m * S + G - P2) * q
            if lo2 >= hi:
                break
            hi2 = (m * S + G + P2) * q
            a = max(lo, lo2)
            b = min(hi, hi2)
            if b > a:
                total += b - a
            m += 1
    return total


def measure(q, q2, G, P, P2):
    return Fraction(intersection_scaled(q, q2, G, P, P2), S * q * q2)


def main():
    q_max = int(sys.argv[1]) if len(sys.argv) > 1 else 500
    G = grid96("sqrt2")
    psi = psi_c_over_q(Fraction(1, 2))
    best, arg = Fraction(0), None
    for q in range(2, q_max + 1):
        P = psi(q)
        if P == 0:
            continue
        for q2 in range(1, q):
            P2 = psi(q2)
            if P2 == 0:
                continue
            T = intersection_scaled(q, q2, G, P, P2)
            g = math.gcd(q, q2)
            # |T/(q q2 S) - 4 P P2 / S^2| / (g min(P/q, P2/q2) / S)
            diff = abs(Fraction(T, q * q2) - Fraction(4 * P * P2, S))
            r = diff / (g * min(Fraction(P, q), Fraction(P2, q2)))
            if r > best:
                best, arg = r, (q2, q)
    print(f"harman_sup_{q_max} = {best.numerator}/{best.denominator}")
    print(f"harman_argmax_{q_max} = {arg[0]},{arg[1]}")
    print(f"harman_sup_{q_max}_approx = {float(best)!r}")
    m35 = measure(5, 3, G, psi(5), psi(3))
    print(f"pair_3_5_measure = {m35.numerator}/{m35.denominator}")


if __name__ == "__main__":
    main()
