"""Chung-Erdos bound for the A_q family by direct interval intersection.

gamma = sqrt2 on the 2^-96 grid, psi = 1/(2q) rounded down onto the grid.
Prints (sum |A_q|)^2 / sum_{s,t} |A_s cap A_t| at Q = 512 and Q = Q_MAX.
"""
import math
import sys
from fractions import Fraction

from common import S, grid96, psi_c_over_q
from harman_c0 import intersection_scaled


def main():
    q_max = int(sys.argv[1]) if len(sys.argv) > 1 else 1000
    G = grid96("sqrt2")
    psi = psi_c_over_q(Fraction(1, 2))
    L = 1
    for q in range(1, q_max + 1):
        L = L * q // math.gcd(L, q)
    # sums scaled by S * L^2
    sum_m = 0
    sum_pairs = 0
    for q in range(1, q_max + 1):
        P = psi(q)
        if P != 0:
            sum_m += 2 * P * L // 1
            cross = 0
            for q2 in range(1, q):
                P2 = psi(q2)
                if P2 == 0:
                    continue
                cross += intersection_scaled(q, q2, G, P, P2) * (L // q) * (L // q2)
            sum_pairs += 2 * cross + 2 * P * L * L
        if q == 512 or q == q_max:
            ce = Fraction(sum_m * sum_m, sum_pairs * S)
            print(f"ce_bound_{q} = {ce.numerator}/{ce.denominator}")
            print(f"ce_bound_{q}_approx = {float(ce)!r}")
            sm = Fraction(sum_m, S * L)
            print(f"ce_sum_measure_{q} = {sm.numerator}/{sm.denominator}")


if __name__ == "__main__":
    main()
