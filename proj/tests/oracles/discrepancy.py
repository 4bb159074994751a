"""Extreme discrepancy of {q gamma}, q = 1..N, for every N <= N_MAX.

Points are frac(q gamma) at 200-bit fixed point from the true gamma; for
sorted x_1..x_N, D(N) = 1/N + max(i/N - x_i) - min(i/N - x_i).
Writes one line per N: "N D(N)" with D to 30 significant digits.
"""
import bisect
import sys

import mpmath

from common import fixed

BITS = 200
ONE = 1 << BITS


def main():
    name = sys.argv[1] if len(sys.argv) > 1 else "golden"
    n_max = int(sys.argv[2]) if len(sys.argv) > 2 else 2000
    out = sys.argv[3] if len(sys.argv) > 3 else None
    f = fixed(name, BITS)
    xs = []
    lines = []
    for N in range(1, n_max + 1):
        bisect.insort(xs, (N * f) % ONE)
        # i/N - x_i in units of 1/(N ONE)
        vals = [i * ONE - N * x for i, x in enumerate(xs, start=1)]
        d = mpmath.mpf(ONE + max(vals) - min(vals)) / (N * mpmath.mpf(ONE))
        lines.append(f"{N} {mpmath.nstr(d, 30)}")
    text = "\n".join(lines) + "\n"
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")


if __name__ == "__main__":
    main()
