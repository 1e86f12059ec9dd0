"""Finite-part trapezoidal rules on f(x) = pi^2 / sin^2(pi x), whose finite part is 0."""
import math

import numpy as np

from zetaquad.cli import fit_order
from zetaquad.quad1d import fp_trapezoid_1d, fp_trapezoid_1d_alt


def samples(n):
    h = 1.0 / n
    x = h * np.arange(n)
    x = np.where(x >= 0.5, x - 1.0, x)
    x[0] = 1.0  # placeholder, f[0] is never used
    f = math.pi**2 / np.sin(math.pi * x) ** 2
    phi = (math.pi * x / np.sin(math.pi * x)) ** 2
    phi[0] = 1.0
    return f, phi, h


def main():
    ns = [16, 20, 24, 32, 40, 48, 64]
    for M in (1, 2, 4):
        hs, errs = [], []
        for n in ns:
            f, phi, h = samples(n)
            hs.append(h)
            errs.append(abs(fp_trapezoid_1d(f, phi, h, M)))
        row = " ".join(f"{e:9.2e}" for e in errs)
        print(f"M={M}: {row}   order {fit_order(hs, errs):.2f} (expected {2 * M + 1})")
    alt = [abs(fp_trapezoid_1d_alt(samples(n)[0], 1.0, 1.0 / n)) for n in ns]
    print("alt: " + " ".join(f"{e:9.2e}" for e in alt))


if __name__ == "__main__":
    main()
