"""Epstein zeta values and the functional equation on a few lattices."""
import math

from zetaquad import QuadraticForm, epstein_zeta
from zetaquad.specfun import gamma


def main():
    forms = {
        "square": QuadraticForm(1.0, 0.0, 1.0),
        "hexagonal": QuadraticForm(1.0, 0.5, 1.0),
        "skewed": QuadraticForm(2.0, 0.3, 1.5),
    }
    print(f"{'lattice':>10} {'s':>5} {'Z(s)':>22} {'functional eq. residual':>24}")
    for name, Q in forms.items():
        Q1 = Q.scaled(1.0 / math.sqrt(Q.D))
        for s in (0.5, 1.0, 3.0, 5.0):
            lhs = math.pi ** (-s / 2) * gamma(s / 2) * epstein_zeta(s, Q1)
            rhs = math.pi ** (s / 2 - 1) * gamma(1 - s / 2) * epstein_zeta(2 - s, Q1)
            print(f"{name:>10} {s:5.1f} {epstein_zeta(s, Q):22.15e} {abs(lhs - rhs):24.2e}")


if __name__ == "__main__":
    main()
