"""Center-node error of the corrected single layer on a seeded quartic patch."""
import numpy as np

from zetaquad.cli import fit_order
from zetaquad.geom import make_patch, patch_density
from zetaquad.quad3d import apply_operator, make_operator_spec, patch_polar_reference, precompute_corrections

A, B = 0.22, -0.018


def main():
    coeffs = make_patch(16, seed=1).meta["coeffs"]
    ref = patch_polar_reference(coeffs, "lap_slp", A, B)
    print(f"polar reference {ref:.15e}")
    for P in (3, 5):
        hs, errs = [], []
        for N in (24, 32, 48, 64, 96):
            g = make_patch(N, coeffs=coeffs)
            sigma = patch_density(g.params[:, 0], g.params[:, 1], A, B)
            spec = make_operator_spec("lap_slp", P)
            c = g.index(N // 2, N // 2)
            val = apply_operator(g, spec, precompute_corrections(g, spec, [c]), sigma, c)
            hs.append(g.h)
            errs.append(abs(val - ref))
            print(f"P={P} N={N:4d} err={errs[-1]:.3e}")
        print(f"P={P} fitted order {fit_order(hs, errs):.2f}")


if __name__ == "__main__":
    main()
