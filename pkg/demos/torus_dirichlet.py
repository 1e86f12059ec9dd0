"""Interior Dirichlet problem on a torus with the corrected double layer and GMRES."""
from zetaquad.bie import default_problem_3d, solve_laplace_dirichlet_3d_torus
from zetaquad.geom import make_torus
from zetaquad.momentfit import WeightCache


def main():
    cache = WeightCache()
    prob = default_problem_3d()
    for P in (3, 5):
        for nu in (16, 24, 32):
            rep = solve_laplace_dirichlet_3d_torus(prob, make_torus(1.0, 0.4, nu), P, cache=cache)
            print(f"P={P} N={rep.N:5d} iterations={rep.iterations:3d} "
                  f"target error={rep.max_rel_error:.2e} ({rep.seconds:.1f} s)")


if __name__ == "__main__":
    main()
