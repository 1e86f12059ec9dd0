"""Command-line drivers for the convergence and correctness experiments.

Every command writes CSV (``%.16e`` floats) to stdout or ``--out``. Series
end with a ``fit`` row holding the least-squares slope of ``log10(err)``
against ``log10(h)`` over the last four points before the error first
reaches the floor ``max(1e-13, 0.1 * min(err))``.

Exit codes: 0 success, 1 usage error, 2 numerical failure (a check out of
tolerance or a fitted order outside ``--expect-order +- --order-tol``).
"""

from __future__ import annotations

import argparse
import io
import math
import sys
from dataclasses import dataclass, field

import numpy as np

from .geom import DEFAULT_TORUS_WOBBLE

__all__ = ["RunConfig", "fit_order", "main", "run", "build_parser", "COMMANDS"]

COMMANDS = ("epstein-check", "wigner-check", "conv1d", "conv3d-patch",
            "green-identity-torus", "solve-bvp2d", "solve-bvp3d")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2


@dataclass
class RunConfig:
    """Parsed options of one invocation."""

    command: str
    options: dict = field(default_factory=dict)
    out: str | None = None

    def __getattr__(self, name):
        try:
            return self.options[name]
        except KeyError as exc:
            raise AttributeError(name) from exc


def fit_order(h, err, floor: float | None = None, npts: int = 4) -> float:
    """Least-squares slope of ``log10(err)`` vs ``log10(h)``.

    Uses the last ``npts`` points of the leading run above the floor
    ``max(1e-13, 0.1 * min(err))``; points after the first one at or below
    the floor are roundoff and ignored. Returns ``nan`` with fewer than two
    usable points.
    """
    h = np.asarray(h, dtype=float)
    err = np.abs(np.asarray(err, dtype=float))
    if np.any(np.diff(h) >= 0):
        raise ValueError("resolution ladder must have strictly decreasing h")
    pos = err[err > 0]
    if floor is None:
        floor = max(1e-13, 0.1 * (pos.min() if len(pos) else 0.0))
    below = np.nonzero(err <= floor)[0]
    stop = below[0] if len(below) else len(err)
    keep = np.arange(stop)[-npts:]
    if len(keep) < 2:
        return math.nan
    slope, _ = np.polyfit(np.log10(h[keep]), np.log10(err[keep]), 1)
    return float(slope)


class _Csv:
    def __init__(self, header):
        self.buf = io.StringIO()
        self.header = header
        self.buf.write(",".join(header) + "\n")

    def row(self, *vals):
        out = []
        for v in vals:
            if isinstance(v, (float, np.floating)):
                out.append("%.16e" % v)
            elif v is None:
                out.append("")
            else:
                out.append(str(v))
        self.buf.write(",".join(out) + "\n")

    def text(self) -> str:
        return self.buf.getvalue()


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="zetaquad", description="Zeta-corrected trapezoidal quadrature experiments")
    p.add_argument("--out", help="write CSV here instead of stdout")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def expect(sp, default_tol=0.6):
        sp.add_argument("--expect-order", type=float, action="append",
                        help="expected order per series (repeat in series order)")
        sp.add_argument("--order-tol", type=float, default=default_tol)

    sp = sub.add_parser("epstein-check", help="Epstein zeta against lattice and identity oracles")
    sp.add_argument("--tol", type=float, default=1e-10)

    sp = sub.add_parser("wigner-check", help="closed-form Wigner limits against the definition")
    sp.add_argument("--s", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-6)

    sp = sub.add_parser("conv1d", help="1D hypersingular rule on the csc^2 family")
    sp.add_argument("--M", type=_ints, default=[2, 4, 8])
    sp.add_argument("--n", type=_ints, default=[16, 20, 24, 32, 40, 48, 64, 128, 256, 512])
    expect(sp, default_tol=math.inf)

    sp = sub.add_parser("conv3d-patch", help="patch convergence at the center node")
    sp.add_argument("--op", default="lap_slp",
                    choices=["lap_slp", "lap_dlp", "lap_slpn", "lap_dlpn", "helm_slp"])
    sp.add_argument("--P", type=_ints, default=[3, 5, 7])
    sp.add_argument("--N", type=_ints, default=[24, 32, 48, 64, 96, 128])
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--a", type=float, default=0.22)
    sp.add_argument("--b", type=float, default=-0.018)
    sp.add_argument("--kappa", type=float, default=0.0)
    expect(sp)

    sp = sub.add_parser("green-identity-torus", help="on-surface identities on a torus")
    sp.add_argument("--identity", choices=["green", "gauss", "dlpn"], default="green",
                    help="green: u/2 - S[u_n] + D[u] = 0 (wobbly torus); gauss: D[1] = -1/2; "
                         "dlpn: hypersingular operator of 1 is 0 (plain torus by default)")
    sp.add_argument("--P", type=_ints, default=[3, 5])
    sp.add_argument("--nu", type=_ints, default=[24, 32, 48, 64])
    sp.add_argument("--R", type=float, default=1.0)
    sp.add_argument("--r", type=float, default=0.4)
    sp.add_argument("--amplitude", type=float, default=None,
                    help=f"wobble amplitude (default {DEFAULT_TORUS_WOBBLE[0]} for green, 0 otherwise)")
    sp.add_argument("--frequency", type=int, default=DEFAULT_TORUS_WOBBLE[1])
    expect(sp)

    sp = sub.add_parser("solve-bvp2d", help="2D Laplace Dirichlet via the hypersingular BIE")
    sp.add_argument("--side", choices=["interior", "exterior"], default="interior")
    sp.add_argument("--variant", choices=["central_diff", "alternating"], default="central_diff")
    sp.add_argument("--M", type=int, default=8)
    sp.add_argument("--N", type=_ints, default=[64, 96, 128, 192, 256, 384, 512, 800])
    expect(sp, default_tol=math.inf)

    sp = sub.add_parser("solve-bvp3d", help="3D interior Dirichlet problem on a torus")
    sp.add_argument("--P", type=_ints, default=[3, 5])
    sp.add_argument("--nu", type=_ints, default=[24, 32, 48, 64])
    sp.add_argument("--R", type=float, default=1.0)
    sp.add_argument("--r", type=float, default=0.4)
    sp.add_argument("--amplitude", type=float, default=0.0)
    sp.add_argument("--frequency", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-12)
    expect(sp)
    return p


def _check_orders(cfg: RunConfig, orders: list[float]) -> bool:
    exp = cfg.options.get("expect_order")
    if not exp:
        return True
    tol = cfg.options.get("order_tol", 0.6)
    ok = True
    for i, o in enumerate(orders):
        e = exp[i] if i < len(exp) else exp[-1]
        if math.isinf(tol):
            # one-sided: order at least the expectation
            ok &= bool(o >= e)
        else:
            ok &= bool(abs(o - e) <= tol)
    return ok


# ---------------------------------------------------------------- commands


def _epstein_check(cfg: RunConfig):
    from .epstein import Direction, QuadraticForm, epstein_mixed_derivatives, epstein_zeta
    from .specfun import gamma
    from .wigner import Monomial, WignerOracleConfig, wigner_oracle

    csv = _Csv(["check", "s", "E", "F", "G", "value", "reference", "diff", "tol", "pass"])
    ok = True
    forms = [QuadraticForm(1.0, 0.0, 1.0), QuadraticForm(2.0, 0.3, 1.5)]
    brute = WignerOracleConfig((250, 500, 1000, 2000), 2)
    for Q in forms:
        for s in (3.0, 4.0, 5.0):
            z = epstein_zeta(s, Q)
            ref = wigner_oracle(s, Q, Monomial(0, 0), brute)
            d = abs(z - ref)
            ok &= d <= cfg.tol
            csv.row("lattice", s, Q.E, Q.F, Q.G, z, ref, d, cfg.tol, int(d <= cfg.tol))
    Q1 = QuadraticForm(1.3, 0.4, (1.0 + 0.16) / 1.3)
    for s in (0.5, 1.0, 1.5, 3.0):
        lhs = math.pi ** (-s / 2) * gamma(s / 2) * epstein_zeta(s, Q1)
        rhs = math.pi ** (-(1 - s / 2)) * gamma(1 - s / 2) * epstein_zeta(2 - s, Q1)
        d = abs(lhs - rhs)
        ok &= d <= cfg.tol
        csv.row("functional", s, Q1.E, Q1.F, Q1.G, lhs, rhs, d, cfg.tol, int(d <= cfg.tol))
    Q = QuadraticForm(1.3, 0.2, 0.9)
    for s in (1.0, 3.0):
        z = epstein_zeta(s, Q)
        e1 = epstein_mixed_derivatives(s, Q, Direction(Q.E, Q.F, Q.G), 1)[1]
        d = abs(e1 + 0.5 * s * z) / abs(z)
        ok &= d <= 1e-9
        csv.row("euler", s, Q.E, Q.F, Q.G, e1, -0.5 * s * z, d, 1e-9, int(d <= 1e-9))
        for k, step in ((1, 1e-5), (2, 1e-4)):
            for dirn in (Direction(1, 0, 0), Direction(0, 1, 0), Direction(0.3, -0.2, 0.7)):
                val = epstein_mixed_derivatives(s, Q, dirn, k)[k]

                def z_at(t):
                    return epstein_zeta(s, QuadraticForm(Q.E + t * dirn.L, Q.F + t * dirn.M, Q.G + t * dirn.N))
                if k == 1:
                    fd = (z_at(step) - z_at(-step)) / (2 * step)
                else:
                    fd = (z_at(step) - 2 * z_at(0.0) + z_at(-step)) / step**2
                d = abs(val - fd) / abs(fd)
                ok &= d <= 1e-5
                csv.row(f"fd_k{k}", s, dirn.L, dirn.M, dirn.N, val, fd, d, 1e-5, int(d <= 1e-5))
    return csv, ok


def _wigner_check(cfg: RunConfig):
    from .epstein import QuadraticForm
    from .wigner import Monomial, wigner_limit, wigner_oracle

    csv = _Csv(["s", "E", "F", "G", "a", "b", "closed_form", "oracle", "diff", "pass"])
    ok = True
    for Q in (QuadraticForm(1.0, 0.0, 1.0), QuadraticForm(2.0, 0.4, 1.3)):
        for m in (Monomial(0, 0), Monomial(2, 0), Monomial(1, 1), Monomial(0, 2),
                  Monomial(1, 0), Monomial(2, 1), Monomial(0, 3)):
            th = wigner_limit(cfg.s, Q, m)
            orc = wigner_oracle(cfg.s, Q, m)
            d = abs(th - orc)
            good = d <= cfg.tol
            if m.degree % 2:
                # odd moments vanish identically; the oracle only to roundoff
                good = good and th == 0.0
            ok &= good
            csv.row(cfg.s, Q.E, Q.F, Q.G, m.a, m.b, th, orc, d, int(good))
    return csv, ok


def _csc2_problem(n: int):
    h = 1.0 / n
    x = h * np.arange(n)
    x = np.where(x >= 0.5, x - 1.0, x)
    x[0] = 1.0
    f = math.pi**2 / np.sin(math.pi * x) ** 2
    phi = (math.pi * x / np.sin(math.pi * x)) ** 2
    phi[0] = 1.0
    return f, phi, h


def _conv1d(cfg: RunConfig):
    from .quad1d import fp_trapezoid_1d, fp_trapezoid_1d_alt

    csv = _Csv(["series", "n", "h", "error", "order"])
    orders = []
    for M in cfg.M:
        ns = [n for n in cfg.n if n >= 2 * M + 1]
        hs, errs = [], []
        for n in ns:
            f, phi, h = _csc2_problem(n)
            e = abs(fp_trapezoid_1d(f, phi, h, M))
            hs.append(h)
            errs.append(e)
            csv.row(f"M={M}", n, h, e, None)
        o = fit_order(hs, errs)
        orders.append(o)
        csv.row(f"M={M}", "fit", None, None, o)
    for n in cfg.n:
        f, phi, h = _csc2_problem(n)
        csv.row("alternating", n, h, abs(fp_trapezoid_1d_alt(f, phi[0], h)), None)
    return csv, _check_orders(cfg, orders)


def _conv3d_patch(cfg: RunConfig):
    from .geom import make_patch, patch_density
    from .quad3d import apply_operator, make_operator_spec, patch_polar_reference, precompute_corrections

    csv = _Csv(["series", "N", "h", "value", "error", "order"])
    coeffs = make_patch(16, seed=cfg.seed).meta["coeffs"]
    grids = {N: make_patch(N, seed=cfg.seed) for N in sorted(set(cfg.N))}
    orders = []

    def value(P, N):
        g = grids.get(N) or make_patch(N, seed=cfg.seed)
        c = g.n // 2
        sig = patch_density(g.params[:, 0], g.params[:, 1], cfg.a, cfg.b)
        spec = make_operator_spec(cfg.op, P, cfg.kappa)
        return apply_operator(g, spec, precompute_corrections(g, spec, [c]), sig, c)

    for P in cfg.P:
        if cfg.op in ("lap_slp", "lap_dlp", "lap_slpn"):
            ref = patch_polar_reference(coeffs, cfg.op, cfg.a, cfg.b)
        else:
            # self-reference: 4x the finest grid with two more orders
            ref = value(P + 2, 4 * max(cfg.N))
        hs, errs = [], []
        for N in cfg.N:
            v = value(P, N)
            e = abs(v - ref)
            h = grids[N].h
            hs.append(h)
            errs.append(e)
            csv.row(f"{cfg.op}_P{P}", N, h, float(np.real(v)), e, None)
        o = fit_order(hs, errs)
        orders.append(o)
        csv.row(f"{cfg.op}_P{P}", "fit", None, None, None, o)
    return csv, _check_orders(cfg, orders)


def green_identity_residual(grid, P: int, sources=None, cache=None) -> float:
    """``max |u/2 - S[u_n] + D[u]|`` over all nodes for a field harmonic inside."""
    from .bie import default_problem_3d
    from .quad3d import layer_operator

    src = default_problem_3d(grid.meta.get("R", 1.0)).sources if sources is None else sources
    d = grid.pos[:, None, :] - src.positions[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    u = (1.0 / (4.0 * math.pi * r)) @ src.charges
    grad = -(d / (4.0 * math.pi * r[..., None] ** 3) * src.charges[None, :, None]).sum(axis=1)
    un = np.einsum("ij,ij->i", grad, grid.normal)
    S = layer_operator(grid, "lap_slp", P, cache=cache)
    D = layer_operator(grid, "lap_dlp", P, cache=cache)
    return float(np.max(np.abs(0.5 * u - S.matvec(un) + D.matvec(u))))


def constant_identity_residual(grid, name: str, P: int, cache=None) -> float:
    """``max |D[1] + 1/2|`` for ``lap_dlp`` or ``max |N[1]|`` for ``lap_dlpn``."""
    from .quad3d import layer_operator

    op = layer_operator(grid, name, P, cache=cache)
    shift = 0.5 if name == "lap_dlp" else 0.0
    return float(np.max(np.abs(op.matvec(np.ones(grid.n)) + shift)))


def _green_torus(cfg: RunConfig):
    from .geom import make_torus
    from .momentfit import WeightCache

    ident = cfg.identity
    amp = cfg.amplitude
    if amp is None:
        amp = DEFAULT_TORUS_WOBBLE[0] if ident == "green" else 0.0
    csv = _Csv(["series", "nu", "N", "h", "residual", "order"])
    orders = []
    cache = WeightCache()
    for P in cfg.P:
        hs, errs = [], []
        for nu in cfg.nu:
            g = make_torus(cfg.R, cfg.r, nu, amplitude=amp, frequency=cfg.frequency if amp else 0)
            if ident == "green":
                e = green_identity_residual(g, P, cache=cache)
            else:
                e = constant_identity_residual(g, "lap_dlp" if ident == "gauss" else "lap_dlpn", P, cache)
            hs.append(g.h)
            errs.append(e)
            csv.row(f"{ident}_P{P}", nu, g.n, g.h, e, None)
        o = fit_order(hs, errs)
        orders.append(o)
        csv.row(f"{ident}_P{P}", "fit", None, None, None, o)
    return csv, _check_orders(cfg, orders)


def _bvp2d(cfg: RunConfig):
    from .bie import default_problem_2d, solve_laplace_dirichlet_2d
    from .geom import make_curve

    csv = _Csv(["series", "N", "h", "error", "iterations", "seconds", "order"])
    pr = default_problem_2d(cfg.side)
    hs, errs = [], []
    name = f"{cfg.side}_{cfg.variant}"
    for N in cfg.N:
        c = make_curve("wobbly", N)
        rep = solve_laplace_dirichlet_2d(pr, c, cfg.M, cfg.variant)
        hs.append(c.h)
        errs.append(rep.max_rel_error)
        csv.row(name, N, c.h, rep.max_rel_error, rep.iterations, round(rep.seconds, 3), None)
    o = fit_order(hs, errs)
    csv.row(name, "fit", None, None, None, None, o)
    ok = _check_orders(cfg, [o])
    return csv, ok


def _bvp3d(cfg: RunConfig):
    from .bie import default_problem_3d, solve_laplace_dirichlet_3d_torus
    from .geom import make_torus
    from .momentfit import WeightCache

    csv = _Csv(["series", "nu", "N", "h", "error", "iterations", "seconds", "order"])
    pr = default_problem_3d(cfg.R)
    orders = []
    ok = True
    cache = WeightCache()
    for P in cfg.P:
        hs, errs = [], []
        for nu in cfg.nu:
            g = make_torus(cfg.R, cfg.r, nu, amplitude=cfg.amplitude, frequency=cfg.frequency)
            rep = solve_laplace_dirichlet_3d_torus(pr, g, P, tol=cfg.tol, cache=cache)
            ok &= rep.converged
            hs.append(g.h)
            errs.append(rep.max_rel_error)
            csv.row(f"P{P}", nu, g.n, g.h, rep.max_rel_error, rep.iterations, round(rep.seconds, 3), None)
        o = fit_order(hs, errs)
        orders.append(o)
        csv.row(f"P{P}", "fit", None, None, None, None, None, o)
    return csv, ok and _check_orders(cfg, orders)


_DISPATCH = {
    "epstein-check": _epstein_check,
    "wigner-check": _wigner_check,
    "conv1d": _conv1d,
    "conv3d-patch": _conv3d_patch,
    "green-identity-torus": _green_torus,
    "solve-bvp2d": _bvp2d,
    "solve-bvp3d": _bvp3d,
}


def run(cfg: RunConfig) -> tuple[int, str]:
    """Execute one command; returns ``(exit_code, csv_text)``."""
    if cfg.command not in _DISPATCH:
        return EXIT_USAGE, ""
    try:
        csv, ok = _DISPATCH[cfg.command](cfg)
    except (ArithmeticError, np.linalg.LinAlgError, ValueError) as exc:
        return EXIT_NUMERIC, f"error,{type(exc).__name__},{str(exc).replace(',', ';')}\n"
    return (EXIT_OK if ok else EXIT_NUMERIC), csv.text()


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    opts = {k: v for k, v in vars(args).items() if k not in ("command", "out")}
    cfg = RunConfig(args.command, opts, args.out)
    code, text = run(cfg)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
