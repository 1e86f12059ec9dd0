"""Nystrom solvers for Laplace Dirichlet problems.

2D (closed curve, ``G = -log(r) / 2 pi``): the unknown Neumann data ``tau``
solves

    (-1/2 + D*) tau = H sigma                       interior,
    (+1/2 + D*) tau + int tau ds = H sigma + Sigma  exterior,

and the solution is ``S[tau] - D[sigma]`` inside or ``D[sigma] - S[tau] + omega``
outside. ``Sigma`` is the total flux and ``omega`` the constant at infinity.

3D (torus, ``G = 1 / 4 pi r``): interior Dirichlet data ``f`` is represented
as ``u = D[sigma]`` with ``(-1/2 + D) sigma = f`` on the surface.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .geom import CurveGeometry, SurfaceGrid
from .momentfit import WeightCache
from .quad1d import assemble_hypersingular_2d
from .quad3d import layer_operator

__all__ = [
    "PointSources",
    "BvpProblem",
    "LinearSolveReport",
    "GmresResult",
    "gmres_dense",
    "laplace2d_field",
    "laplace3d_field",
    "adjoint_double_layer_2d",
    "solve_laplace_dirichlet_2d",
    "solve_laplace_dirichlet_3d_torus",
    "default_problem_2d",
    "default_problem_3d",
]


@dataclass(frozen=True)
class PointSources:
    """Charges ``q_i`` at ``positions[i]``."""

    positions: np.ndarray
    charges: np.ndarray


@dataclass(frozen=True)
class BvpProblem:
    side: str  # "interior" or "exterior"
    sources: PointSources
    targets: np.ndarray
    Sigma: float = 0.0
    omega: float = 0.0

    def __post_init__(self):
        if self.side not in ("interior", "exterior"):
            raise ValueError("side must be 'interior' or 'exterior'")


@dataclass
class LinearSolveReport:
    N: int
    residual: float
    iterations: int
    seconds: float
    max_rel_error: float
    converged: bool = True
    extra: dict = field(default_factory=dict)


@dataclass
class GmresResult:
    x: np.ndarray
    residual: float  # relative residual estimate
    iterations: int
    converged: bool
    history: list = field(default_factory=list)


def gmres_dense(A, b: np.ndarray, tol: float = 1e-12, max_iter: int = 400,
                restart: int | None = None) -> GmresResult:
    """GMRES with modified Gram-Schmidt and Givens rotations, ``x0 = 0``.

    ``A`` is a matrix or any object with ``@`` (or ``matvec``). ``restart=None``
    runs without restarts up to ``max_iter`` iterations.
    """
    matvec = A.matvec if hasattr(A, "matvec") else (lambda v: A @ v)
    b = np.asarray(b)
    dtype = np.result_type(b.dtype, getattr(A, "dtype", b.dtype), float)
    n = len(b)
    bnorm = np.linalg.norm(b)
    x = np.zeros(n, dtype=dtype)
    if bnorm == 0:
        return GmresResult(x, 0.0, 0, True)
    m = max_iter if restart is None else min(restart, max_iter)
    total = 0
    history = []
    rel = 1.0
    while total < max_iter:
        r = b - matvec(x) if total else b.astype(dtype)
        beta = np.linalg.norm(r)
        rel = beta / bnorm
        if rel <= tol:
            return GmresResult(x, rel, total, True, history)
        V = np.zeros((m + 1, n), dtype=dtype)
        Hm = np.zeros((m + 1, m), dtype=dtype)
        cs = np.zeros(m, dtype=dtype)
        sn = np.zeros(m, dtype=dtype)
        g = np.zeros(m + 1, dtype=dtype)
        g[0] = beta
        V[0] = r / beta
        k = 0
        for k in range(m):
            w = matvec(V[k])
            for i in range(k + 1):
                Hm[i, k] = np.vdot(V[i], w)
                w = w - Hm[i, k] * V[i]
            Hm[k + 1, k] = np.linalg.norm(w)
            if Hm[k + 1, k] != 0:
                V[k + 1] = w / Hm[k + 1, k]
            for i in range(k):
                t = cs[i] * Hm[i, k] + sn[i] * Hm[i + 1, k]
                Hm[i + 1, k] = -np.conj(sn[i]) * Hm[i, k] + cs[i] * Hm[i + 1, k]
                Hm[i, k] = t
            a, c = Hm[k, k], Hm[k + 1, k]
            den = math.hypot(abs(a), abs(c))
            cs[k] = abs(a) / den if den else 1.0
            sn[k] = (a / abs(a) * np.conj(c) / den) if abs(a) else 1.0
            Hm[k, k] = cs[k] * a + sn[k] * c
            Hm[k + 1, k] = 0.0
            g[k + 1] = -np.conj(sn[k]) * g[k]
            g[k] = cs[k] * g[k]
            total += 1
            rel = abs(g[k + 1]) / bnorm
            history.append(float(rel))
            if rel <= tol or total >= max_iter or Hm[k, k] == 0:
                break
        kk = k + 1
        y = np.linalg.solve(np.triu(Hm[:kk, :kk]), g[:kk])
        x = x + V[:kk].T @ y
        if rel <= tol:
            true_rel = np.linalg.norm(b - matvec(x)) / bnorm
            return GmresResult(x, float(true_rel), total, bool(true_rel <= 10 * tol), history)
    return GmresResult(x, float(rel), total, False, history)


# ---------------------------------------------------------------- 2D


def laplace2d_field(src: PointSources, x: np.ndarray, normal: np.ndarray | None = None):
    """``u = sum q log|x - x_i|`` and optionally ``du/dn``."""
    d = x[:, None, :] - src.positions[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    u = 0.5 * np.log(r2) @ src.charges
    if normal is None:
        return u
    un = np.einsum("ijk,ik->ij", d, normal) / r2 @ src.charges
    return u, un


def adjoint_double_layer_2d(curve: CurveGeometry) -> np.ndarray:
    """Trapezoid matrix of ``D*`` with kernel ``-(x - y) . n_x / (2 pi r^2)``."""
    d = curve.pos[:, None, :] - curve.pos[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, 1.0)
    K = -np.einsum("ijk,ik->ij", d, curve.normal) / (2.0 * math.pi * r2)
    A = K * curve.weights[None, :]
    # diagonal limit -kappa / (4 pi) times the weight
    A[np.diag_indices(curve.N)] = -curve.curvature * curve.weights / (4.0 * math.pi)
    return A


def _eval_2d(curve: CurveGeometry, tau, sigma, targets):
    d = targets[:, None, :] - curve.pos[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    w = curve.weights
    S = -(0.5 * np.log(r2)) / (2.0 * math.pi) * w[None, :]
    D = np.einsum("ijk,jk->ij", d, curve.normal) / (2.0 * math.pi * r2) * w[None, :]
    return S @ tau, D @ sigma


def solve_laplace_dirichlet_2d(problem: BvpProblem, curve: CurveGeometry, M: int = 8,
                               variant: str = "central_diff") -> LinearSolveReport:
    """Solve for the Neumann data with a dense direct solve and check the targets."""
    t0 = time.perf_counter()
    sigma = laplace2d_field(problem.sources, curve.pos)
    H = assemble_hypersingular_2d(curve, M, variant)
    Dstar = adjoint_double_layer_2d(curve)
    rhs = H @ sigma
    if problem.side == "interior":
        A = Dstar - 0.5 * np.eye(curve.N)
    else:
        A = Dstar + 0.5 * np.eye(curve.N) + curve.weights[None, :]
        rhs = rhs + problem.Sigma
    tau = np.linalg.solve(A, rhs)
    res = float(np.linalg.norm(A @ tau - rhs) / np.linalg.norm(rhs))
    s_val, d_val = _eval_2d(curve, tau, sigma, problem.targets)
    u = s_val - d_val if problem.side == "interior" else d_val - s_val + problem.omega
    exact = laplace2d_field(problem.sources, problem.targets)
    err = float(np.max(np.abs(u - exact)) / np.max(np.abs(exact)))
    flux = float(curve.weights @ tau)
    return LinearSolveReport(curve.N, res, 0, time.perf_counter() - t0, err, True,
                             dict(flux=flux, tau=tau))


def default_problem_2d(side: str) -> BvpProblem:
    """Point sources on the far side of the default wobbly curve, targets on the near side."""
    ang = np.array([0.3, 2.4, 4.4])
    ring = np.column_stack([np.cos(ang), np.sin(ang)])
    tang = np.array([0.9, 2.9, 5.0])
    tring = np.column_stack([np.cos(tang), np.sin(tang)])
    if side == "interior":
        src = PointSources(1.6 * ring, np.array([1.0, -0.7, 0.5]))
        return BvpProblem(side, src, 0.45 * tring)
    src = PointSources(0.35 * ring, np.array([1.0, -0.7, 0.5]))
    return BvpProblem(side, src, 2.2 * tring, Sigma=2.0 * math.pi * float(src.charges.sum()), omega=0.0)


# ---------------------------------------------------------------- 3D


def laplace3d_field(src: PointSources, x: np.ndarray) -> np.ndarray:
    d = x[:, None, :] - src.positions[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    return (1.0 / (4.0 * math.pi * r)) @ src.charges


def default_problem_3d(R: float = 1.0) -> BvpProblem:
    """Sources outside the solid torus, targets near its core circle."""
    src = PointSources(np.array([[0.0, 0.0, 0.0], [0.1, -0.2, 0.9], [2.2, 0.6, -0.3]]),
                       np.array([1.0, -0.6, 0.8]))
    ph = np.array([0.3, 1.7, 2.9, 4.0, 5.3])
    off = np.array([[0.1, 0.05], [-0.12, 0.0], [0.0, -0.1], [0.05, 0.1], [-0.05, -0.05]])
    tg = np.column_stack([(R + off[:, 0]) * np.cos(ph), (R + off[:, 0]) * np.sin(ph), off[:, 1]])
    return BvpProblem("interior", src, tg)


def solve_laplace_dirichlet_3d_torus(problem: BvpProblem, grid: SurfaceGrid, P: int, *,
                                     data: np.ndarray | None = None, tol: float = 1e-12,
                                     max_iter: int = 400, cache: WeightCache | None = None,
                                     exact: np.ndarray | None = None) -> LinearSolveReport:
    """Interior Dirichlet problem on a torus via ``(-1/2 + D) sigma = f`` and GMRES.

    ``data`` overrides the boundary values (default: the point-source field);
    ``exact`` overrides the reference values at the targets.
    """
    if problem.side != "interior":
        raise ValueError("only the interior torus problem is supported")
    t0 = time.perf_counter()
    D = layer_operator(grid, "lap_dlp", P, cache=cache)
    t_pre = time.perf_counter() - t0

    class _Shifted:
        dtype = np.dtype(float)

        def matvec(self, x):
            return D.matvec(x) - 0.5 * x

    f = laplace3d_field(problem.sources, grid.pos) if data is None else np.asarray(data, dtype=float)
    sol = gmres_dense(_Shifted(), f, tol=tol, max_iter=max_iter)
    d = problem.targets[:, None, :] - grid.pos[None, :, :]
    r = np.sqrt(np.einsum("ijk,ijk->ij", d, d))
    K = np.einsum("ijk,jk->ij", d, grid.normal) / (4.0 * math.pi * r**3) * grid.J[None, :] * grid.h**2
    u = K @ sol.x
    ref = laplace3d_field(problem.sources, problem.targets) if exact is None else exact
    err = float(np.max(np.abs(u - ref)) / np.max(np.abs(ref)))
    return LinearSolveReport(grid.n, sol.residual, sol.iterations, time.perf_counter() - t0, err,
                             sol.converged, dict(precompute_seconds=t_pre, sigma=sol.x))
