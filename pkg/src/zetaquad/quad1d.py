"""Zeta-corrected trapezoidal rules for periodic hypersingular integrands.

For ``f(x) ~ phi(x) / x^2`` near the singular node the finite-part integral is

    I[f] = T_n[f] - pi^2 / (3 h) phi(0) + (1 / 2h) sum_j c_j phi(j h) + O(h^(2M+1)),

with ``T_n`` the punctured trapezoidal sum and ``c_j`` central-difference
weights for ``phi''(0)``. Combining two grids eliminates ``phi''(0)`` and gives
the alternating rule ``2h sum_{j odd} f(jh) - pi^2 / (2h) phi(0)``.

On a closed curve these rules discretize the Laplace hypersingular operator

    H[sigma](x) = (1 / 2 pi) int (n_x . n_y / r^2 - 2 mu_x mu_y) sigma ds_y,

``mu_x = (x - y) . n_x / r^2``, ``mu_y = (x - y) . n_y / r^2``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .geom import CurveGeometry
from .specfun import ZETA

__all__ = [
    "CentralDiffCoeffs",
    "central_diff_coeffs",
    "fp_trapezoid_1d",
    "fp_trapezoid_1d_alt",
    "hypersingular_kernel_2d",
    "assemble_hypersingular_2d",
    "MAX_M",
]

MAX_M = 15


@dataclass(frozen=True)
class CentralDiffCoeffs:
    """Weights ``c_{-M..M}`` with ``sum_j c_j phi(jh) / h^2 = phi''(0) + O(h^(2M))``."""

    M: int
    c: np.ndarray  # index j + M holds c_j
    exact: tuple[Fraction, ...]

    def __getitem__(self, j: int) -> float:
        return float(self.c[j + self.M])


@lru_cache(maxsize=None)
def _exact_coeffs(M: int) -> tuple[Fraction, ...]:
    # c_j = 2 (-1)^(j+1) (M!)^2 / (j^2 (M-j)! (M+j)!) for j >= 1, c_0 = -2 sum c_j
    fM = math.factorial(M)
    pos = [Fraction(2 * (-1) ** (j + 1) * fM * fM, j * j * math.factorial(M - j) * math.factorial(M + j))
           for j in range(1, M + 1)]
    c0 = -2 * sum(pos)
    return tuple(reversed(pos)) + (c0,) + tuple(pos)


def central_diff_coeffs(M: int) -> CentralDiffCoeffs:
    """Exact rational solution of ``c_j = c_-j``, ``sum_j c_j j^(2m) = 2 delta_{1m}``."""
    if not 1 <= M <= MAX_M:
        raise ValueError(f"M must lie in [1, {MAX_M}]")
    ex = _exact_coeffs(M)
    c = np.array([float(x) for x in ex])
    c.setflags(write=False)
    return CentralDiffCoeffs(M, c, ex)


def _check_grid(f: np.ndarray, phi: np.ndarray, M: int | None = None):
    n = len(f)
    if len(phi) != n or n < 2 or n % 2:
        raise ValueError("samples must cover a periodic grid of even length including the singular node")
    if M is not None and 2 * M + 1 > n:
        raise ValueError("central-difference stencil exceeds the grid")


def fp_trapezoid_1d(f: np.ndarray, phi: np.ndarray, h: float, M: int = 8) -> float:
    """Finite-part integral over one period with the singular node at index 0.

    ``f`` and ``phi`` are samples at ``x_j = j h``, ``j = 0..n-1`` (periodic);
    ``f[0]`` is ignored.
    """
    f = np.asarray(f, dtype=float)
    phi = np.asarray(phi, dtype=float)
    _check_grid(f, phi, M)
    cd = central_diff_coeffs(M)
    idx = np.arange(-M, M + 1) % len(f)
    T = h * math.fsum(f[1:])
    return T - 2.0 * ZETA.zeta2 / h * phi[0] + math.fsum(cd.c * phi[idx]) / (2.0 * h)


def fp_trapezoid_1d_alt(f: np.ndarray, phi0: float, h: float) -> float:
    """Alternating-grid rule ``2h sum_{j odd} f(jh) - pi^2/(2h) phi(0)``.

    ``f`` holds samples at all nodes ``j = 0..n-1``; only odd ``j`` are used.
    """
    f = np.asarray(f, dtype=float)
    if len(f) < 2 or len(f) % 2:
        raise ValueError("samples must cover a periodic grid of even length including the singular node")
    return 2.0 * h * math.fsum(f[1::2]) - 3.0 * ZETA.zeta2 / h * phi0


def hypersingular_kernel_2d(curve: CurveGeometry) -> np.ndarray:
    """``K(x_i, y_j)`` for all node pairs, zero on the diagonal."""
    x = curve.pos
    n = curve.normal
    d = x[:, None, :] - x[None, :, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    np.fill_diagonal(r2, 1.0)
    mux = np.einsum("ijk,ik->ij", d, n) / r2
    muy = np.einsum("ijk,jk->ij", d, n) / r2
    K = (n @ n.T / r2 - 2.0 * mux * muy) / (2.0 * math.pi)
    np.fill_diagonal(K, 0.0)
    return K


def _g_matrix(curve: CurveGeometry, M: int) -> np.ndarray:
    """``g_i(jh)`` for offsets ``-M..M`` around every node, shape ``(N, 2M+1)``."""
    N = curve.N
    h = curve.h
    offs = np.arange(-M, M + 1)
    cols = (np.arange(N)[:, None] + offs[None, :]) % N
    sp0 = curve.speed[:, None]
    d = curve.pos[cols] - curve.pos[:, None, :]
    r2 = np.einsum("ijk,ijk->ij", d, d)
    x2 = (sp0 * offs[None, :] * h) ** 2
    x2[:, M] = 1.0
    B = np.where(offs[None, :] == 0, 0.0, r2 / x2 - 1.0)
    nn = np.einsum("ijk,ik->ij", curve.normal[cols], curve.normal)
    g = nn * curve.speed[cols] / (2.0 * math.pi * sp0**2) * (1.0 - B + B * B)
    return g


def assemble_hypersingular_2d(curve: CurveGeometry, M: int = 8, variant: str = "central_diff") -> np.ndarray:
    """Dense Nystrom matrix of ``H`` on the curve nodes.

    ``central_diff``: punctured trapezoid with weights ``w_j`` plus the diagonal
    ``lambda_0^2 w_0 / 4 pi - pi / (6 w_0)`` and the central-difference terms
    ``c_j g(jh) / 2h`` on the ``2M+1`` nearest nodes (``j = 0`` included).

    ``alternating``: twice the trapezoid weights on odd offsets, zero on even
    offsets and ``-pi / (4 w_0)`` on the diagonal.
    """
    N = curve.N
    w = curve.weights
    K = hypersingular_kernel_2d(curve)
    if variant == "alternating":
        offs = (np.arange(N)[None, :] - np.arange(N)[:, None]) % N
        A = np.where(offs % 2 == 1, 2.0 * K * w[None, :], 0.0)
        A[np.diag_indices(N)] = -math.pi / (4.0 * w)
        return A
    if variant != "central_diff":
        raise ValueError(f"unknown variant {variant!r}")
    if not 1 <= M <= MAX_M or 2 * M + 1 > N:
        raise ValueError("central-difference order M incompatible with the grid")
    A = K * w[None, :]
    A[np.diag_indices(N)] = curve.curvature**2 * w / (4.0 * math.pi) - math.pi / (6.0 * w)
    cd = central_diff_coeffs(M)
    g = _g_matrix(curve, M)
    cols = (np.arange(N)[:, None] + np.arange(-M, M + 1)[None, :]) % N
    np.add.at(A, (np.repeat(np.arange(N), 2 * M + 1), cols.ravel()),
              (cd.c[None, :] * g / (2.0 * curve.h)).ravel())
    return A
