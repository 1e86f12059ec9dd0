"""Unified zeta quadrature for layer potentials on surface grids.

An operator ``int K(x, y) sigma(y) dS_y`` is split into kernel terms
``phi(u) / r(u)^p`` with ``phi = f(x, y) J(u) sigma(u)`` smooth and
``phi = O(u^(2q))``. The rule is the punctured trapezoidal sum plus, for each
term, sparse local corrections

    sum_m sum_{U(K1^m, K2^m)} C(-p/2, m) (r^2 - Q)^m phi tau^m h^(2 - p - 2m).

All kernels use ``G = 1/(4 pi r)`` and the grid's unit normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .geom import SurfaceGrid, bending_r2_minus_q
from .momentfit import WeightCache, build_correction_plan

__all__ = [
    "KernelTerm",
    "OperatorSpec",
    "CorrectionTable",
    "LayerOperator",
    "OPERATOR_NAMES",
    "make_operator_spec",
    "kernel_block",
    "precompute_corrections",
    "apply_operator",
    "operator_matrix",
    "layer_operator",
    "DENSE_LIMIT",
    "DENSE_OPERATOR_NODES",
    "patch_polar_reference",
]

FOUR_PI = 4.0 * math.pi
OPERATOR_NAMES = ("lap_slp", "lap_dlp", "lap_slpn", "lap_dlpn", "helm_slp")
# nodes above which operator_matrix refuses to build a dense matrix
DENSE_LIMIT = 12000
# LayerOperator stores a dense matrix up to this many nodes (about 0.8 GB)
DENSE_OPERATOR_NODES = 10000


def _geom(grid, target, src):
    d = grid.pos[target] - grid.pos[src]
    return d, grid.normal[target], grid.normal[src], grid.J[src]


def _f_slp(grid, t, src, kappa):
    return grid.J[src] / FOUR_PI


def _f_dlp(grid, t, src, kappa):
    d, nx, ny, J = _geom(grid, t, src)
    return np.einsum("ij,ij->i", d, ny) * J / FOUR_PI


def _f_slpn(grid, t, src, kappa):
    d, nx, ny, J = _geom(grid, t, src)
    return -(d @ nx) * J / FOUR_PI


def _f_dlpn_a(grid, t, src, kappa):
    d, nx, ny, J = _geom(grid, t, src)
    return (ny @ nx) * J / FOUR_PI


def _f_dlpn_b(grid, t, src, kappa):
    d, nx, ny, J = _geom(grid, t, src)
    return -3.0 * (d @ nx) * np.einsum("ij,ij->i", d, ny) * J / FOUR_PI


def _f_helm_real(grid, t, src, kappa):
    d = grid.pos[t] - grid.pos[src]
    r = np.sqrt(np.einsum("ij,ij->i", d, d))
    return np.cos(kappa * r) * grid.J[src] / FOUR_PI


@dataclass(frozen=True)
class KernelTerm:
    """``phi / r^p`` with ``phi = factor(grid, target, sources, kappa) * sigma``."""

    p: int
    q: int
    factor: Callable


@dataclass(frozen=True)
class OperatorSpec:
    name: str
    terms: tuple[KernelTerm, ...]
    P: int
    kappa: float = 0.0

    @property
    def is_complex(self) -> bool:
        return self.name == "helm_slp"


def make_operator_spec(name: str, P: int, kappa: float = 0.0) -> OperatorSpec:
    """Kernel-term split for one of :data:`OPERATOR_NAMES` at target order ``P``."""
    terms = {
        "lap_slp": (KernelTerm(1, 0, _f_slp),),
        "lap_dlp": (KernelTerm(3, 1, _f_dlp),),
        "lap_slpn": (KernelTerm(3, 1, _f_slpn),),
        "lap_dlpn": (KernelTerm(3, 0, _f_dlpn_a), KernelTerm(5, 2, _f_dlpn_b)),
        "helm_slp": (KernelTerm(1, 0, _f_helm_real),),
    }
    if name not in terms:
        raise ValueError(f"unknown operator {name!r}; choose from {OPERATOR_NAMES}")
    if P < 1:
        raise ValueError("order P must be positive")
    return OperatorSpec(name, terms[name], int(P), float(kappa))


def kernel_block(grid: SurfaceGrid, spec: OperatorSpec, targets: np.ndarray) -> np.ndarray:
    """Kernel times Jacobian, ``K(x_t, y_j) J_j``, with zero on the diagonal."""
    targets = np.atleast_1d(targets)
    X, NX = grid.pos[targets], grid.normal[targets]
    Y, NY, J = grid.pos, grid.normal, grid.J
    d = X[:, None, :] - Y[None, :, :]
    r2 = np.einsum("tjk,tjk->tj", d, d)
    rows = np.arange(len(targets))
    r2[rows, targets] = 1.0
    inv_r = 1.0 / np.sqrt(r2)
    name = spec.name
    if name in ("lap_slp", "helm_slp"):
        K = J[None, :] * inv_r / FOUR_PI
        if name == "helm_slp":
            K = K * np.exp(1j * spec.kappa * (r2 * inv_r))
    elif name == "lap_dlp":
        K = np.einsum("tjk,jk->tj", d, NY) * inv_r**3 * J[None, :] / FOUR_PI
    elif name == "lap_slpn":
        K = -np.einsum("tjk,tk->tj", d, NX) * inv_r**3 * J[None, :] / FOUR_PI
    elif name == "lap_dlpn":
        mu0 = np.einsum("tjk,tk->tj", d, NX)
        mu = np.einsum("tjk,jk->tj", d, NY)
        K = (NX @ NY.T * inv_r**3 - 3.0 * mu0 * mu * inv_r**5) * J[None, :] / FOUR_PI
    else:
        raise ValueError(name)
    K[rows, targets] = 0.0
    return K


@dataclass(frozen=True)
class CorrectionTable:
    """Sparse local corrections, one row per target node."""

    targets: np.ndarray
    matrix: sp.csr_matrix  # (len(targets), n), already scaled by powers of h
    spec: OperatorSpec
    cache: WeightCache

    def row(self, k: int) -> sp.csr_matrix:
        return self.matrix[k]


def precompute_corrections(grid: SurfaceGrid, spec: OperatorSpec, targets=None,
                           cache: WeightCache | None = None) -> CorrectionTable:
    """Correction weights for every target (default: all nodes)."""
    targets = np.arange(grid.n) if targets is None else np.atleast_1d(np.asarray(targets, dtype=int))
    cache = WeightCache() if cache is None else cache
    h = grid.h
    rows, cols, vals = [], [], []
    dtype = complex if spec.is_complex else float
    for row, t in enumerate(targets):
        Qt = grid.form(t)
        i0, j0 = grid.ij(t)
        for term in spec.terms:
            plan = build_correction_plan(term.p, term.q, spec.P, Qt, cache)
            for pt in plan.terms:
                off = pt.weights.stencil.points
                try:
                    src = grid.index(i0 + off[:, 0], j0 + off[:, 1])
                except IndexError as exc:
                    raise ValueError(f"correction stencil of node {t} leaves the patch") from exc
                w = pt.binom * pt.weights.tau * term.factor(grid, t, src, spec.kappa)
                if pt.m:
                    w = w * bending_r2_minus_q(grid, t, off) ** pt.m
                w = w * h ** (2 - term.p - 2 * pt.m)
                rows.append(np.full(len(src), row))
                cols.append(src)
                vals.append(w)
        if spec.is_complex and spec.kappa != 0.0:
            # smooth imaginary part: diagonal limit i kappa J / (4 pi) times h^2
            rows.append(np.array([row]))
            cols.append(np.array([t]))
            vals.append(np.array([1j * spec.kappa * grid.J[t] / FOUR_PI * h * h]))
    if rows:
        R = np.concatenate(rows)
        C = np.concatenate(cols)
        V = np.concatenate(vals).astype(dtype)
    else:
        R = C = np.zeros(0, dtype=int)
        V = np.zeros(0, dtype=dtype)
    mat = sp.csr_matrix((V, (R, C)), shape=(len(targets), grid.n), dtype=dtype)
    mat.sum_duplicates()
    return CorrectionTable(targets, mat, spec, cache)


def apply_operator(grid: SurfaceGrid, spec: OperatorSpec, corrections: CorrectionTable,
                   sigma: np.ndarray, target: int):
    """Corrected value of the operator applied to ``sigma`` at one target node."""
    hits = np.nonzero(corrections.targets == target)[0]
    if len(hits) == 0:
        raise ValueError(f"no corrections precomputed for node {target}")
    K = kernel_block(grid, spec, np.array([target]))[0]
    val = (K @ sigma) * grid.h**2 + (corrections.matrix[hits[0]] @ sigma)[0]
    return complex(val) if spec.is_complex else float(val)


def operator_matrix(grid: SurfaceGrid, spec: OperatorSpec, corrections: CorrectionTable,
                    limit: int = DENSE_LIMIT) -> np.ndarray:
    """Dense Nystrom matrix (rows ordered as ``corrections.targets``)."""
    if grid.n > limit:
        raise MemoryError(f"{grid.n} nodes exceed the dense limit {limit}; use layer_operator")
    A = kernel_block(grid, spec, corrections.targets) * grid.h**2
    return A + corrections.matrix.toarray()


class LayerOperator:
    """Matrix-free Nystrom operator: punctured kernel rows built in chunks plus sparse corrections."""

    def __init__(self, grid: SurfaceGrid, spec: OperatorSpec, corrections: CorrectionTable,
                 chunk: int = 256, dense: bool | None = None):
        if len(corrections.targets) != grid.n or np.any(corrections.targets != np.arange(grid.n)):
            raise ValueError("LayerOperator needs corrections at every node in order")
        self.grid, self.spec, self.corr, self.chunk = grid, spec, corrections, chunk
        self.shape = (grid.n, grid.n)
        self.dtype = np.dtype(complex if spec.is_complex else float)
        use_dense = grid.n <= DENSE_OPERATOR_NODES if dense is None else dense
        self._dense = operator_matrix(grid, spec, corrections, limit=max(grid.n, DENSE_LIMIT)) \
            if use_dense else None

    def matvec(self, x: np.ndarray) -> np.ndarray:
        if self._dense is not None:
            return self._dense @ x
        n, h2 = self.grid.n, self.grid.h**2
        out = np.empty(n, dtype=np.result_type(self.dtype, x.dtype))
        for s in range(0, n, self.chunk):
            tgt = np.arange(s, min(n, s + self.chunk))
            out[tgt] = kernel_block(self.grid, self.spec, tgt) @ x * h2
        return out + self.corr.matrix @ x

    __matmul__ = matvec


def layer_operator(grid: SurfaceGrid, name: str, P: int, kappa: float = 0.0,
                   cache: WeightCache | None = None, dense: bool | None = None) -> LayerOperator:
    """Convenience constructor: spec, corrections at all nodes and the operator."""
    spec = make_operator_spec(name, P, kappa)
    return LayerOperator(grid, spec, precompute_corrections(grid, spec, cache=cache), dense=dense)


def patch_polar_reference(coeffs: dict, name: str, a: float, b: float, *, radius: float = 0.74,
                          n_theta: int = 512, n_panels: int = 160, gauss_nodes: int = 16,
                          c: float = 2400.0) -> float:
    """Value at the patch center of ``lap_slp``, ``lap_dlp`` or ``lap_slpn`` in polar coordinates.

    With ``u = rho (cos t, sin t)`` the integrand times ``rho`` is smooth for
    these weakly singular kernels, so composite Gauss-Legendre in ``rho`` and
    the periodic trapezoid in ``t`` converge rapidly. The density is
    negligible (below ``exp(-c radius^8)``) outside the disk of ``radius``.
    """
    from .geom import patch_density, quartic_surface

    if name not in ("lap_slp", "lap_dlp", "lap_slpn"):
        raise ValueError("polar reference exists only for weakly singular kernels")
    x, w = np.polynomial.legendre.leggauss(gauss_nodes)
    edges = np.linspace(0.0, radius, n_panels + 1)
    half = 0.5 * np.diff(edges)
    rho = (half[:, None] * x[None, :] + (0.5 * (edges[1:] + edges[:-1]))[:, None]).ravel()
    wr = (half[:, None] * w[None, :]).ravel()
    th = 2.0 * math.pi * np.arange(n_theta) / n_theta
    R, T = np.meshgrid(rho, th, indexing="ij")
    u, v = R * np.cos(T), R * np.sin(T)
    pos, ru, rv = quartic_surface(coeffs, u, v)
    cr = np.cross(ru, rv)
    J = np.linalg.norm(cr, axis=-1)
    ny = cr / J[..., None]
    p0, ru0, rv0 = quartic_surface(coeffs, np.zeros(1), np.zeros(1))
    c0 = np.cross(ru0, rv0)[0]
    nx = c0 / np.linalg.norm(c0)
    d = p0[0] - pos
    r = np.linalg.norm(d, axis=-1)
    if name == "lap_slp":
        k = 1.0 / r
    elif name == "lap_dlp":
        k = np.einsum("...k,...k", d, ny) / r**3
    else:
        k = -(d @ nx) / r**3
    f = k * J * patch_density(u, v, a, b, c) / FOUR_PI * R
    return float(np.sum(f * wr[:, None]) * 2.0 * math.pi / n_theta)
