"""Sampled geometries: closed curves in the plane and surface grids in space.

Curves are periodic in ``t`` on ``[0, 2 pi)``. Surfaces are sampled on a
uniform grid with equal spacing ``h`` in both parameters; tori are doubly
periodic and patches carry compactly supported data.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .epstein import QuadraticForm

__all__ = [
    "CurveGeometry",
    "SurfaceGrid",
    "make_curve",
    "make_torus",
    "make_patch",
    "quartic_surface",
    "patch_density",
    "chordal_r2",
    "bending_r2_minus_q",
    "export_csv",
    "DEFAULT_WOBBLE",
    "DEFAULT_TORUS_WOBBLE",
]

# Fourier cosine coefficients of the default wobbly curve radius
DEFAULT_WOBBLE = ((0, 1.0), (3, 0.15), (5, 0.05))
# minor-radius modulation r(phi) = r0 + amplitude * cos(frequency * phi)
DEFAULT_TORUS_WOBBLE = (0.05, 3)


@dataclass(frozen=True)
class CurveGeometry:
    """Nodes ``rho(t_j)``, ``t_j = j h``, of a closed counterclockwise curve."""

    t: np.ndarray
    pos: np.ndarray  # (N, 2)
    d1: np.ndarray  # rho'
    d2: np.ndarray  # rho''
    speed: np.ndarray
    normal: np.ndarray  # outward unit normal
    curvature: np.ndarray
    h: float

    @property
    def N(self) -> int:
        return len(self.t)

    @property
    def weights(self) -> np.ndarray:
        return self.speed * self.h


def _radial_curve(coeffs):
    def fn(t):
        r = sum(c * np.cos(k * t) for k, c in coeffs)
        r1 = sum(-k * c * np.sin(k * t) for k, c in coeffs)
        r2 = sum(-k * k * c * np.cos(k * t) for k, c in coeffs)
        ct, st = np.cos(t), np.sin(t)
        pos = np.column_stack([r * ct, r * st])
        d1 = np.column_stack([r1 * ct - r * st, r1 * st + r * ct])
        d2 = np.column_stack([(r2 - r) * ct - 2 * r1 * st, (r2 - r) * st + 2 * r1 * ct])
        return pos, d1, d2
    return fn


def make_curve(kind: str = "circle", N: int = 64, *, a: float = 1.0, b: float = 1.0,
               coeffs=DEFAULT_WOBBLE) -> CurveGeometry:
    """Sample a circle, an ellipse ``(a cos t, b sin t)`` or a wobbly radial curve.

    ``coeffs`` is a sequence of ``(k, c_k)`` giving ``r(t) = sum c_k cos(k t)``.
    """
    if N < 16 or N % 2:
        raise ValueError("N must be even and at least 16")
    h = 2.0 * math.pi / N
    t = h * np.arange(N)
    if kind == "circle":
        fn = _radial_curve(((0, 1.0),))
    elif kind == "ellipse":
        if a <= 0 or b <= 0:
            raise ValueError("ellipse semi-axes must be positive")

        def fn(tt):
            c, s = np.cos(tt), np.sin(tt)
            return (np.column_stack([a * c, b * s]), np.column_stack([-a * s, b * c]),
                    np.column_stack([-a * c, -b * s]))
    elif kind == "wobbly":
        fn = _radial_curve(tuple(coeffs))
    else:
        raise ValueError(f"unknown curve kind {kind!r}")
    pos, d1, d2 = fn(t)
    speed = np.hypot(d1[:, 0], d1[:, 1])
    if np.any(speed <= 1e-12):
        raise ValueError("degenerate parameterization: |rho'| vanishes")
    normal = np.column_stack([d1[:, 1], -d1[:, 0]]) / speed[:, None]
    curv = (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]) / speed**3
    return CurveGeometry(t, pos, d1, d2, speed, normal, curv, h)


@dataclass(frozen=True)
class SurfaceGrid:
    """Uniform ``nu x nv`` grid on a parametric surface, flattened row-major.

    Node ``(i, j)`` sits at parameter ``(u0 + i h, v0 + j h)``; the flat index
    is ``i * nv + j``.
    """

    nu: int
    nv: int
    h: float
    pos: np.ndarray  # (n, 3)
    ru: np.ndarray
    rv: np.ndarray
    J: np.ndarray
    normal: np.ndarray
    E: np.ndarray
    F: np.ndarray
    G: np.ndarray
    periodic: bool
    params: np.ndarray  # (n, 2)
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.nu * self.nv

    def form(self, k: int) -> QuadraticForm:
        return QuadraticForm(float(self.E[k]), float(self.F[k]), float(self.G[k]))

    def index(self, i, j):
        if self.periodic:
            return (np.asarray(i) % self.nu) * self.nv + np.asarray(j) % self.nv
        i, j = np.asarray(i), np.asarray(j)
        if np.any((i < 0) | (i >= self.nu) | (j < 0) | (j >= self.nv)):
            raise IndexError("offset leaves the patch")
        return i * self.nv + j

    def ij(self, k):
        return np.divmod(np.asarray(k), self.nv)


def _surface(nu, nv, h, pos, ru, rv, periodic, params, meta, orient=1.0) -> SurfaceGrid:
    cross = orient * np.cross(ru, rv)
    J = np.linalg.norm(cross, axis=1)
    if np.any(J <= 0):
        raise ValueError("degenerate surface parameterization")
    E = np.einsum("ij,ij->i", ru, ru)
    F = np.einsum("ij,ij->i", ru, rv)
    G = np.einsum("ij,ij->i", rv, rv)
    return SurfaceGrid(nu, nv, h, pos, ru, rv, J, cross / J[:, None], E, F, G, periodic, params, meta)


def make_torus(R: float = 1.0, r: float = 0.4, nu: int = 32, nv: int | None = None,
               amplitude: float = 0.0, frequency: int = 0) -> SurfaceGrid:
    """Torus with minor radius ``r(phi) = r + amplitude cos(frequency phi)``.

    ``u`` is the poloidal angle on ``[0, 2 pi)`` with ``nu`` nodes; ``v`` runs
    over ``[0, nv h)`` and maps to the toroidal angle ``phi = v nu / nv``, so
    both directions share the step ``h = 2 pi / nu``. The normal points out of
    the solid torus.
    """
    nv = 2 * nu if nv is None else nv
    if nu < 8 or nv < 8:
        raise ValueError("grid sizes must be at least 8")
    if not (r > 0 and abs(amplitude) < r and R > r + abs(amplitude)):
        raise ValueError("torus parameters give a self-intersecting or degenerate surface")
    h = 2.0 * math.pi / nu
    scale = nu / nv
    th, v = np.meshgrid(h * np.arange(nu), h * np.arange(nv), indexing="ij")
    th, v = th.ravel(), v.ravel()
    ph = scale * v
    rr = r + amplitude * np.cos(frequency * ph)
    rr_p = -amplitude * frequency * np.sin(frequency * ph)
    ct, st, cp, sp = np.cos(th), np.sin(th), np.cos(ph), np.sin(ph)
    rho = R + rr * ct
    pos = np.column_stack([rho * cp, rho * sp, rr * st])
    ru = np.column_stack([-rr * st * cp, -rr * st * sp, rr * ct])
    rphi = np.column_stack([rr_p * ct * cp - rho * sp, rr_p * ct * sp + rho * cp, rr_p * st])
    rv = scale * rphi
    meta = dict(kind="torus", R=R, r=r, amplitude=amplitude, frequency=frequency)
    # rv x ru points out of the solid torus
    return _surface(nu, nv, h, pos, ru, rv, True, np.column_stack([th, v]), meta, orient=-1.0)


def _quartic_terms():
    return [(i, d - i) for d in range(1, 5) for i in range(d, -1, -1)]


def quartic_surface(coeffs, u, v):
    """Position and first partials of the graph ``(u, v, sum c_ij u^i v^j)``."""
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    z = np.zeros_like(u)
    zu = np.zeros_like(u)
    zv = np.zeros_like(u)
    for (i, j), c in coeffs.items():
        z += c * u**i * v**j
        if i:
            zu += c * i * u ** (i - 1) * v**j
        if j:
            zv += c * j * u**i * v ** (j - 1)
    one, zero = np.ones_like(u), np.zeros_like(u)
    pos = np.stack([u, v, z], axis=-1)
    ru = np.stack([one, zero, zu], axis=-1)
    rv = np.stack([zero, one, zv], axis=-1)
    return pos, ru, rv


def make_patch(N: int = 64, *, seed: int = 1, half_width: float = 0.75,
               coeffs=None, coeff_scale: float = 2.0) -> SurfaceGrid:
    """Graph ``(u, v, z(u, v))`` of a quartic over ``[-a, a]^2`` with ``(N+1)^2`` nodes.

    ``z`` has terms of degree 1 to 4 with seeded standard normal coefficients
    scaled by ``coeff_scale``; pass ``coeffs`` (dict ``(i, j) -> c``) to fix
    them. The center node sits at the parameter origin.
    """
    if N < 8 or N % 2:
        raise ValueError("N must be even and at least 8")
    if coeffs is None:
        rng = np.random.default_rng(seed)
        terms = _quartic_terms()
        coeffs = dict(zip(terms, coeff_scale * rng.standard_normal(len(terms))))
    h = 2.0 * half_width / N
    g = -half_width + h * np.arange(N + 1)
    g[N // 2] = 0.0
    u, v = np.meshgrid(g, g, indexing="ij")
    u, v = u.ravel(), v.ravel()
    pos, ru, rv = quartic_surface(coeffs, u, v)
    meta = dict(kind="patch", seed=seed, half_width=half_width, coeffs=dict(coeffs))
    return _surface(N + 1, N + 1, h, pos, ru, rv, False, np.column_stack([u, v]), meta)


def patch_density(u, v, a: float, b: float, c: float = 2400.0):
    """``(a cos(a + u) + b sin(b + v)) exp(-c (u^2 + v^2)^4)``."""
    return (a * np.cos(a + u) + b * np.sin(b + v)) * np.exp(-c * (u * u + v * v) ** 4)


def chordal_r2(grid: SurfaceGrid, target: int, source) -> np.ndarray:
    """Squared distance between embedded nodes (indices wrap on tori)."""
    d = grid.pos[source] - grid.pos[target]
    return np.einsum("...i,...i->...", d, d)


def bending_r2_minus_q(grid: SurfaceGrid, target: int, offsets: np.ndarray) -> np.ndarray:
    """``r^2 - Q(u)`` at integer offsets from ``target``.

    With ``d = rho(u) - rho(0)`` and the linearization ``L = rho_u u + rho_v v``
    the difference is formed as ``(d - L) . (d + L)``, avoiding the cancellation
    of subtracting two ``O(h^2)`` numbers.
    """
    i0, j0 = grid.ij(target)
    src = grid.index(i0 + offsets[:, 0], j0 + offsets[:, 1])
    d = grid.pos[src] - grid.pos[target]
    uv = offsets * grid.h
    L = uv[:, :1] * grid.ru[target] + uv[:, 1:] * grid.rv[target]
    return np.einsum("ij,ij->i", d - L, d + L)


def export_csv(path, geom) -> None:
    """Write a node table for a curve or surface grid."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        if isinstance(geom, CurveGeometry):
            w.writerow(["t", "x", "y", "nx", "ny", "speed", "curvature"])
            for k in range(geom.N):
                w.writerow(["%.16e" % x for x in (geom.t[k], *geom.pos[k], *geom.normal[k],
                                                   geom.speed[k], geom.curvature[k])])
        else:
            w.writerow(["u", "v", "x", "y", "z", "nx", "ny", "nz", "J", "E", "F", "G"])
            for k in range(geom.n):
                w.writerow(["%.16e" % x for x in (*geom.params[k], *geom.pos[k], *geom.normal[k],
                                                   geom.J[k], geom.E[k], geom.F[k], geom.G[k])])
