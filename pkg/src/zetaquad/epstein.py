"""Epstein zeta function of a binary quadratic form and its parametric derivatives.

``Z(s; E, F, G)`` is the analytic continuation of

    sum_{(i, j) != 0} (E i^2 + 2 F i j + G j^2)^(-s/2)

from ``Re s > 2`` to ``s != 2``. It is evaluated through the rapidly converging
representation

    Z = C(s1) * (-1/(s1 s2) + sum' G_0(pi Q(i, j) / sqrt(D)))

with ``s1 = s/2``, ``s2 = 1 - s1``, ``C(s1) = (pi / sqrt(D))**s1 / Gamma(s1)`` and
``G_0`` the combined incomplete gamma function. Directional derivatives
``(L d/dE + M d/dF + N d/dG)^k Z`` follow from repeated chain rules written
with partial Bell polynomials; plain partials are recovered by solving a small
binomial system over several directions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .specfun import bell_table, combined_gamma_orders

__all__ = [
    "QuadraticForm",
    "Direction",
    "EpsteinWorkspace",
    "MAX_DERIVATIVE_ORDER",
    "truncation_cutoff",
    "epstein_workspace",
    "epstein_zeta",
    "epstein_mixed_derivatives",
    "epstein_mixed_derivative",
    "epstein_partial_derivatives",
]

MAX_DERIVATIVE_ORDER = 12
DEFAULT_TOL = 1e-15


@dataclass(frozen=True)
class QuadraticForm:
    """Positive definite form ``Q(u, v) = E u^2 + 2 F u v + G v^2``."""

    E: float
    F: float
    G: float

    def __post_init__(self):
        if not (self.E > 0 and self.E * self.G - self.F * self.F > 0):
            raise ValueError(f"quadratic form ({self.E}, {self.F}, {self.G}) is not positive definite")

    @property
    def D(self) -> float:
        return self.E * self.G - self.F * self.F

    def __call__(self, u, v):
        return self.E * u * u + 2.0 * self.F * u * v + self.G * v * v

    def swapped(self) -> "QuadraticForm":
        """The form with the roles of ``u`` and ``v`` exchanged."""
        return QuadraticForm(self.G, self.F, self.E)

    def scaled(self, c: float) -> "QuadraticForm":
        return QuadraticForm(c * self.E, c * self.F, c * self.G)


@dataclass(frozen=True)
class Direction:
    """Coefficients of the operator ``L d/dE + M d/dF + N d/dG``."""

    L: float
    M: float
    N: float

    def __post_init__(self):
        if self.L == 0 and self.M == 0 and self.N == 0:
            raise ValueError("direction must be nonzero")


@dataclass
class EpsteinWorkspace:
    """Lattice data shared by every derivative direction at fixed ``(s, Q)``."""

    s: float
    Q: QuadraticForm
    s1: float
    s2: float
    C: float
    cutoff: float
    ij: np.ndarray  # (npts, 2) lattice offsets, origin excluded
    Qtilde: np.ndarray  # pi Q(i, j) / sqrt(D)
    Gk: np.ndarray  # (kmax + 1, npts) values of G_0 ... G_kmax at Qtilde

    @property
    def kmax(self) -> int:
        return self.Gk.shape[0] - 1


def truncation_cutoff(k: int, tol: float = DEFAULT_TOL) -> float:
    """Largest scaled form value ``pi Q / sqrt(D)`` kept in the lattice sums."""
    return -math.log(tol) + 8.0 * (1.0 + k * math.log(2.0 + k))


def _check_s(s: float) -> None:
    if s == 2:
        raise ValueError("Z(s; Q) has a pole at s = 2")
    s1 = 0.5 * s
    if s1 <= 0 and float(s1).is_integer():
        raise ValueError(f"s = {s} (s/2 a nonpositive integer) is not supported")


def _lattice(Q: QuadraticForm, cutoff: float) -> tuple[np.ndarray, np.ndarray]:
    sqD = math.sqrt(Q.D)
    c = cutoff * sqD / math.pi
    imax = int(math.floor(math.sqrt(c * Q.G / Q.D))) + 1
    jmax = int(math.floor(math.sqrt(c * Q.E / Q.D))) + 1
    i, j = np.meshgrid(np.arange(-imax, imax + 1, dtype=float),
                       np.arange(-jmax, jmax + 1, dtype=float), indexing="ij")
    i = i.ravel()
    j = j.ravel()
    qt = math.pi * Q(i, j) / sqD
    keep = (qt <= cutoff) & ((i != 0) | (j != 0))
    return np.column_stack([i[keep], j[keep]]), qt[keep]


def epstein_workspace(s: float, Q: QuadraticForm, kmax: int = 0, *,
                      tol: float = DEFAULT_TOL, cutoff: float | None = None) -> EpsteinWorkspace:
    _check_s(s)
    if not 0 <= kmax <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"derivative order must lie in [0, {MAX_DERIVATIVE_ORDER}]")
    if cutoff is None:
        cutoff = truncation_cutoff(kmax, tol)
    ij, qt = _lattice(Q, cutoff)
    s1 = 0.5 * s
    s2 = 1.0 - s1
    C = (math.pi / math.sqrt(Q.D)) ** s1 / math.gamma(s1)
    Gk = combined_gamma_orders(qt, s, kmax)
    return EpsteinWorkspace(s, Q, s1, s2, C, cutoff, ij, qt, Gk)


def epstein_zeta(s: float, Q: QuadraticForm, *, tol: float = DEFAULT_TOL,
                 cutoff: float | None = None) -> float:
    """Epstein zeta function ``Z(s; Q)`` for real ``s != 2``."""
    ws = epstein_workspace(s, Q, 0, tol=tol, cutoff=cutoff)
    return ws.C * (-1.0 / (ws.s1 * ws.s2) + math.fsum(ws.Gk[0]))


def _direction_array(directions) -> np.ndarray:
    if isinstance(directions, Direction):
        directions = [directions]
    arr = np.array([[d.L, d.M, d.N] if isinstance(d, Direction) else d for d in directions], dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise ValueError("directions must be (L, M, N) triples")
    if np.any(np.all(arr == 0, axis=1)):
        raise ValueError("direction must be nonzero")
    return arr


def _mixed_from_workspace(ws: EpsteinWorkspace, dirs: np.ndarray, kmax: int) -> np.ndarray:
    """Rows of ``[Z^(0), ..., Z^(kmax)]`` for every direction in ``dirs``."""
    if kmax > ws.kmax:
        raise ValueError("workspace was built for a lower derivative order")
    E, F, G, D = ws.Q.E, ws.Q.F, ws.Q.G, ws.Q.D
    sqD = math.sqrt(D)
    L, M, N = dirs[:, 0], dirs[:, 1], dirs[:, 2]
    nd = dirs.shape[0]

    # H = box(log sqrt D); H^(j) = box^j H by the Leibniz recurrence on D(t)/D
    H = (G * L + E * N - 2.0 * F * M) / (2.0 * D)
    K = (L * N - M * M) / D
    Hk = [H]
    if kmax >= 1:
        Hk.append(K - 2.0 * H * H)
    for j in range(2, kmax + 1):
        Hk.append(-2.0 * j * H * Hk[j - 1] - j * (j - 1) * K * Hk[j - 2])

    BH = bell_table(Hk, kmax)
    minus_h = [np.ones(nd)]  # (box - H)^j 1
    plus_h = [np.ones(nd)]  # (box + s1 H)^j 1
    for j in range(1, kmax + 1):
        minus_h.append(sum((-1.0) ** i * BH[j][i] for i in range(1, j + 1)))
        plus_h.append(sum(ws.s1**i * BH[j][i] for i in range(1, j + 1)))

    out = np.empty((nd, kmax + 1))
    out[:, 0] = ws.C * (-1.0 / (ws.s1 * ws.s2) + math.fsum(ws.Gk[0]))
    if kmax == 0:
        return out

    i, j = ws.ij[:, 0], ws.ij[:, 1]
    qt = ws.Qtilde[None, :]
    rt = (math.pi / sqD) * (L[:, None] * i * i + 2.0 * M[:, None] * i * j + N[:, None] * j * j)
    dq = [minus_h[k][:, None] * qt + k * minus_h[k - 1][:, None] * rt for k in range(1, kmax + 1)]
    BQ = bell_table(dq, kmax)
    for k in range(1, kmax + 1):
        gk = sum((-1.0) ** i_ * ws.Gk[i_][None, :] * BQ[k][i_] for i_ in range(1, k + 1))
        val = ws.C * np.sum(gk, axis=1)
        for i_ in range(k):
            val = val - comb(k, i_) * plus_h[k - i_] * out[:, i_]
        out[:, k] = val
    return out


def epstein_mixed_derivatives(s: float, Q: QuadraticForm, direction, kmax: int, *,
                              tol: float = DEFAULT_TOL) -> np.ndarray:
    """``[Z^(0), ..., Z^(kmax)]`` with ``Z^(k) = (L dE + M dF + N dG)^k Z(s; Q)``."""
    dirs = _direction_array(direction)
    ws = epstein_workspace(s, Q, kmax, tol=tol)
    res = _mixed_from_workspace(ws, dirs, kmax)
    return res[0] if isinstance(direction, Direction) or len(dirs) == 1 else res


def epstein_mixed_derivative(s: float, Q: QuadraticForm, direction: Direction, k: int, *,
                             tol: float = DEFAULT_TOL) -> float:
    if k == 0:
        return epstein_zeta(s, Q, tol=tol)
    return float(epstein_mixed_derivatives(s, Q, direction, k, tol=tol)[k])


@lru_cache(maxsize=32)
def _binomial_system(n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = np.arange(n + 1)
    a = np.cos(m * np.pi / (2 * n))
    b = np.sin(m * np.pi / (2 * n))
    k = np.arange(n + 1)
    binom = np.array([comb(n, kk) for kk in k], dtype=float)
    V = binom[None, :] * a[:, None] ** (n - k)[None, :] * b[:, None] ** k[None, :]
    cond = np.linalg.cond(V)
    assert np.isfinite(cond) and cond < 1e8, "binomial system is singular"
    return a, b, np.linalg.inv(V)


@lru_cache(maxsize=4096)
def _partials_cached(s: float, E: float, F: float, G: float, n: int, tol: float):
    Q = QuadraticForm(E, F, G)
    a, b, Vinv = _binomial_system(n)
    zeros = np.zeros_like(a)
    dirs = np.concatenate([np.column_stack([a, 0.5 * b, zeros]),
                           np.column_stack([zeros, 0.5 * b, a])])
    ws = epstein_workspace(s, Q, n, tol=tol)
    mixed = _mixed_from_workspace(ws, dirs, n)[:, n]
    dEF = Vinv @ mixed[: n + 1]
    dGF = Vinv @ mixed[n + 1:]
    dEF.setflags(write=False)
    dGF.setflags(write=False)
    return dEF, dGF


def epstein_partial_derivatives(s: float, Q: QuadraticForm, n: int, *,
                                tol: float = DEFAULT_TOL) -> tuple[np.ndarray, np.ndarray]:
    """All order-``n`` partials in (E, F) and in (G, F).

    Returns ``(dEF, dGF)`` where ``dEF[k] = dE^(n-k) dF'^k Z`` and
    ``dGF[k] = dG^(n-k) dF'^k Z`` with ``dF' = (1/2) d/dF``.
    """
    if not 1 <= n <= MAX_DERIVATIVE_ORDER:
        raise ValueError(f"order must lie in [1, {MAX_DERIVATIVE_ORDER}]")
    _check_s(s)
    return _partials_cached(float(s), float(Q.E), float(Q.F), float(Q.G), int(n), float(tol))
