"""Wigner limits of ``u^a v^b / Q(u, v)^(s/2)``.

The production path expresses each even-degree limit as a parametric
derivative of the Epstein zeta function. The oracle path works from the
definition itself: lattice sum over ``0 < |i|_inf <= N`` minus the (finite
part) integral over the square ``|u|_inf <= N + 1/2``, with the boundary
terms, which are powers ``L^(deg - s - 2j)`` of ``L = N + 1/2``, removed by a
least-squares Richardson fit over several ``N``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .epstein import QuadraticForm, epstein_partial_derivatives, epstein_zeta

__all__ = [
    "Monomial",
    "WignerOracleConfig",
    "gamma_ratio",
    "wigner_limit",
    "wigner_moments",
    "square_integral",
    "lattice_minus_integral",
    "wigner_oracle",
]


@dataclass(frozen=True)
class Monomial:
    """``u**a * v**b``."""

    a: int
    b: int

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise ValueError("monomial powers must be nonnegative")

    @property
    def degree(self) -> int:
        return self.a + self.b


@dataclass(frozen=True)
class WignerOracleConfig:
    """Resolution ladder for the definition-based oracle.

    ``n_values`` are the half-widths ``N`` of the lattice squares and
    ``n_terms`` the number of boundary powers removed by the fit. No bump
    function is used, so the oracle is limited to cases where the sum minus
    integral has a pure power-law boundary expansion (``deg - s`` odd).
    """

    n_values: tuple[int, ...] = (10, 14, 20, 28, 40, 56, 80)
    n_terms: int = 5
    gauss_nodes: int = 48


def gamma_ratio(s: float, n: int) -> float:
    """``Gamma(1 - s/2) / Gamma(n + 1 - s/2)`` as a finite product."""
    prod = 1.0
    for j in range(n):
        f = 1.0 - 0.5 * s + j
        if f == 0:
            raise ValueError(f"Wigner prefactor is singular for s={s}, n={n}")
        prod *= f
    if (1.0 - 0.5 * s) <= 0 and float(1.0 - 0.5 * s).is_integer():
        raise ValueError(f"Wigner prefactor is singular for s={s}")
    return 1.0 / prod


def wigner_limit(s: float, Q: QuadraticForm, m: Monomial) -> float:
    """Wigner limit ``W^s[u^a v^b]`` for the form ``Q``."""
    if m.degree % 2:
        return 0.0
    n = m.degree // 2
    if n == 0:
        return epstein_zeta(s, Q)
    pref = gamma_ratio(s, n)
    dEF, dGF = epstein_partial_derivatives(s - 2 * n, Q, n)
    l = m.b
    val = dEF[l] if l <= n else dGF[2 * n - l]
    return pref * float(val)


def wigner_moments(s: float, Q: QuadraticForm, k: int) -> np.ndarray:
    """``[W^s[u^(2k-l) v^l] for l = 0..2k]``."""
    if k == 0:
        return np.array([epstein_zeta(s, Q)])
    pref = gamma_ratio(s, k)
    dEF, dGF = epstein_partial_derivatives(s - 2 * k, Q, k)
    vals = np.concatenate([dEF, dGF[::-1][1:]])
    return pref * vals


def _octant_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(n)
    edges = np.linspace(0.0, 2.0 * np.pi, 9)
    th = np.concatenate([0.5 * (b - a) * x + 0.5 * (b + a) for a, b in zip(edges[:-1], edges[1:])])
    wt = np.concatenate([0.5 * (b - a) * w for a, b in zip(edges[:-1], edges[1:])])
    return th, wt


def square_integral(s: float, Q: QuadraticForm, m: Monomial, half_width: float,
                    gauss_nodes: int = 48) -> float:
    """Finite-part integral of ``u^a v^b Q^(-s/2)`` over ``|u|_inf <= half_width``.

    In polar coordinates the radial integral is ``rho(theta)^(alpha) / alpha``
    with ``alpha = deg + 2 - s`` (analytically continued when ``alpha < 0``).
    """
    alpha = m.degree + 2.0 - s
    if m.degree % 2:
        # odd under (u, v) -> (-u, -v) on a symmetric square
        return 0.0
    if alpha == 0:
        raise ValueError("logarithmic case deg + 2 = s is not supported")
    th, wt = _octant_rule(gauss_nodes)
    # nodes on [0, pi) only; theta + pi is evaluated as (-cos, -sin) so that
    # odd monomials cancel exactly
    half = len(th) // 2
    c, sn = np.cos(th[:half]), np.sin(th[:half])
    q = Q(c, sn)
    rho = half_width / np.maximum(np.abs(c), np.abs(sn))
    radial = q ** (-0.5 * s) * rho**alpha / alpha
    paired = (c**m.a * sn**m.b + (-c) ** m.a * (-sn) ** m.b) * radial
    return math.fsum(paired * wt[:half])


def lattice_minus_integral(s: float, Q: QuadraticForm, m: Monomial, N: int,
                           gauss_nodes: int = 48) -> float:
    """``sum_{0<|i|<=N} f(i) - FP int_{|u|<=N+1/2} f(u) du`` for ``f = u^a v^b Q^(-s/2)``."""
    r = np.arange(-N, N + 1, dtype=float)
    i, j = r[:, None], r[None, :]
    q = Q(i, j)
    q[N, N] = 1.0
    f = i**m.a * j**m.b * q ** (-0.5 * s)
    f[N, N] = 0.0
    # f[::-1, ::-1] holds f(-i, -j); pairing makes odd monomials cancel exactly
    paired = f + f[::-1, ::-1]
    lattice = math.fsum(np.sum(paired[N + 1:], axis=1)) + math.fsum(paired[N, N + 1:])
    return lattice - square_integral(s, Q, m, N + 0.5, gauss_nodes)


def wigner_oracle(s: float, Q: QuadraticForm, m: Monomial,
                  cfg: WignerOracleConfig | None = None) -> float:
    """Definition-based Wigner limit with Richardson removal of boundary terms.

    For ``s > 2`` and ``m = 1`` this is the tail-corrected lattice sum for
    ``Z(s; Q)``, since the finite-part integral over the square equals minus
    the integral over its exterior.
    """
    cfg = cfg or WignerOracleConfig()
    d = m.degree - s
    if m.degree % 2 == 0 and float(d).is_integer() and int(d) % 2 == 0 and d >= 0:
        raise ValueError("deg - s even and nonnegative gives logarithmic boundary terms")
    if len(cfg.n_values) < cfg.n_terms + 1:
        raise ValueError("need more resolutions than fitted boundary terms")
    vals = np.array([lattice_minus_integral(s, Q, m, n, cfg.gauss_nodes) for n in cfg.n_values])
    if m.degree % 2:
        return float(vals[-1])
    L = np.array(cfg.n_values, dtype=float) + 0.5
    cols = [np.ones_like(L)] + [(L / L[-1]) ** (d - 2 * j) for j in range(cfg.n_terms)]
    coef, *_ = np.linalg.lstsq(np.column_stack(cols), vals, rcond=None)
    return float(coef[0])
