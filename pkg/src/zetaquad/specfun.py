"""Real special functions used by the lattice-sum machinery.

The incomplete gamma routines work on the scaled quantity

    e_a(x) = Gamma(a, x) * x**(-a) = int_1^inf t**(a-1) exp(-x t) dt,

which is finite and well scaled for every real ``a`` and ``x > 0``. All array
routines are vectorized over ``x`` with ``a`` a scalar.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from math import comb

import numpy as np
from scipy.special import exp1

__all__ = [
    "ZetaConstants",
    "ZETA",
    "gamma",
    "scaled_upper_gamma",
    "upper_incomplete_gamma",
    "combined_gamma",
    "combined_gamma_orders",
    "bell_polynomial",
    "bell_table",
]

_EPS = np.finfo(float).eps
_TINY = 1e-300
_MAXITER = 2000


@dataclass(frozen=True)
class ZetaConstants:
    """Riemann zeta values entering the 1D hypersingular rule."""

    zeta2: float = math.pi**2 / 6.0
    zeta0: float = -0.5

    @staticmethod
    def zeta_neg_even(k: int) -> float:
        if k < 1:
            raise ValueError("trivial zeros are zeta(-2k) for k >= 1")
        return 0.0


ZETA = ZetaConstants()


def _is_nonpositive_integer(x: float) -> bool:
    return x <= 0 and float(x).is_integer()


def gamma(x: float) -> float:
    """Gamma function on the real line; raises at the poles 0, -1, -2, ..."""
    if _is_nonpositive_integer(x):
        raise ValueError(f"gamma has a pole at x={x}")
    try:
        return math.gamma(x)
    except OverflowError:
        # beyond the float range, e.g. subnormal x; keep the sign of the limit
        return math.copysign(math.inf, x) if abs(x) < 1.0 else math.inf


def _cf_scaled(a: float, x: np.ndarray) -> np.ndarray:
    # modified Lentz on the Legendre continued fraction; returns exp(-x) * h.
    # Used for x >= max(1, a + 1), where every b_n is positive. Converged
    # entries keep multiplying by factors equal to 1 within rounding.
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _TINY)
    d = 1.0 / np.where(np.abs(b) < _TINY, _TINY, b)
    h = d.copy()
    done = np.zeros(x.shape, dtype=bool)
    for i in range(1, _MAXITER + 1):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        c = b + an / c
        d = 1.0 / d
        delta = d * c
        h *= delta
        # converged entries may keep flickering by one ulp, so latch them
        done |= np.abs(delta - 1.0) < _EPS
        if done.all():
            break
    else:
        raise ArithmeticError("incomplete gamma continued fraction did not converge")
    return np.exp(-x) * h


def _series_lower_scaled(a: float, x: np.ndarray) -> np.ndarray:
    # gamma(a, x) * x**(-a) = exp(-x) * sum_n x**n / (a (a+1) ... (a+n)),  a > 0
    term = np.full_like(x, 1.0 / a)
    total = term.copy()
    ap = a
    for _ in range(_MAXITER):
        ap += 1.0
        term = term * x / ap
        total += term
        if np.all(np.abs(term) <= np.abs(total) * _EPS):
            break
    else:
        raise ArithmeticError("incomplete gamma series did not converge")
    return np.exp(-x) * total


def _small_x_scaled(a: float, x: np.ndarray) -> np.ndarray:
    """e_a(x) for 0 < x < max(1, a + 1)."""
    if a > 0:
        return math.gamma(a) * x ** (-a) - _series_lower_scaled(a, x)
    # downward recurrence e_a = (x e_{a+1} - exp(-x)) / a; amplification x/|a| < 1 here
    n = math.floor(-a) + 1
    a0 = a + n
    if float(a).is_integer():
        n -= 1
        a0 = 0.0
        val = exp1(x)
    else:
        val = math.gamma(a0) * x ** (-a0) - _series_lower_scaled(a0, x)
    ex = np.exp(-x)
    for j in range(1, n + 1):
        aj = a0 - j
        val = (x * val - ex) / aj
    return val


def scaled_upper_gamma(a: float, x) -> np.ndarray:
    """``Gamma(a, x) * x**(-a)`` for real ``a`` and ``x > 0`` (array in ``x``)."""
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0):
        raise ValueError("upper incomplete gamma requires x > 0")
    out = np.empty_like(x)
    flat_x = x.reshape(-1)
    flat_out = out.reshape(-1)
    small = flat_x < (max(1.0, a + 1.0) if a > 0 else 1.0)
    if small.any():
        flat_out[small] = _small_x_scaled(a, flat_x[small])
    if (~small).any():
        flat_out[~small] = _cf_scaled(a, flat_x[~small])
    return out


def upper_incomplete_gamma(a: float, x):
    """Upper incomplete gamma ``Gamma(a, x) = int_x^inf t**(a-1) e**(-t) dt``.

    Valid for any real ``a``. For ``a <= 0`` with small ``x`` the value is
    reached by downward recurrence from a seed in ``(0, 1]``; elsewhere a
    series (``a > 0``, ``x < a + 1``) or the Legendre continued fraction is used.
    """
    xa = np.asarray(x, dtype=float)
    val = scaled_upper_gamma(a, xa) * xa**a
    return float(val) if np.ndim(x) == 0 else val


def combined_gamma(x, s: float, k: int = 0):
    """Shifted combined incomplete gamma ``G_k(x; s)``.

    ``G_k(x) = Gamma(s1+k, x) x**-(s1+k) + Gamma(s2+k, x) x**-(s2+k)`` with
    ``s1 = s/2`` and ``s2 = 1 - s1``. Satisfies ``G_k' = -G_{k+1}``.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    xa = np.asarray(x, dtype=float)
    s1 = 0.5 * s
    s2 = 1.0 - s1
    val = scaled_upper_gamma(s1 + k, xa) + scaled_upper_gamma(s2 + k, xa)
    return float(val) if np.ndim(x) == 0 else val


def _scaled_upper_gamma_ladder(a: float, x: np.ndarray, kmax: int) -> list[np.ndarray]:
    # e_{a+1} = (a e_a + exp(-x)) / x adds positive terms once a > 0, so the
    # upward recurrence is stable there; evaluate directly while a + k <= 0
    out = []
    ex = np.exp(-x)
    val = None
    for k in range(kmax + 1):
        ak = a + k
        if val is None or ak - 1.0 <= 0:
            val = scaled_upper_gamma(ak, x)
        else:
            val = ((ak - 1.0) * val + ex) / x
        out.append(val)
    return out


def combined_gamma_orders(x: np.ndarray, s: float, kmax: int) -> np.ndarray:
    """Stack ``[G_0(x), ..., G_kmax(x)]`` with shape ``(kmax + 1,) + x.shape``."""
    xa = np.asarray(x, dtype=float)
    s1 = 0.5 * s
    first = _scaled_upper_gamma_ladder(s1, xa, kmax)
    second = _scaled_upper_gamma_ladder(1.0 - s1, xa, kmax)
    return np.stack([u + v for u, v in zip(first, second)])


def bell_table(xs, n: int) -> list[list]:
    """All partial Bell polynomials ``B[j][m]`` for ``0 <= m <= j <= n``.

    ``xs[i-1]`` holds ``x_i`` (scalars or equally shaped arrays); only the
    first ``n`` entries are read. Uses
    ``B_{j,m} = sum_i C(j-1, i-1) x_i B_{j-i, m-1}``.
    """
    if n < 0:
        raise ValueError("n must be nonnegative")
    if len(xs) < n:
        raise ValueError(f"need {n} arguments, got {len(xs)}")
    zero = 0.0 * xs[0] if n > 0 else 0.0
    B = [[zero] * (j + 1) for j in range(n + 1)]
    B[0][0] = zero + 1.0
    for j in range(1, n + 1):
        for m in range(1, j + 1):
            acc = zero
            for i in range(1, j - m + 2):
                acc = acc + comb(j - 1, i - 1) * xs[i - 1] * B[j - i][m - 1]
            B[j][m] = acc
    return B


def bell_polynomial(x, n: int, m: int):
    """Partial Bell polynomial ``B_{n,m}(x_1, ..., x_{n-m+1})``."""
    if m < 0 or n < 0:
        raise ValueError("n and m must be nonnegative")
    if m > n:
        raise ValueError(f"B_{{n,m}} requires m <= n (got n={n}, m={m})")
    if n == 0:
        return 1.0
    xs = list(x) + [0.0] * max(0, n - len(x))
    return bell_table(xs, n)[n][m]
