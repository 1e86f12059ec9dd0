"""Correction stencils and moment-fitted weights for the 3D zeta quadrature.

For a kernel term ``phi / r^p`` with ``phi = O(u^(2q))`` and target order
``P``, the m-th bending term ``(r^2 - Q)^m phi / Q^(m + p/2)`` is corrected on
the stencil ``U(K1, K2)`` by weights ``tau`` solving

    sum_{(mu, nu)} mu^(2k-l) nu^l tau_{mu,nu} = -W^s[u^(2k-l) v^l],   s = 2m + p,

for ``K1 <= k <= K2`` and ``0 <= l <= 2k``, together with symmetry conditions.
The symmetry conditions are imposed by construction: unknowns are one value
per symmetry orbit, which makes the moment system square.
"""

from __future__ import annotations

import math
import struct
import threading
from dataclasses import dataclass
from math import ceil

import numpy as np

from .epstein import QuadraticForm
from .wigner import wigner_moments

__all__ = [
    "Stencil",
    "WeightSet",
    "PlanTerm",
    "CorrectionPlan",
    "ConditioningError",
    "stencil_size",
    "build_stencil",
    "solve_weights",
    "plan_bounds",
    "build_correction_plan",
    "WeightCache",
    "dump_weightsets",
    "load_weightsets",
]

RESIDUAL_TOL = 1e-9


class ConditioningError(ArithmeticError):
    """The moment system could not be solved to the required residual."""


def stencil_size(K1: int, K2: int) -> int:
    """Closed-form point count of ``U(K1, K2)``."""
    return 2 * (K1 + K2) * (K2 - K1 + 1) + 4 * K2 + (1 if K1 == 0 else 0)


@dataclass(frozen=True)
class Stencil:
    """Offsets ``K1 <= |mu| + |nu| <= K2 + 1`` with ``max(|mu|, |nu|) <= K2``."""

    K1: int
    K2: int
    points: np.ndarray  # (n, 2) int, lexicographic

    def __len__(self) -> int:
        return len(self.points)

    @property
    def radius(self) -> int:
        return int(np.abs(self.points).max()) if len(self.points) else 0


def build_stencil(K1: int, K2: int) -> Stencil:
    if not 0 <= K1 <= K2:
        raise ValueError(f"stencil needs 0 <= K1 <= K2, got K1={K1}, K2={K2}")
    pts = [(mu, nu)
           for mu in range(-K2, K2 + 1)
           for nu in range(-K2, K2 + 1)
           if K1 <= abs(mu) + abs(nu) <= K2 + 1]
    arr = np.array(pts, dtype=int)
    arr.setflags(write=False)
    assert len(arr) == stencil_size(K1, K2)
    return Stencil(K1, K2, arr)


def _orbit_basis(st: Stencil) -> np.ndarray:
    """Matrix ``B`` with ``tau = B @ theta``, one column per symmetry orbit."""
    index = {tuple(p): i for i, p in enumerate(st.points.tolist())}
    cols = []
    seen = set()
    for (mu, nu) in st.points.tolist():
        if (mu, nu) in seen:
            continue
        layer = abs(mu) + abs(nu)
        col = np.zeros(len(st))
        if layer == st.K2 + 1:
            # odd under mu -> -mu, even under (mu, nu) -> (-mu, -nu)
            orbit = {(mu, nu): 1.0, (-mu, -nu): 1.0, (-mu, nu): -1.0, (mu, -nu): -1.0}
        elif layer == st.K1:
            orbit = {(mu, nu): 1.0, (-mu, -nu): 1.0, (-mu, nu): 1.0, (mu, -nu): 1.0}
        else:
            orbit = {(mu, nu): 1.0, (-mu, -nu): 1.0}
        for pt, sign in orbit.items():
            col[index[pt]] = sign
            seen.add(pt)
        cols.append(col)
    return np.column_stack(cols)


def _moment_rows(st: Stencil, scale: float) -> tuple[np.ndarray, list[tuple[int, int]]]:
    mu = st.points[:, 0] / scale
    nu = st.points[:, 1] / scale
    rows, labels = [], []
    for k in range(st.K1, st.K2 + 1):
        for l in range(2 * k + 1):
            rows.append(mu ** (2 * k - l) * nu**l)
            labels.append((k, l))
    return np.array(rows), labels


@dataclass(frozen=True)
class WeightSet:
    """Fitted weights ``tau`` on a stencil for singularity power ``s``."""

    stencil: Stencil
    s: float
    Q: QuadraticForm
    tau: np.ndarray
    residual: float  # max scaled moment residual

    def moments(self, k: int, l: int) -> float:
        p = self.stencil.points
        return float(np.sum(p[:, 0].astype(float) ** (2 * k - l) * p[:, 1].astype(float) ** l * self.tau))


def solve_weights(s: float, Q: QuadraticForm, K1: int, K2: int) -> WeightSet:
    """Solve the moment-fitting system on ``U(K1, K2)``.

    Offsets are scaled by ``1/K2`` before the solve (row ``k`` is multiplied
    by ``K2^(-2k)``), which keeps the monomial rows of comparable size.
    """
    st = build_stencil(K1, K2)
    scale = float(max(K2, 1))
    A, labels = _moment_rows(st, scale)
    B = _orbit_basis(st)
    AB = A @ B
    if AB.shape[0] != AB.shape[1]:
        raise AssertionError(f"moment system for U({K1},{K2}) is {AB.shape}, not square")
    rhs = np.concatenate([-wigner_moments(s, Q, k) * scale ** (-2 * k) for k in range(K1, K2 + 1)])
    try:
        theta = np.linalg.solve(AB, rhs)
    except np.linalg.LinAlgError as exc:
        raise ConditioningError(f"singular moment system U({K1},{K2}), s={s}, Q={Q}") from exc
    # one step of iterative refinement
    r = rhs - AB @ theta
    theta = theta + np.linalg.solve(AB, r)
    r = rhs - AB @ theta
    res = float(np.max(np.abs(r)) / max(1.0, np.max(np.abs(rhs))))
    if not res <= RESIDUAL_TOL:
        raise ConditioningError(
            f"moment residual {res:.3e} for U({K1},{K2}), s={s}, Q={Q}, cond={np.linalg.cond(AB):.3e}")
    tau = B @ theta
    tau.setflags(write=False)
    return WeightSet(st, float(s), Q, tau, res)


@dataclass(frozen=True)
class PlanTerm:
    """Weights for expansion index ``m`` with binomial factor ``C(-p/2, m)``."""

    m: int
    K1: int
    K2: int
    binom: float
    weights: WeightSet


@dataclass(frozen=True)
class CorrectionPlan:
    p: int
    q: int
    P: int
    M: int
    terms: tuple[PlanTerm, ...]

    @property
    def radius(self) -> int:
        return max((t.weights.stencil.radius for t in self.terms), default=0)


def _binom_half(p: int, m: int) -> float:
    # generalized binomial C(-p/2, m)
    val = 1.0
    for j in range(m):
        val *= (-0.5 * p - j) / (j + 1)
    return val


def plan_bounds(p: int, q: int, P: int) -> list[tuple[int, int, int]]:
    """``[(m, K1^m, K2^m)]`` for the expansion indices that need correcting."""
    if p not in (1, 3, 5):
        raise ValueError("p must be 1, 3 or 5")
    if q < 0 or P < 1:
        raise ValueError("need q >= 0 and P >= 1")
    half = ceil((P + p) / 2)
    M = 2 * half - 2 * q - 4
    out = []
    for m in range(0, max(M, -1) + 1):
        K1 = q + ceil(3 * m / 2)
        K2 = half + m - 2
        if K1 <= K2:
            out.append((m, K1, K2))
    return out


class WeightCache:
    """Exact-match cache of weight sets keyed by ``(s, K1, K2, quantized Q)``."""

    def __init__(self, digits: int = 12):
        self.digits = digits
        self._data: dict = {}
        self._lock = threading.Lock()

    def _key(self, s, Q, K1, K2):
        qz = tuple(float(f"{x:.{self.digits}g}") for x in (Q.E, Q.F, Q.G))
        return (float(s), K1, K2) + qz

    def get(self, s: float, Q: QuadraticForm, K1: int, K2: int) -> WeightSet:
        key = self._key(s, Q, K1, K2)
        ws = self._data.get(key)
        if ws is None:
            ws = solve_weights(s, QuadraticForm(*key[3:]), K1, K2)
            with self._lock:
                self._data[key] = ws
        return ws

    def __len__(self) -> int:
        return len(self._data)


def build_correction_plan(p: int, q: int, P: int, Q: QuadraticForm,
                          cache: WeightCache | None = None) -> CorrectionPlan:
    half = ceil((P + p) / 2)
    M = 2 * half - 2 * q - 4
    terms = []
    for m, K1, K2 in plan_bounds(p, q, P):
        s = 2 * m + p
        ws = cache.get(s, Q, K1, K2) if cache is not None else solve_weights(s, Q, K1, K2)
        terms.append(PlanTerm(m, K1, K2, _binom_half(p, m), ws))
    return CorrectionPlan(p, q, P, M, tuple(terms))


_MAGIC = b"ZQWS"
_VERSION = 1


def dump_weightsets(path, weightsets) -> None:
    """Write weight sets to a little-endian binary file.

    Layout: ``b"ZQWS"``, uint32 version, uint32 count, then per set: int32 K1,
    int32 K2, float64 s, E, F, G, uint32 n, n pairs of int32 offsets, n float64
    weights.
    """
    with open(path, "wb") as fh:
        fh.write(_MAGIC + struct.pack("<II", _VERSION, len(weightsets)))
        for ws in weightsets:
            st = ws.stencil
            fh.write(struct.pack("<ii4dI", st.K1, st.K2, ws.s, ws.Q.E, ws.Q.F, ws.Q.G, len(st)))
            fh.write(np.ascontiguousarray(st.points, dtype="<i4").tobytes())
            fh.write(np.ascontiguousarray(ws.tau, dtype="<f8").tobytes())


def load_weightsets(path) -> list[WeightSet]:
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:4] != _MAGIC:
        raise ValueError("not a weight-set file")
    version, count = struct.unpack_from("<II", data, 4)
    if version != _VERSION:
        raise ValueError(f"unsupported weight-set version {version}")
    off = 12
    out = []
    hdr = struct.calcsize("<ii4dI")
    for _ in range(count):
        K1, K2, s, E, F, G, n = struct.unpack_from("<ii4dI", data, off)
        off += hdr
        pts = np.frombuffer(data, dtype="<i4", count=2 * n, offset=off).reshape(n, 2).astype(int)
        off += 8 * n
        tau = np.frombuffer(data, dtype="<f8", count=n, offset=off).copy()
        off += 8 * n
        st = build_stencil(K1, K2)
        if not np.array_equal(st.points, pts):
            raise ValueError("stencil offsets in file do not match U(K1, K2)")
        tau.setflags(write=False)
        out.append(WeightSet(st, s, QuadraticForm(E, F, G), tau, math.nan))
    return out
