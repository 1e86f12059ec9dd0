import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetaquad.epstein import (
    MAX_DERIVATIVE_ORDER,
    Direction,
    QuadraticForm,
    epstein_mixed_derivative,
    epstein_mixed_derivatives,
    epstein_partial_derivatives,
    epstein_workspace,
    epstein_zeta,
    truncation_cutoff,
)
from zetaquad.specfun import gamma

# Square lattice: sum' (i^2 + j^2)^(-w) = 4 zeta(w) beta(w), continued through the
# Hurwitz form of the Dirichlet beta; 30-digit mpmath evaluation
Z_SQUARE = {
    1.0: -3.9002649200019558828,
    3.0: 9.0336216831009503057,
    4.0: 6.0268120396919401235,
    5.0: 5.0902582336654829457,
    6.0: 4.6589136156038434402,
}

forms = st.builds(
    lambda e, g, t: QuadraticForm(e, t * math.sqrt(e * g), g),
    st.floats(0.3, 3.0), st.floats(0.3, 3.0), st.floats(-0.8, 0.8),
)
s_values = st.sampled_from([-3.0, -1.0, 0.5, 1.0, 1.5, 3.0, 5.0])


def _brute(s, Q, n=400):
    i, j = np.meshgrid(np.arange(-n, n + 1.0), np.arange(-n, n + 1.0), indexing="ij")
    q = Q(i, j)
    q[n, n] = np.inf
    return math.fsum((q ** (-s / 2)).ravel())


@pytest.mark.parametrize("s", sorted(Z_SQUARE))
def test_square_lattice_closed_form(s):
    assert epstein_zeta(s, QuadraticForm(1.0, 0.0, 1.0)) == pytest.approx(Z_SQUARE[s], rel=1e-13)


def test_brute_sum_large_s():
    # s = 8 converges fast enough for a plain truncated sum
    Q = QuadraticForm(2.0, 0.3, 1.5)
    assert epstein_zeta(8.0, Q) == pytest.approx(_brute(8.0, Q, 200), rel=1e-12)


@given(forms, s_values)
@settings(max_examples=25, deadline=None)
def test_swap_symmetry(Q, s):
    assert epstein_zeta(s, Q) == pytest.approx(epstein_zeta(s, Q.swapped()), rel=1e-12, abs=1e-12)


@given(forms, s_values, st.floats(0.2, 5.0))
@settings(max_examples=25, deadline=None)
def test_homogeneity(Q, s, c):
    lhs = epstein_zeta(s, Q.scaled(c))
    assert lhs == pytest.approx(c ** (-s / 2) * epstein_zeta(s, Q), rel=1e-11, abs=1e-12)


def test_homogeneity_example():
    Q = QuadraticForm(1.3, 0.2, 0.9)
    assert epstein_zeta(1.0, Q.scaled(3.7)) == pytest.approx(3.7**-0.5 * epstein_zeta(1.0, Q), rel=1e-13)


@given(forms, st.sampled_from([0.5, 1.0, 1.5, 3.0, -1.0]))
@settings(max_examples=25, deadline=None)
def test_functional_equation(Q, s):
    Q1 = Q.scaled(1.0 / math.sqrt(Q.D))
    lhs = math.pi ** (-s / 2) * gamma(s / 2) * epstein_zeta(s, Q1)
    rhs = math.pi ** (s / 2 - 1) * gamma(1 - s / 2) * epstein_zeta(2 - s, Q1)
    assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


@pytest.mark.parametrize("s", [1.0, 3.0, 5.0])
def test_truncation_consistency(s):
    Q = QuadraticForm(1.7, -0.4, 0.6)
    a = epstein_zeta(s, Q)
    b = epstein_zeta(s, Q, cutoff=2 * truncation_cutoff(0))
    assert abs(a - b) <= 1e-13 * abs(a)


def test_errors():
    with pytest.raises(ValueError):
        epstein_zeta(2.0, QuadraticForm(1, 0, 1))
    with pytest.raises(ValueError):
        QuadraticForm(1.0, 2.0, 1.0)
    with pytest.raises(ValueError):
        QuadraticForm(-1.0, 0.0, -1.0)
    with pytest.raises(ValueError):
        Direction(0, 0, 0)
    with pytest.raises(ValueError):
        epstein_workspace(1.0, QuadraticForm(1, 0, 1), MAX_DERIVATIVE_ORDER + 1)
    with pytest.raises(ValueError):
        epstein_partial_derivatives(1.0, QuadraticForm(1, 0, 1), 0)


def test_order_zero_is_zeta():
    Q = QuadraticForm(1.3, 0.2, 0.9)
    assert epstein_mixed_derivative(1.0, Q, Direction(1, 0, 0), 0) == epstein_zeta(1.0, Q)
    assert epstein_mixed_derivatives(1.0, Q, Direction(1, 0, 0), 3)[0] == pytest.approx(
        epstein_zeta(1.0, Q), rel=1e-15)


@given(forms, s_values)
@settings(max_examples=20, deadline=None)
def test_euler_identity(Q, s):
    z = epstein_zeta(s, Q)
    d1 = epstein_mixed_derivative(s, Q, Direction(Q.E, Q.F, Q.G), 1)
    assert abs(d1 + 0.5 * s * z) <= 1e-9 * max(1.0, abs(z))


@pytest.mark.parametrize("k", [2, 3, 5])
def test_euler_identity_higher_order(k):
    # along the fixed direction Q, Z(Q + tQ) = (1 + t)^(-s/2) Z(Q), so the k-th
    # derivative is the falling factorial (-s/2)(-s/2 - 1)...(-s/2 - k + 1) Z
    Q, s = QuadraticForm(1.3, 0.2, 0.9), 3.0
    dk = epstein_mixed_derivative(s, Q, Direction(Q.E, Q.F, Q.G), k)
    falling = math.prod(-s / 2 - j for j in range(k))
    assert dk == pytest.approx(falling * epstein_zeta(s, Q), rel=1e-9)


def _z_shift(s, Q, dirn, t):
    return epstein_zeta(s, QuadraticForm(Q.E + t * dirn.L, Q.F + t * dirn.M, Q.G + t * dirn.N))


def test_first_derivative_finite_difference_example():
    Q, s, step = QuadraticForm(1.3, 0.2, 0.9), 1.0, 1e-5
    dirn = Direction(1, 0, 0)
    fd = (_z_shift(s, Q, dirn, step) - _z_shift(s, Q, dirn, -step)) / (2 * step)
    assert epstein_mixed_derivative(s, Q, dirn, 1) == pytest.approx(fd, rel=1e-6)


@pytest.mark.parametrize("s", [1.0, 3.0, -1.0])
@pytest.mark.parametrize("dirn", [Direction(1, 0, 0), Direction(0, 1, 0), Direction(0.3, -0.2, 0.7)])
def test_second_derivative_finite_difference(s, dirn):
    Q, step = QuadraticForm(1.3, 0.2, 0.9), 1e-4
    fd = (_z_shift(s, Q, dirn, step) - 2 * epstein_zeta(s, Q) + _z_shift(s, Q, dirn, -step)) / step**2
    assert epstein_mixed_derivative(s, Q, dirn, 2) == pytest.approx(fd, rel=1e-5)


def test_third_derivative_from_second():
    # central difference of the exact second derivative
    Q, s, step = QuadraticForm(1.1, -0.3, 1.4), 1.0, 1e-5
    dirn = Direction(0.4, 0.5, -0.2)

    def d2(t):
        Qt = QuadraticForm(Q.E + t * dirn.L, Q.F + t * dirn.M, Q.G + t * dirn.N)
        return epstein_mixed_derivative(s, Qt, dirn, 2)
    fd = (d2(step) - d2(-step)) / (2 * step)
    assert epstein_mixed_derivative(s, Q, dirn, 3) == pytest.approx(fd, rel=1e-6)


def test_partial_dF_vanishes_at_F0():
    dEF, dGF = epstein_partial_derivatives(1.0, QuadraticForm(1.4, 0.0, 0.7), 1)
    assert abs(dEF[1]) < 1e-13
    assert abs(dGF[1]) < 1e-13


def test_partial_E_G_symmetry_square():
    dEF, dGF = epstein_partial_derivatives(1.0, QuadraticForm(1.0, 0.0, 1.0), 2)
    assert dEF[0] == pytest.approx(dGF[0], rel=1e-12)
    assert np.allclose(dEF, dGF, rtol=1e-11, atol=1e-13)


def test_partials_second_order_finite_difference():
    Q, s, t = QuadraticForm(1.5, 0.3, 1.1), 1.0, 1e-4
    dEF, dGF = epstein_partial_derivatives(s, Q, 2)

    def z(dE=0.0, dF=0.0, dG=0.0):
        return epstein_zeta(s, QuadraticForm(Q.E + dE, Q.F + dF, Q.G + dG))
    z0 = z()
    dEE = (z(dE=t) - 2 * z0 + z(dE=-t)) / t**2
    dGG = (z(dG=t) - 2 * z0 + z(dG=-t)) / t**2
    # (1/2 d/dF) twice and mixed with E
    dFF = 0.25 * (z(dF=t) - 2 * z0 + z(dF=-t)) / t**2
    dEFm = 0.5 * (z(dE=t, dF=t) - z(dE=t, dF=-t) - z(dE=-t, dF=t) + z(dE=-t, dF=-t)) / (4 * t * t)
    assert dEF[0] == pytest.approx(dEE, rel=1e-5)
    assert dEF[1] == pytest.approx(dEFm, rel=1e-5)
    assert dEF[2] == pytest.approx(dFF, rel=1e-5)
    assert dGF[0] == pytest.approx(dGG, rel=1e-5)
    assert dGF[2] == pytest.approx(dEF[2], rel=1e-12)


def test_partials_order_one_match_unit_directions():
    Q, s = QuadraticForm(1.2, -0.25, 0.8), 3.0
    dEF, dGF = epstein_partial_derivatives(s, Q, 1)
    assert dEF[0] == pytest.approx(epstein_mixed_derivative(s, Q, Direction(1, 0, 0), 1), rel=1e-12)
    assert dGF[0] == pytest.approx(epstein_mixed_derivative(s, Q, Direction(0, 0, 1), 1), rel=1e-12)
    assert dEF[1] == pytest.approx(0.5 * epstein_mixed_derivative(s, Q, Direction(0, 1, 0), 1), rel=1e-12)


@pytest.mark.parametrize("n", [3, 6, 9, 12])
def test_high_order_partials_recombine(n):
    # (a dE + b dF)^n Z = sum_k C(n,k) a^(n-k) (2b)^k dE^(n-k) dF'^k Z with dF' = dF / 2
    Q, s = QuadraticForm(1.3, 0.2, 0.9), 1.0 - 2 * n
    dEF, _ = epstein_partial_derivatives(s, Q, n)
    a, b = 0.6, 0.3
    mixed = epstein_mixed_derivative(s, Q, Direction(a, b, 0.0), n)
    coeffs = [math.comb(n, k) * a ** (n - k) * (2 * b) ** k for k in range(n + 1)]
    assert math.fsum(c * d for c, d in zip(coeffs, dEF)) == pytest.approx(mixed, rel=1e-9)
