import itertools
import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zetaquad.specfun import (
    ZETA,
    bell_polynomial,
    bell_table,
    combined_gamma,
    combined_gamma_orders,
    gamma,
    scaled_upper_gamma,
    upper_incomplete_gamma,
)

# mpmath quadrature of int_x^inf t^(a-1) e^(-t) dt at 30 digits
GAMMA_2P5_1P3 = 1.0121136007032034115
GAMMA_M0P5_1P0 = 0.17814771178156069019
GAMMA_M3P5_0P7 = 0.39406680941102707083
# Gamma(1.5, 2) 2^-1.5 + Gamma(-0.5, 2) 2^0.5, same quadrature
G0_S3_X2 = 0.1244902431181865487


def _mp_upper(a, x):
    mp.mp.dps = 30
    return float(mp.quad(lambda t: t ** (a - 1) * mp.e ** (-t), [x, x + 10, x + 40, mp.inf]))


def test_zeta_constants():
    assert ZETA.zeta2 == pytest.approx(math.pi**2 / 6, rel=1e-16)
    assert ZETA.zeta0 == -0.5
    assert ZETA.zeta_neg_even(3) == 0.0
    with pytest.raises(ValueError):
        ZETA.zeta_neg_even(0)


def test_gamma_examples():
    assert gamma(1.0) == 1.0
    assert gamma(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert gamma(5.0) == pytest.approx(24.0, rel=1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0, -7.0])
def test_gamma_poles(x):
    with pytest.raises(ValueError):
        gamma(x)


@given(st.floats(-29.5, 30.0).filter(lambda x: abs(x - round(x)) > 1e-3 or x > 0))
@settings(max_examples=60, deadline=None)
def test_gamma_matches_mpmath(x):
    assert gamma(x) == pytest.approx(float(mp.gamma(x)), rel=1e-13)


def test_upper_gamma_closed_form():
    x = np.array([0.3, 1.0, 4.5, 20.0])
    assert np.allclose(upper_incomplete_gamma(1.0, x), np.exp(-x), rtol=1e-14, atol=0)


def test_upper_gamma_frozen_values():
    assert upper_incomplete_gamma(2.5, 1.3) == pytest.approx(GAMMA_2P5_1P3, rel=1e-13)
    assert upper_incomplete_gamma(-0.5, 1.0) == pytest.approx(GAMMA_M0P5_1P0, rel=1e-13)
    assert upper_incomplete_gamma(-3.5, 0.7) == pytest.approx(GAMMA_M3P5_0P7, rel=1e-13)


def test_negative_order_downward_recurrence_step():
    # Gamma(a, x) = (Gamma(a+1, x) - x^a e^-x) / a
    lhs = upper_incomplete_gamma(-0.5, 1.0)
    rhs = (upper_incomplete_gamma(0.5, 1.0) - math.exp(-1.0)) / -0.5
    assert lhs == pytest.approx(rhs, rel=1e-14)


@pytest.mark.parametrize("a", [-6.0, -4.5, -2.0, -0.5, 0.0, 0.5, 1.7, 3.0, 6.0])
@pytest.mark.parametrize("x", [0.5, 1.0, 2.7, 9.0, 40.0])
def test_upper_gamma_against_quadrature(a, x):
    ref = _mp_upper(a, x)
    assert upper_incomplete_gamma(a, x) == pytest.approx(ref, rel=1e-10)


def test_upper_gamma_domain():
    with pytest.raises(ValueError):
        upper_incomplete_gamma(1.0, 0.0)
    with pytest.raises(ValueError):
        scaled_upper_gamma(1.0, np.array([1.0, -2.0]))


def test_combined_gamma_symmetric_case():
    x = np.array([0.4, 2.0, 7.0])
    assert np.allclose(combined_gamma(x, 1.0), 2.0 * scaled_upper_gamma(0.5, x), rtol=1e-15)


def test_combined_gamma_frozen():
    assert combined_gamma(2.0, 3.0) == pytest.approx(G0_S3_X2, rel=1e-13)


@pytest.mark.parametrize("s", [1.0, 3.0, 5.0, -1.0])
@pytest.mark.parametrize("k", [0, 1, 4])
def test_combined_gamma_derivative(s, k):
    # d/dx G_k = -G_{k+1}
    x, dx = 1.7, 1e-5
    fd = (combined_gamma(x + dx, s, k) - combined_gamma(x - dx, s, k)) / (2 * dx)
    assert fd == pytest.approx(-combined_gamma(x, s, k + 1), rel=1e-6)


@pytest.mark.parametrize("s", [-5.0, -1.0, 1.0, 3.0, 7.0, 19.0])
def test_combined_gamma_orders_match_direct(s):
    x = np.concatenate([np.linspace(0.05, 3.0, 40), np.linspace(3.0, 290.0, 60)])
    G = combined_gamma_orders(x, s, 12)
    for k in range(13):
        assert np.allclose(G[k], combined_gamma(x, s, k), rtol=5e-14, atol=0)


@pytest.mark.parametrize("s", [-1.0, 1.0, 3.0, 5.0, 19.0])
def test_combined_gamma_positive_and_decaying(s):
    x = np.linspace(1.0, 290.0, 3000)
    for k in range(6):
        g = combined_gamma(x, s, k)
        assert np.all(g > 0)
        # G_k(x) <= C_k e^-x on x >= 1 with C_k = e G_k(1)
        assert np.max(g * np.exp(x)) <= math.e * combined_gamma(1.0, s, k) * (1 + 1e-12)


def test_combined_gamma_rejects_negative_k():
    with pytest.raises(ValueError):
        combined_gamma(1.0, 1.0, -1)


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def _bell_brute(x, n, m):
    total = 0.0
    for part in _set_partitions(list(range(n))):
        if len(part) == m:
            total += math.prod(x[len(b) - 1] for b in part)
    return total


@pytest.mark.parametrize("n", range(0, 7))
def test_bell_recurrence_matches_partition_sum(n):
    rng = np.random.default_rng(n)
    x = list(rng.standard_normal(max(n, 1)))
    B = bell_table(x, n)
    for m in range(0, n + 1):
        ref = 1.0 if n == 0 and m == 0 else _bell_brute(x, n, m)
        assert B[n][m] == pytest.approx(ref, rel=1e-12, abs=1e-14)


@given(st.lists(st.floats(-3, 3), min_size=8, max_size=8), st.integers(1, 8))
@settings(max_examples=50, deadline=None)
def test_bell_edge_identities(x, n):
    assert bell_polynomial(x, n, 1) == pytest.approx(x[n - 1], rel=1e-12, abs=1e-12)
    assert bell_polynomial(x, n, n) == pytest.approx(x[0] ** n, rel=1e-12, abs=1e-12)


def test_bell_small_cases():
    assert bell_polynomial([2.0, 5.0], 3, 2) == pytest.approx(3 * 2.0 * 5.0)
    assert bell_polynomial([], 0, 0) == 1.0
    with pytest.raises(ValueError):
        bell_polynomial([1.0, 1.0], 2, 3)


def test_bell_table_accepts_arrays():
    xs = [np.array([1.0, 2.0]), np.array([3.0, -1.0])]
    B = bell_table(xs, 2)
    assert np.allclose(B[2][2], xs[0] ** 2)
    assert np.allclose(B[2][1], xs[1])


def test_bell_all_ones_gives_stirling_numbers():
    # every partition count of B_{n,m}(1, ..., 1) is a Stirling number of the second kind
    for n, m in itertools.product(range(1, 7), repeat=2):
        if m <= n:
            assert bell_polynomial([1.0] * n, n, m) == float(mp.stirling2(n, m))


def test_gamma_overflow_returns_signed_inf():
    assert gamma(5e-324) == math.inf
    assert gamma(-5e-324) == -math.inf
    assert gamma(200.0) == math.inf
