import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from iterhardy.numgrid import (
    INF, DomainError, Exponents, GridFn, PowerForm, make_grid, refine, xdiv, xmul, xpow,
)

pos = st.floats(min_value=1e-6, max_value=1e6)
xreal = st.one_of(st.just(0.0), st.just(INF), pos)


def test_three_nodes_are_decades():
    g = make_grid(1, 100, 3)
    np.testing.assert_allclose(g.nodes, [1, 10, 100], rtol=1e-15)


def test_symmetric_range_has_one_in_the_middle():
    g = make_grid(1e-4, 1e4, 9)
    assert g.nodes[4] == pytest.approx(1.0, rel=1e-15)


def test_reversed_range_rejected():
    with pytest.raises(DomainError):
        make_grid(2, 1, 8)


def test_refine_contains_coarse_nodes():
    g = make_grid(1, 100, 3)
    r = refine(g, 2)
    assert r.n == 5
    assert set(g.nodes) <= set(r.nodes)


def test_refine_factor_one_rejected():
    with pytest.raises(DomainError):
        refine(make_grid(1, 100, 3), 1)


def test_refine_composes():
    g = make_grid(1e-3, 1e3, 17)
    np.testing.assert_array_equal(refine(refine(g, 2), 2).nodes, refine(g, 4).nodes)


def test_convention_zero_times_infinity():
    assert xmul(0.0, INF) == 0.0
    assert xmul(INF, 0.0) == 0.0


def test_convention_infinity_over_infinity():
    assert xdiv(INF, INF) == 0.0


def test_positive_over_zero_is_infinite():
    assert xdiv(3.0, 0.0) == INF


def test_zero_over_zero():
    assert xdiv(0.0, 0.0) == 0.0


def test_xpow_of_zero_with_negative_exponent():
    assert xpow(0.0, -1.0) == INF
    assert xpow(INF, -2.0) == 0.0


@given(xreal, xreal)
def test_xmul_commutes(a, b):
    assert xmul(a, b) == xmul(b, a)


@given(pos)
def test_xmul_inverse(a):
    assert xmul(a, xdiv(1.0, a)) == pytest.approx(1.0, rel=1e-15)


@given(st.floats(min_value=1e-8, max_value=1.0), st.floats(min_value=1.5, max_value=1e8),
       st.integers(min_value=2, max_value=3000), st.integers(min_value=2, max_value=5))
def test_grid_invariants(t0, span, n, k):
    g = make_grid(t0, t0 * span, n)
    assert g.nodes[0] == g.t_min and g.nodes[-1] == g.t_max
    assert np.all(np.diff(g.nodes) > 0)
    assert math.fsum(g.cells) == pytest.approx(g.t_max - g.t_min, rel=1e-10)
    r = refine(g, k)
    assert np.all(np.isin(g.nodes, r.nodes))


def test_exponents_cases():
    assert Exponents(2, 3).case == "i"
    assert Exponents(2, 2).case == "i"
    e = Exponents(3, 2)
    assert e.case == "ii"
    assert e.r == pytest.approx(6.0)
    assert Exponents(2, 2).p_prime == 2.0


@pytest.mark.parametrize("p", [1.0, 0.5, INF])
def test_exponent_range(p):
    with pytest.raises(DomainError):
        Exponents(p, 2)


def test_power_form_integrals():
    assert PowerForm(1.0, 0.0).lower_integral(3.0) == 3.0
    assert PowerForm(1.0, -2.0).upper_integral(2.0) == 0.5
    assert PowerForm(1.0, -1.0).lower_integral(1.0) == INF
    assert PowerForm(1.0, -1.0).upper_integral(1.0) == INF


def test_gridfn_rejects_negative_values():
    g = make_grid(1, 10, 8)
    with pytest.raises(DomainError):
        GridFn(g, -np.ones(8))


def test_gridfn_arithmetic_keeps_forms():
    g = make_grid(1e-2, 1e2, 16)
    f = GridFn.power(g, 2.0, 0.5)
    h = GridFn.power(g, 3.0, -1.5)
    prod = f * h
    assert prod.pure
    assert prod.head == PowerForm(6.0, -1.0)
    np.testing.assert_allclose(prod.values, 6.0 / g.nodes, rtol=1e-14)
    assert (f ** 2).head == PowerForm(4.0, 1.0)


def test_grid_values_are_readonly():
    g = make_grid(1, 10, 8)
    with pytest.raises(ValueError):
        g.nodes[0] = 3.0
