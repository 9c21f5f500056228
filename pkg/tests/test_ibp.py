from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from iterhardy import weightlang as wl
from iterhardy.calculus import DirectionError
from iterhardy.ibp import (
    CSV_HEADER, IbpInstance, ibp_A, ibp_B, ibp_sweep, random_instance, rows_to_csv,
)
from iterhardy.numgrid import DomainError, GridFn, make_grid

# nodes 2^-13, ..., 1/2, 1
DYADIC = make_grid(2.0 ** -13, 1.0, 14)


def reflect_check(inst):
    """A-values of ``inst`` against B-values of its image under ``t -> 1/t``."""
    a, b = ibp_A(inst), ibp_B(inst.reflected())
    return a, b


def test_single_atom_example():
    g = wl.sample("1", DYADIC)
    f = GridFn(DYADIC, np.where(DYADIC.nodes < 0.5, 1.0, 0.0))
    res = ibp_A(IbpInstance.from_functions(1.0, g, f))
    assert res.A2 == pytest.approx(0.25, rel=1e-14)
    assert res.A1 == pytest.approx(0.125, rel=1e-14)
    assert res.A2 / res.A1 == pytest.approx(2.0, rel=1e-14)
    assert res.limit_term == 0.0


def test_constant_f_gives_zero():
    g = wl.sample("1", DYADIC)
    inst = IbpInstance.from_functions(2.0, g, GridFn.constant(DYADIC, 3.0))
    res = ibp_A(inst)
    assert res.A1 == 0.0 and res.A2 == 0.0
    g_tail = wl.sample("chi(0,1)", DYADIC)
    b = ibp_B(IbpInstance.from_functions(2.0, g_tail, GridFn.constant(DYADIC, 3.0),
                                         "nondecreasing"))
    assert b.B1 == 0.0 and b.B2 == 0.0


def test_direction_mismatch():
    g = wl.sample("1", DYADIC)
    up = GridFn(DYADIC, DYADIC.nodes)
    with pytest.raises(DirectionError):
        ibp_A(IbpInstance.from_functions(1.0, g, up))
    with pytest.raises(DirectionError):
        ibp_B(IbpInstance.from_functions(1.0, g, up, "nonincreasing"))


def test_divergent_tail_is_rejected():
    g = make_grid(1e-2, 1e2, 16)
    inst = IbpInstance.from_functions(1.0, wl.sample("1", g), GridFn(g, g.nodes), "nondecreasing")
    with pytest.raises(DomainError):
        ibp_B(inst)


def test_invalid_alpha():
    with pytest.raises(DomainError):
        IbpInstance(0.0, np.array([1.0, 2.0]), np.array([1.0]), 0.0, 0.0, np.array([1.0, 0.0]))


@given(alpha=st.sampled_from([0.5, 1.0, 2.0, 5.0]), seed=st.integers(0, 10_000))
def test_step_constants(alpha, seed):
    A1, A2 = ibp_A(random_instance(alpha, seed)).exact
    if min(A1, A2) > 0:
        # exact rationals: A2 = (alpha + 1) A1 on step data, with no rounding
        assert A1 <= A2
        assert A2 == Fraction(alpha + 1) * A1


@given(alpha=st.sampled_from([0.5, 1.0, 2.0, 5.0]), seed=st.integers(0, 10_000))
def test_reflection_mirrors_A_and_B(alpha, seed):
    a, b = reflect_check(random_instance(alpha, seed))
    assert b.B1 == pytest.approx(a.A1, rel=1e-6)
    assert b.B2 == pytest.approx(a.A2, rel=1e-6)
    assert b.zero_term == pytest.approx(a.limit_term, rel=1e-6)


@given(alpha=st.sampled_from([0.5, 1.0, 2.0]), seed=st.integers(0, 10_000))
def test_limit_term_bounded_by_combined(alpha, seed):
    res = ibp_A(random_instance(alpha, seed))
    if res.limit_term > 0 and np.isfinite(res.combined):
        assert res.limit_term <= (alpha + 1) * res.combined * (1 + 1e-12)
        # Combined form: int G^alpha g f = (A2 + limit) / (alpha + 1) on step data.
        assert res.combined == pytest.approx((res.A2 + res.limit_term) / (alpha + 1), rel=1e-9)


def test_sweep_has_no_violations():
    rows = ibp_sweep([0.5, 1.0, 2.0], 100, seed=7)
    assert len(rows) == 300 and all(r.passed for r in rows)


def test_empty_sweep():
    assert ibp_sweep([], 10, seed=0) == []
    assert rows_to_csv([]) == ",".join(CSV_HEADER) + "\n"


def test_sweep_csv_is_deterministic():
    a = rows_to_csv(ibp_sweep([1.0, 2.0], 20, seed=3))
    b = rows_to_csv(ibp_sweep([1.0, 2.0], 20, seed=3))
    assert a == b
    assert a.splitlines()[0] == "alpha,seed,A1,A2,ratio,pass"
