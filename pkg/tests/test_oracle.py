import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from iterhardy import oracle as orc
from iterhardy.characterizations import ProblemSpec
from iterhardy.numgrid import ZERO_FORM, Exponents, GridFn, PowerForm, make_grid
from iterhardy.operators import apply_P, apply_R, apply_T, cesaro_norm, wlp_norm

G = make_grid(1e-3, 1e3, 128)


def spec(theorem="thm61", p=2.0, q=2.0, grid=G, cone="nonincreasing", **kw):
    kw.setdefault("w", "chi(1,2)")
    return ProblemSpec(theorem, Exponents(p, q), grid=grid, cone=cone, **kw)


@pytest.fixture(scope="module")
def hardy():
    g = make_grid(1e-6, 1e6, 1024)
    s = ProblemSpec("thm61", Exponents(2, 2), grid=g, cone="nonincreasing", target="lebesgue")
    return s, orc.RatioEvaluator(s)


# seeds ---------------------------------------------------------------------

def test_seeds_on_nonincreasing_cone():
    cands = orc.seed_candidates(spec(), subsample=8)
    indicators = [c for c in cands if c.kind == "indicator-scaled"]
    assert len(indicators) >= 8
    for c in cands:
        assert np.all(np.diff(c.values) <= 0.0)


def test_seeds_with_unit_dual_density_are_indicators():
    cands = orc.seed_candidates(spec("thm32", cone="nonnegative", u="1", v="1", b="1"),
                                subsample=8)
    for c in cands:
        if c.kind == "dual-density":
            assert set(np.unique(c.values)) <= {0.0, 1.0}


@pytest.mark.parametrize("theorem,cone", [("thm32", "nonnegative"), ("thm61", "nonincreasing")])
def test_seeds_have_positive_norm_and_stored_ratio(theorem, cone):
    s = spec(theorem, cone=cone, u="1", v="t^-0.5", b="1")
    ev = orc.RatioEvaluator(s)
    cands = orc.seed_candidates(s, subsample=8, evaluator=ev)
    assert sum(c.kind == "random-bump" for c in cands) == orc.N_BUMPS
    for c in cands:
        assert ev.source_pow(c.values) > 0.0
        assert ev(c.values) == pytest.approx(c.ratio, rel=1e-12)


def test_seeds_are_deterministic():
    a = orc.seed_candidates(spec(), subsample=8)
    b = orc.seed_candidates(spec(), subsample=8)
    assert [c.ratio for c in a] == [c.ratio for c in b]


# ratio ---------------------------------------------------------------------

def test_zero_function_is_rejected():
    with pytest.raises(orc.ZeroNormError):
        orc.ratio(spec(), np.zeros(G.n))


@given(c=st.floats(min_value=1e-3, max_value=1e3),
       f=arrays(np.float64, 128, elements=st.floats(min_value=1e-3, max_value=1e3)))
def test_ratio_is_scale_invariant(c, f):
    s = spec(cone="nonnegative", theorem="thm32", u="1", v="1", b="1")
    ev = orc.RatioEvaluator(s)
    assert ev(c * f) == pytest.approx(ev(f), rel=1e-12)


def test_classical_hardy_family(hardy):
    s, ev = hardy
    t = s.grid.nodes
    assert ev(np.where(t <= 1, t ** -0.51, 0.0)) >= 1.8


@pytest.mark.parametrize("theorem,op", [("thm61", "T"), ("thm51", "P"), ("thm41", "R")])
def test_ratio_matches_operator_norms(theorem, op):
    g = make_grid(1e-3, 1e3, 256)
    s = ProblemSpec(theorem, Exponents(2, 3), u="t^0.5", v="min(1,t^-0.5)",
                    w="min(t,t^-3)", grid=g, cone="nonincreasing")
    vals = np.minimum(1.0, g.nodes ** -0.7)
    f = GridFn(g, vals, head=PowerForm(1.0, 0.0), tail=ZERO_FORM)
    u, b, v, w, a = (s.sample(k) for k in "ubvwa")
    out = {"T": lambda: apply_T(u, b, f), "P": lambda: apply_P(u, b, f),
           "R": lambda: apply_R(u, f)}[op]().values
    Of = GridFn(g, out, head=PowerForm(float(out[0]), 0.0), tail=ZERO_FORM)
    ref = cesaro_norm(Of, w, a, 3.0) / wlp_norm(f, v, 2.0)
    assert orc.ratio(s, vals) == pytest.approx(ref, rel=1e-6)


# ascent --------------------------------------------------------------------

def test_ascend_zero_iterations_returns_start():
    s = spec()
    start = orc.seed_candidates(s, subsample=8)[0]
    got, history = orc.ascend(s, start, iters=0)
    assert got is start and history == (start.ratio,)


def test_ascend_history_is_nondecreasing():
    s = spec(u="1", v="t^-0.5", b="1")
    start = max(orc.seed_candidates(s, subsample=8), key=lambda c: c.ratio)
    got, history = orc.ascend(s, start, iters=3)
    assert got.ratio >= start.ratio
    assert all(b >= a for a, b in zip(history, history[1:]))
    assert got.ratio == history[-1]
    assert np.all(np.diff(got.values) <= 0.0)


def test_ascend_improves_hardy_indicator(hardy):
    s, ev = hardy
    cands = orc.seed_candidates(s, evaluator=ev)
    plain = [c for c in cands if c.label.startswith("chi(0") and "+" not in c.label]
    start = max(plain, key=lambda c: c.ratio)
    got, _ = orc.ascend(s, start, iters=10, evaluator=ev)
    assert got.ratio >= 1.05 * start.ratio


@given(arrays(np.float64, 32, elements=st.floats(min_value=0.0, max_value=1e6)))
def test_projection_is_idempotent_and_monotone(x):
    once = orc.project(x, "nonincreasing")
    np.testing.assert_array_equal(orc.project(once, "nonincreasing"), once)
    assert np.all(np.diff(once) <= 0.0) and np.all(once >= x)
    np.testing.assert_array_equal(orc.project(x, "nonnegative"), x)


# run and certify ---------------------------------------------------------------

def test_run_oracle_best_is_max_of_history():
    res = orc.run_oracle(spec(u="1", v="1", b="1"), subsample=8, ascent_iters=2)
    assert res.best.ratio == max(res.history)
    assert res.cone_checked


def test_certify_band_and_determinism():
    s = spec("thm51", u="1", v="1", b="1", w="chi(1,2)")
    a = orc.certify(s, subsample=8, ascent_iters=2, truncation=False)
    b = orc.certify(s, subsample=8, ascent_iters=2, truncation=False)
    assert a.band == a.lower / a.rhs.total
    assert 0.0 < a.band < np.inf and a.passed
    assert (a.lower, a.band) == (b.lower, b.band)


def test_certify_rejects_inverted_band():
    with pytest.raises(Exception):
        orc.certify(spec(), c_lower=2.0, c_upper=1.0)
