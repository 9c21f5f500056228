import math

import numpy as np
import pytest
from scipy import integrate, optimize

from iterhardy.calculus import integral
from iterhardy.characterizations import (
    InvalidSpecError, ProblemSpec, evaluate, psi_parts, thm33, thm51, thm61, thm71, thm71_spec,
)
from iterhardy.numgrid import Exponents, make_grid, refine

G = make_grid(1e-4, 1e4, 512)


def spec(theorem, p=2.0, q=2.0, grid=G, **weights):
    cone = "nonnegative" if theorem in ("thm31", "thm32", "thm33") else "nonincreasing"
    return ProblemSpec(theorem, Exponents(p, q), grid=grid, cone=cone, **weights)


def run(theorem, p=2.0, q=2.0, grid=G, **weights):
    return evaluate(spec(theorem, p, q, grid, **weights), truncation=False)


# thm31 ---------------------------------------------------------------------

def test_thm31_first_term_matches_reduced_formula():
    # u = v = a = 1 on [1e-3, 1e3]; w cut at the right end so the tail is finite.
    g = make_grid(1e-3, 1e3, 513)
    got = run("thm31", grid=g, u="1", v="1", w="chi(0,1000)").term("T1")
    res = optimize.minimize_scalar(lambda t: -t ** 3 / 3 * (1000 - t), bounds=(1e-3, 1e3),
                                   method="bounded")
    assert got == pytest.approx(math.sqrt(-res.fun), rel=1e-2)


def test_thm31_rejects_nonintegrable_dual_weight():
    with pytest.raises(InvalidSpecError):
        run("thm31", u="1", v="t^1.1", w="chi(1,2)")


def test_thm31_is_homogeneous_in_u():
    one = run("thm31", u="t^-0.5", v="1", w="chi(1,2)").values()
    two = run("thm31", u="2*t^-0.5", v="1", w="chi(1,2)").values()
    np.testing.assert_allclose(two, 2 * one, rtol=1e-12)


def test_terms_vanish_when_u_is_zero():
    r = run("thm31", u="0", v="1", w="chi(1,2)")
    assert np.all(r.values() == 0.0)


def test_terms_are_nonnegative():
    for th, kw in [("thm31", dict(u="t^-0.5", v="1", w="chi(1,2)")),
                   ("thm41", dict(u="1", v="1", w="chi(1,2)")),
                   ("thm51", dict(u="1", v="1", w="chi(1,2)"))]:
        assert np.all(run(th, **kw).values() >= 0.0)


def test_case_two_records_inner_tail_reading():
    r = run("thm31", q=1.5, u="t^-0.5", v="1", w="chi(1,2)")
    assert r.case == "ii" and any("z := t" in n for n in r.notes)


# thm32 ---------------------------------------------------------------------

def test_thm32_with_unit_b_is_thm31_with_u_over_t():
    a = run("thm32", u="t^0.5", b="1", v="t^-0.5", w="chi(1,2)").values()
    b = run("thm31", u="t^-0.5", v="t^-0.5", w="chi(1,2)").values()
    np.testing.assert_allclose(a, b, rtol=1e-12)


def test_thm32_is_invariant_under_doubling_b():
    a = run("thm32", u="1", b="1", v="t^-0.5", w="chi(1,2)").values()
    b = run("thm32", u="1", b="2", v="t^-0.5", w="chi(1,2)").values()
    np.testing.assert_allclose(b, a, rtol=1e-12)


def test_thm32_scaling_v_by_two_to_the_p_halves_terms():
    a = run("thm32", u="1", b="1", v="t^-0.5", w="chi(1,2)").values()
    b = run("thm32", u="1", b="2", v="4*t^-0.5", w="chi(1,2)").values()
    np.testing.assert_allclose(b, a / 2, rtol=1e-12)


def test_thm32_power_example_is_invalid():
    # v = t makes int_0^x v^{1-p'} diverge at 0 for p = 2.
    with pytest.raises(InvalidSpecError):
        run("thm32", u="t", b="1", v="t", w="t^-3")


# thm33 ---------------------------------------------------------------------

S33 = dict(u="1", b="1", v="chi(0,1)+t^2*chi(1,inf)", w="chi(1,2)")


def test_thm33_psi_identity():
    Psi, _, Tl = psi_parts(spec("thm33", **S33))
    np.testing.assert_allclose(Psi.values ** 3, Tl.values, rtol=1e-10)


def test_thm33_integral_of_psi():
    # int_0^inf b^2 v^{-1} = 1 + int_1^inf t^-2 = 2, so int psi = 3 * 2^(1/3).
    _, psi, _ = psi_parts(spec("thm33", **S33))
    assert integral(psi) == pytest.approx(3 * 2 ** (1 / 3), rel=1e-2)


def test_thm33_has_six_finite_terms():
    r = thm33(spec("thm33", **S33), truncation=False)
    assert [t.name for t in r.terms] == [f"T{i}" for i in range(1, 7)]
    assert np.all(np.isfinite(r.values()))


def test_thm33_rejects_divergent_tail():
    with pytest.raises(InvalidSpecError):
        run("thm33", u="1", b="1", v="t^-2", w="chi(1,2)")


# thm41 ---------------------------------------------------------------------

def test_thm41_matches_direct_formulas():
    # u = v = a = 1: kernel t^-2, density t^2, Phi = 1/(3t), w = chi(1,2).
    r = run("thm41", u="1", v="1", w="chi(1,2)")

    def r2_sq(t):
        inner = integrate.quad(lambda y: (1 / t - 1 / y) ** 2, max(t, 1.0), 2.0)[0]
        return t ** 3 / 3 * inner

    best = optimize.minimize_scalar(lambda t: -r2_sq(t), bounds=(1e-2, 2.0), method="bounded")
    expect = {
        "R1": math.sqrt(1 / 3),
        "R2": math.sqrt(-best.fun),
        "R3": math.sqrt(integrate.quad(lambda x: x ** 2, 1, 2)[0] / 6),
        "R4": math.sqrt(1 / 3),
        "R5": math.sqrt(7 / 3) * math.sqrt(1 / 3e4),
    }
    for name, val in expect.items():
        assert r.term(name) == pytest.approx(val, rel=1e-2), name


def test_thm41_homogeneity():
    kw = dict(u="1", w="chi(1,2)")
    base = run("thm41", v="1", **kw).values()
    np.testing.assert_allclose(run("thm41", v="3", **kw).values(), base * 3 ** -0.5, rtol=1e-9)
    scaled_w = run("thm41", v="1", u="1", w="3*chi(1,2)").values()
    np.testing.assert_allclose(scaled_w, base * 3 ** 0.5, rtol=1e-9)


@pytest.mark.parametrize("theorem,kw", [
    ("thm32", dict(u="1", b="1", v="t^-0.5", w="chi(1,2)")),
    ("thm51", dict(u="1", b="1", v="1", w="chi(1,2)")),
    ("thm61", dict(u="t^0.5", b="1", v="1", w="min(t^-0.5,t^-3)")),
])
def test_total_homogeneity(theorem, kw):
    p, q = 2.0, 3.0
    base = run(theorem, p, q, **kw).total
    w2 = run(theorem, p, q, **{**kw, "w": f"5*({kw['w']})"}).total
    v2 = run(theorem, p, q, **{**kw, "v": f"5*({kw['v']})"}).total
    assert w2 == pytest.approx(base * 5 ** (1 / q), rel=1e-9)
    assert v2 == pytest.approx(base * 5 ** (-1 / p), rel=1e-9)


# thm51 ---------------------------------------------------------------------

def test_thm51_first_term_matches_direct_value():
    # sup_x ((x^3 - 1)/3 / x)^{1/2} over [1, 2] is attained at x = 2.
    r = run("thm51", u="1", b="1", v="1", w="chi(1,2)")
    assert r.term("P1") == pytest.approx(math.sqrt(7 / 6), rel=1e-2)
    assert r.term("P2") == pytest.approx(1.0, rel=1e-2)


def test_thm51_fifth_term_vanishes_for_infinite_v_mass():
    assert run("thm51", u="1", b="1", v="1", w="chi(1,2)").term("P5") == 0.0


def test_thm51_classical_average_terms_are_finite_and_positive():
    vals = run("thm51", u="1", b="1", v="chi(0,1)", w="chi(0,1)").values()
    assert np.all(np.isfinite(vals)) and np.all(vals > 0)


# thm61 ---------------------------------------------------------------------

def test_thm61_with_fixed_point_level_function():
    kw = dict(u="t^0.5", b="1", v="1", w="min(t^-0.5,t^-3)")
    r61 = run("thm61", **kw)
    r41 = run("thm41", **kw)
    r51 = run("thm51", **kw)
    assert len(r61.terms) == len(r41.terms) + len(r51.terms) == 10
    np.testing.assert_allclose(r61.values(), np.concatenate((r41.values(), r51.values())),
                               rtol=1e-12)


def test_thm61_warns_when_split_condition_fails():
    r = run("thm61", u="t^2", b="1", v="1", w="chi(1,2)")
    assert any("split condition" in w for w in r.warnings)


# thm71 ---------------------------------------------------------------------

def test_thm71_equals_thm61_with_substitutions():
    g = make_grid(1e-3, 1e3, 256)
    a = thm71(2.0, 3.0, 0.25, "chi(0,1)", "t^-1", g, truncation=False)
    b = thm61(spec("thm61", 2.0, 3.0, g, u="t^0.25", b="1", a="1", v="chi(0,1)",
                   w="t^-3*t^-1"), truncation=False)
    assert a.theorem == "thm71"
    np.testing.assert_allclose(a.values(), b.values(), rtol=1e-12)


def test_thm71_split_condition_value():
    from iterhardy.operators import split_condition_value

    s = thm71_spec(2.0, 2.0, 0.5, "1", "1", G)
    assert split_condition_value(s.sample("u"), s.sample("b")) == pytest.approx(2.0, rel=1e-2)


def test_thm71_scales_with_w():
    g = make_grid(1e-3, 1e3, 256)
    a = thm71(2.0, 3.0, 0.5, "chi(0,1)", "1", g, truncation=False).total
    b = thm71(2.0, 3.0, 0.5, "chi(0,1)", "16", g, truncation=False).total
    assert b == pytest.approx(16 ** (1 / 3) * a, rel=1e-12)


def test_thm71_rejects_bad_gamma():
    with pytest.raises(Exception):
        thm71(2.0, 2.0, 1.0, "1", "1", G)


# report structure, refinement and case consistency -----------------------------

def test_report_serialization_and_truncation():
    r = thm51(spec("thm51", u="1", b="1", v="1", w="min(t^0.5,t^-3)"))
    d = r.to_dict()
    assert d["total"] == max(t["value"] for t in d["terms"])
    assert d["boundaryReads"] == ["P5"]
    assert r.truncation_delta >= 0.0


SUITE = [
    ("thm32", 2, 2, dict(u="1", b="1", v="1", w="chi(1,2)")),
    ("thm41", 1.5, 1.5, dict(u="1", v="t^-0.5", w="min(t^0.5,t^-3)")),
    ("thm51", 2, 3, dict(u="1", b="1", v="t^-0.5", w="min(t^0.5,t^-3)")),
    ("thm61", 1.5, 1.5, dict(u="t^0.5", b="1", v="1", w="min(t^-0.5,t^-3)")),
]


@pytest.mark.parametrize("theorem,p,q,kw", SUITE)
def test_terms_stable_under_refinement(theorem, p, q, kw):
    a = run(theorem, p, q, **kw).values()
    b = run(theorem, p, q, grid=refine(G, 2), **kw).values()
    finite = np.isfinite(a) & (a > 0)
    assert finite.any()
    np.testing.assert_allclose(b[finite], a[finite], rtol=5e-2)


@pytest.mark.parametrize("theorem,kw", [
    ("thm32", dict(u="1", b="1", v="t^-0.5", w="chi(1,2)")),
    ("thm51", dict(u="1", b="1", v="t^-0.5", w="min(t^0.5,t^-3)")),
])
@pytest.mark.parametrize("eps", [1e-2, 1e-3, 1e-4])
def test_case_two_approaches_case_one(theorem, kw, eps):
    near = run(theorem, 2.0, 2.0 * (1 - eps), **kw)
    at = run(theorem, 2.0, 2.0, **kw)
    assert near.case == "ii" and at.case == "i"
    assert near.total == pytest.approx(at.total, rel=0.1)
