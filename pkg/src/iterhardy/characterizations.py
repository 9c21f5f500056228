"""Term-by-term evaluators for the closed-form operator-norm characterizations.

Every evaluator returns a :class:`CharReport` listing the named terms of a
right-hand side. Most of them share one five-term shape built from

* an outer kernel ``k`` and its suffix envelope ``K*(s) = sup_{tau >= s} k``,
* a density ``sigma`` with primitive ``Sigma``,
* the pairing weights ``a`` and ``w``.

With ``C(x) = int^x K* a`` the two Muckenhoupt-type blocks are

* ``I(t) = int_0^t sigma(x) (C(t) - C(x))^{p'} dx`` paired with ``int_t^inf w``,
* ``J(t) = int_t^inf (C(y) - C(t))^q w(y) dy`` paired with ``Sigma(t)``,

followed by two Stieltjes terms against ``d[-Phi]`` for
``Phi(tau) = sup_{s >= tau} k(s)^{p'} Sigma(s)`` and a limit term read at
``t_max``. For ``q < p`` the suprema become ``r``-integrals with
``r = pq/(p-q)``.

Conventions on the truncated grid:

* ``C`` is accumulated from ``t_min``; below ``t_min`` the kernel term is
  collapsed, so ``I`` picks up ``Sigma(t_min) C(t)^{p'}`` for the head.
* ``J`` adds ``(C(t_max) - C(t))^q int_{t_max}^inf w`` for the tail.
* ``int_{[x, inf)} d[-Phi]`` is ``Phi(x-) - Phi(t_max)``.
* Outer suprema are node maxima; outer ``r``-integrals are trapezoid sums
  over ``[t_min, t_max]``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import weightlang as wl
from .calculus import (
    Interval,
    Quadrature,
    collect_warnings,
    cumulative,
    integral,
    level_function,
    primitive,
    stieltjes,
    stieltjes_atoms,
    suffix_sup,
    tail_primitive,
)
from .numgrid import INF, DomainError, Exponents, Grid, GridFn, make_grid, xmul, xpow

__all__ = [
    "CharReport", "ProblemSpec", "InvalidSpecError", "Term",
    "thm31", "thm32", "thm33", "thm41", "thm51", "thm61", "thm71",
    "evaluate", "THEOREMS", "extend_grid", "psi_parts", "thm71_spec",
]

THEOREMS = ("thm31", "thm32", "thm33", "thm41", "thm51", "thm61", "thm71")
SPLIT_WARN_LEVEL = 100.0


class InvalidSpecError(DomainError):
    """A problem violates the integrability hypotheses of its theorem.

    Attributes:
        failures: One message per failed check.
    """

    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("invalid problem: " + "; ".join(self.failures))


@dataclass(frozen=True)
class ProblemSpec:
    """A weighted inequality to characterize and test.

    Attributes:
        theorem: One of :data:`THEOREMS`.
        exponents: ``p`` and ``q``.
        u, v, w, a, b: Weight expressions (text or AST).
        grid: Truncated grid.
        cone: ``"nonnegative"`` or ``"nonincreasing"``.
        target: ``"cesaro"`` (default) or ``"lebesgue"``; the latter measures
            the operator output directly in ``L^q(w)``.
        gamma_over_n: Only for ``thm71``.
    """

    theorem: str
    exponents: Exponents
    u: object = "1"
    v: object = "1"
    w: object = "1"
    a: object = "1"
    b: object = "1"
    grid: Grid = field(default_factory=lambda: make_grid(1e-4, 1e4, 512))
    cone: str = "nonnegative"
    target: str = "cesaro"
    gamma_over_n: Optional[float] = None

    def __post_init__(self):
        if self.theorem not in THEOREMS:
            raise ValueError(f"unknown theorem {self.theorem!r}")
        if self.cone not in ("nonnegative", "nonincreasing"):
            raise ValueError(f"unknown cone {self.cone!r}")
        if self.target not in ("cesaro", "lebesgue"):
            raise ValueError(f"unknown target {self.target!r}")
        for name in ("u", "v", "w", "a", "b"):
            object.__setattr__(self, name, wl.as_expr(getattr(self, name)))
        if self.theorem == "thm71":
            g = self.gamma_over_n
            if g is None or not (0.0 < g < 1.0):
                raise DomainError("thm71 needs gamma_over_n in (0, 1)")

    def sample(self, name: str) -> GridFn:
        return wl.sample(getattr(self, name), self.grid)


@dataclass(frozen=True)
class Term:
    name: str
    value: float
    boundary_read: bool = False


@dataclass(frozen=True)
class CharReport:
    """Named breakdown of a characterization.

    ``total`` is the largest term; ``sum_of_terms`` is reported alongside.
    ``truncation_delta`` is the relative change of ``total`` when ``t_max``
    grows tenfold at the same node density.
    """

    theorem: str
    case: str
    exponents: Exponents
    terms: tuple
    truncation_delta: float = 0.0
    notes: tuple = ()
    warnings: tuple = ()

    @property
    def total(self) -> float:
        return max((t.value for t in self.terms), default=0.0)

    @property
    def sum_of_terms(self) -> float:
        return float(sum(t.value for t in self.terms))

    @property
    def boundary_reads(self) -> list:
        return [t.name for t in self.terms if t.boundary_read]

    def term(self, name: str) -> float:
        for t in self.terms:
            if t.name == name:
                return t.value
        raise KeyError(name)

    def values(self) -> np.ndarray:
        return np.array([t.value for t in self.terms])

    def to_dict(self) -> dict:
        return {
            "theorem": self.theorem,
            "case": self.case,
            "exponents": {"p": self.exponents.p, "q": self.exponents.q},
            "terms": [{"name": t.name, "value": t.value, "boundaryRead": t.boundary_read}
                      for t in self.terms],
            "total": self.total,
            "sumOfTerms": self.sum_of_terms,
            "truncationDelta": self.truncation_delta,
            "boundaryReads": self.boundary_reads,
            "notes": list(self.notes),
            "warnings": list(self.warnings),
        }


# ---------------------------------------------------------------------------
# numeric building blocks


def _root(x: float, e: float) -> float:
    """``x ** (1/e)`` on ``[0, inf]``."""
    return float(xpow(x, 1.0 / e))


def _sup(vals: np.ndarray):
    """Node maximum and whether it sits on a grid end."""
    vals = np.asarray(vals, dtype=float)
    vals = np.where(np.isnan(vals), 0.0, vals)
    k = int(np.argmax(vals))
    return float(vals[k]), k in (0, len(vals) - 1)


def _outer(weight: GridFn, kernel: np.ndarray, r: float) -> float:
    """``(int_{t_min}^{t_max} kernel * weight)^{1/r}`` by trapezoid segments."""
    parts = Quadrature.of(weight).interval_integrals(np.asarray(kernel, dtype=float))
    parts = np.where(np.isnan(parts), INF, parts)
    if np.isinf(parts).any():
        return INF
    return _root(math.fsum(parts.tolist()), r)


def _outer_prod(weight: GridFn, factors, r: float) -> float:
    """``(int prod_k f_k^{e_k} * weight)^{1/r}`` for large ``r``.

    The kernel is formed in log space and scaled by its maximum before
    integrating, so exponents like ``r/p'`` with ``r`` in the thousands
    neither overflow nor underflow. Zero factors win over infinite ones
    (``0 * inf = 0``).
    """
    n = weight.grid.n
    logk = np.zeros(n)
    zero = np.zeros(n, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for vals, e in factors:
            vals = np.asarray(vals, dtype=float)
            zero |= vals == 0.0
            logk = logk + e * np.log(vals)
    logk[zero] = -INF
    if np.isposinf(logk).any():
        return _outer(weight, np.exp(logk), r)
    finite = logk[np.isfinite(logk)]
    if finite.size == 0:
        return 0.0
    top = float(finite.max())
    scaled = np.exp(logk - top)
    parts = Quadrature.of(weight).interval_integrals(scaled)
    if np.isinf(parts).any():
        return INF
    total = math.fsum(parts.tolist())
    if total == 0.0:
        return 0.0
    return float(math.exp(top / r + math.log(total) / r))


def _pairwise(C: np.ndarray, e: float, upper: bool) -> np.ndarray:
    """``M[j, i] = (C_j - C_i)_+^e`` (``upper=False``) or ``(C_i - C_j)_+^e``."""
    with np.errstate(invalid="ignore"):
        d = C[:, None] - C[None, :]
        if upper:
            d = -d
        d = np.where(np.isnan(d), INF, d)
    return xpow(np.maximum(d, 0.0), e)


def _I(C: np.ndarray, sigma: GridFn, Sigma: GridFn, pp: float) -> np.ndarray:
    """``int_0^{t_j} sigma(x) (C_j - C(x))^{p'} dx`` at every node."""
    M = _pairwise(C, pp, upper=False)
    body = Quadrature.of(sigma).interval_integrals(M).sum(axis=-1)
    head = xmul(Sigma.values[0], xpow(C, pp))
    return head + body


def _J(C: np.ndarray, w: GridFn, Wt: GridFn, q: float) -> np.ndarray:
    """``int_{t_j}^inf (C(y) - C_j)^q w(y) dy`` at every node."""
    M = _pairwise(C, q, upper=True)
    body = Quadrature.of(w).interval_integrals(M).sum(axis=-1)
    w_extra = float(Wt.values[-1])
    with np.errstate(invalid="ignore"):
        tail = xmul(xpow(np.maximum(C[-1] - C, 0.0), q), w_extra)
    return body + tail


@dataclass
class _Shape:
    """Shared pieces of a five-term block."""

    ex: Exponents
    w: GridFn
    Wt: GridFn
    A: GridFn
    C: np.ndarray
    sigma: GridFn
    Sigma: GridFn

    def iw(self) -> np.ndarray:
        return _I(self.C, self.sigma, self.Sigma, self.ex.p_prime)

    def sj(self) -> np.ndarray:
        return _J(self.C, self.w, self.Wt, self.ex.q)

    # suprema (p <= q)
    def iw_sup(self):
        return _sup(xmul(xpow(self.iw(), 1.0 / self.ex.p_prime), xpow(self.Wt.values, 1.0 / self.ex.q)))

    def sj_sup(self):
        return _sup(xmul(xpow(self.Sigma.values, 1.0 / self.ex.p_prime), xpow(self.sj(), 1.0 / self.ex.q)))

    # r-integrals (q < p)
    def iw_int(self) -> float:
        ex, r = self.ex, self.ex.r
        return _outer_prod(self.w, [(self.iw(), r / ex.p_prime), (self.Wt.values, r / ex.p)], r)

    def sj_int(self) -> float:
        ex, r = self.ex, self.ex.r
        return _outer_prod(self.sigma, [(self.Sigma.values, r / ex.q_prime), (self.sj(), r / ex.q)], r)


def _check_positive_finite(label: str, f: GridFn, where: slice) -> list:
    vals = f.values[where]
    bad = []
    if np.any(np.isinf(vals)):
        bad.append(f"{label} is infinite at some nodes")
    if np.any(vals <= 0.0):
        bad.append(f"{label} vanishes at some nodes")
    return bad


def _hardy_block(ex: Exponents, k: GridFn, sigma: GridFn, a: GridFn, w: GridFn,
                 prefix: str) -> list:
    """The five terms for kernel ``k`` and density ``sigma``."""
    pp, q = ex.p_prime, ex.q
    Kstar = suffix_sup(k)
    C = cumulative(Kstar * a).values
    Sigma = primitive(sigma)
    Phi = suffix_sup((k ** pp) * Sigma)
    A = primitive(a)
    Wt = tail_primitive(w)
    shape = _Shape(ex, w, Wt, A, C, sigma, Sigma)

    # Stieltjes pieces. Cell k carries mass Phi_{k-1} - Phi_k; the envelope
    # is read as continuous inside cells, so the integrand is averaged over
    # the cell ends and the tail mass from t_j is Phi(t_j) - Phi(t_max).
    # Both rules are second order where Phi is smooth.
    _, mass = stieltjes_atoms(Phi, "minus")
    upper_mass = np.concatenate((np.cumsum(mass[::-1])[::-1], [0.0]))
    Ap = A ** pp
    head_part = stieltjes(Ap, Phi, Interval(0.0, Phi.grid.t_min))
    mid = 0.5 * (Ap.values[:-1] + Ap.values[1:])
    lower = head_part + np.concatenate(([0.0], np.cumsum(xmul(mid, mass))))
    Aqw = (A ** q) * w
    X = primitive(Aqw)
    lim = _root(Phi.values[-1], pp)
    t5 = xmul(_root(integral(Aqw), q), lim)

    names = [f"{prefix}{i}" for i in range(1, 6)]
    if ex.case == "i":
        t1, b1 = shape.iw_sup()
        t2, b2 = shape.sj_sup()
        t3, b3 = _sup(xmul(xpow(upper_mass, 1.0 / pp), xpow(X.values, 1.0 / q)))
        t4, b4 = _sup(xmul(xpow(lower, 1.0 / pp), xpow(Wt.values, 1.0 / q)))
        vals = [(t1, b1), (t2, b2), (t3, b3), (t4, b4)]
    else:
        r = ex.r
        t1 = shape.sj_int()
        t2 = shape.iw_int()
        t3 = _outer_prod(Aqw, [(upper_mass, r / pp), (X.values, r / ex.p)], r)
        t4 = _outer_prod(w, [(lower, r / pp), (Wt.values, r / ex.p)], r)
        vals = [(t1, False), (t2, False), (t3, False), (t4, False)]
    vals.append((float(t5), True))
    return [Term(nm, float(v), bool(bd)) for nm, (v, bd) in zip(names, vals)]


def _B(spec: ProblemSpec) -> GridFn:
    b = spec.sample("b")
    if np.any(b.values <= 0.0):
        raise InvalidSpecError(["b must be positive at every node"])
    return primitive(b)


def _V(spec: ProblemSpec) -> GridFn:
    V = primitive(spec.sample("v"))
    bad = _check_positive_finite("V = int_0^x v", V, slice(None))
    if bad:
        raise InvalidSpecError(bad)
    return V


_Z_NOTE = "second r-integral term reads the inner tail of w from z := t"


# ---------------------------------------------------------------------------
# theorem evaluators (single truncation)


def _terms_31(spec: ProblemSpec, k: GridFn, sigma: GridFn, prefix: str = "T"):
    Sigma = primitive(sigma)
    bad = _check_positive_finite("int_0^x of the dual density", Sigma, slice(1, -1))
    if bad:
        raise InvalidSpecError(bad)
    notes = (_Z_NOTE,) if spec.exponents.case == "ii" else ()
    terms = _hardy_block(spec.exponents, k, sigma, spec.sample("a"), spec.sample("w"), prefix)
    return terms, notes


def _eval31(spec: ProblemSpec):
    pp = spec.exponents.p_prime
    sigma = spec.sample("v") ** (1.0 - pp)
    return _terms_31(spec, spec.sample("u"), sigma)


def _eval32(spec: ProblemSpec):
    pp = spec.exponents.p_prime
    B = _B(spec)
    k = spec.sample("u") / B
    sigma = (spec.sample("b") ** pp) * (spec.sample("v") ** (1.0 - pp))
    return _terms_31(spec, k, sigma)


def psi_parts(spec: ProblemSpec):
    """``Psi``, ``psi`` and the tail integral they are built from."""
    pp = spec.exponents.p_prime
    rho = (spec.sample("b") ** pp) * (spec.sample("v") ** (1.0 - pp))
    Tl = tail_primitive(rho)
    # The last node counts too: Psi(t_max) = 0 would make psi infinite there.
    bad = _check_positive_finite("int_x^inf b^{p'} v^{1-p'}", Tl, slice(None))
    if bad:
        raise InvalidSpecError(bad)
    Psi = Tl ** (1.0 / (pp + 1.0))
    psi = (Tl ** (-pp / (pp + 1.0))) * rho
    return Psi, psi, Tl


def _eval33(spec: ProblemSpec):
    ex = spec.exponents
    pp, q = ex.p_prime, ex.q
    B = _B(spec)
    Psi, psi, _ = psi_parts(spec)
    k = (spec.sample("u") / B) * (Psi ** 2.0)
    sigma = (Psi ** (-pp)) * psi
    terms, notes = _terms_31(spec, k, sigma)
    a, w = spec.sample("a"), spec.sample("w")
    inner = primitive(suffix_sup(k) * a)
    ces = _root(integral((inner ** q) * w), q)
    t6 = xmul(xpow(integral(psi), -1.0 / ex.p), ces)
    terms.append(Term("T6", float(t6), True))
    return terms, notes


def _r_terms(spec: ProblemSpec, V: GridFn):
    pp = spec.exponents.p_prime
    v = spec.sample("v")
    k = spec.sample("u") * (V ** -2.0)
    sigma = (V ** pp) * v
    notes = []
    if spec.exponents.case == "ii":
        notes += [_Z_NOTE, "R3 weights the outer integral by A(x)^q w(x)"]
    terms = _hardy_block(spec.exponents, k, sigma, spec.sample("a"), spec.sample("w"), "R")
    return terms, notes


def _eval41(spec: ProblemSpec):
    V = _V(spec)
    terms, notes = _r_terms(spec, V)
    return terms, tuple(notes)


def _p_terms(spec: ProblemSpec, u: GridFn, V: GridFn, B: GridFn, ubar_note: bool = False):
    ex = spec.exponents
    pp, q = ex.p_prime, ex.q
    v, w, a = spec.sample("v"), spec.sample("w"), spec.sample("a")
    Ua = primitive(a * u)
    Wt = tail_primitive(w)
    Vm = (V ** -pp) * v
    rho = ((B / V) ** pp) * v
    C = cumulative((a * u) / B).values
    Sigma = primitive(rho)
    shape = _Shape(ex, w, Wt, primitive(a), C, rho, Sigma)
    Uaq_w = (Ua ** q) * w
    X1 = primitive(Uaq_w)
    Y1 = tail_primitive(Vm)
    X2 = primitive((Ua ** pp) * Vm)
    V_inf = integral(v)
    p5 = xmul(xpow(V_inf, -1.0 / ex.p), _root(integral(Uaq_w), q))
    notes = []
    if ex.case == "i":
        p1, b1 = _sup(xmul(xpow(X1.values, 1.0 / q), xpow(Y1.values, 1.0 / pp)))
        p2, b2 = _sup(xmul(xpow(Wt.values, 1.0 / q), xpow(X2.values, 1.0 / pp)))
        p3, b3 = shape.sj_sup()
        p4, b4 = shape.iw_sup()
        vals = [(p1, b1), (p2, b2), (p3, b3), (p4, b4)]
    else:
        r = ex.r
        p1 = _outer_prod(Uaq_w, [(X1.values, r / ex.p), (Y1.values, r / pp)], r)
        p2 = _outer_prod(w, [(Wt.values, r / ex.p), (X2.values, r / pp)], r)
        p3 = shape.iw_int()
        p4 = shape.sj_int()
        vals = [(p1, False), (p2, False), (p3, False), (p4, False)]
        if ubar_note:
            notes.append("P1 uses the level function in every factor")
    vals.append((float(p5), True))
    terms = [Term(f"P{i}", float(x), bool(bd)) for i, (x, bd) in enumerate(vals, start=1)]
    return terms, notes


def _eval51(spec: ProblemSpec):
    V = _V(spec)
    B = _B(spec)
    terms, notes = _p_terms(spec, spec.sample("u"), V, B)
    return terms, tuple(notes)


def _eval61(spec: ProblemSpec):
    from .operators import split_condition_value

    V = _V(spec)
    B = _B(spec)
    u = spec.sample("u")
    extra = []
    K = split_condition_value(u, spec.sample("b"))
    if not (K <= SPLIT_WARN_LEVEL):
        extra.append(f"split condition value {K:g} exceeds {SPLIT_WARN_LEVEL:g}")
    ubar = level_function(u, B)
    r_terms, r_notes = _r_terms(spec, V)
    p_terms, p_notes = _p_terms(spec, ubar, V, B, ubar_note=True)
    return r_terms + p_terms, tuple(r_notes + p_notes), tuple(extra)


_EVAL = {
    "thm31": _eval31,
    "thm32": _eval32,
    "thm33": _eval33,
    "thm41": _eval41,
    "thm51": _eval51,
    "thm61": _eval61,
}


# ---------------------------------------------------------------------------
# public evaluators


def extend_grid(g: Grid, factor: float = 10.0) -> Grid:
    """Grid on ``[t_min, factor * t_max]`` with the same nodes per decade."""
    span = math.log(g.t_max / g.t_min)
    new_span = math.log(factor * g.t_max / g.t_min)
    n = int(round((g.n - 1) * new_span / span)) + 1
    return make_grid(g.t_min, factor * g.t_max, n)


def _run(spec: ProblemSpec, name: str):
    with collect_warnings() as bucket:
        out = _EVAL[name](spec)
    terms, notes = out[0], out[1]
    extra = out[2] if len(out) > 2 else ()
    return terms, notes, tuple(bucket) + tuple(extra)


def _relative_change(a: float, b: float) -> float:
    if a == b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)) or a == 0.0:
        return INF
    return abs(b - a) / abs(a)


def _report(spec: ProblemSpec, name: str, label: str, truncation: bool) -> CharReport:
    terms, notes, warns = _run(spec, name)
    delta = 0.0
    if truncation:
        wide = replace(spec, grid=extend_grid(spec.grid))
        wide_terms, _, _ = _run(wide, name)
        total = max(t.value for t in terms)
        wide_total = max(t.value for t in wide_terms)
        delta = _relative_change(total, wide_total)
    return CharReport(label, spec.exponents.case, spec.exponents, tuple(terms),
                      truncation_delta=float(delta), notes=tuple(notes), warnings=warns)


def thm31(spec: ProblemSpec, truncation: bool = True) -> CharReport:
    """Supremal Hardy operator ``sup u(tau) int_0^tau h`` from ``L^p(v)`` into the Cesaro space.

    Raises:
        InvalidSpecError: If ``int_0^x v^{1-p'}`` is zero or infinite at an
            interior node.
    """
    return _report(spec, "thm31", "thm31", truncation)


def thm32(spec: ProblemSpec, truncation: bool = True) -> CharReport:
    """As :func:`thm31` with kernel ``u/B`` and density ``b^{p'} v^{1-p'}``."""
    return _report(spec, "thm32", "thm32", truncation)


def thm33(spec: ProblemSpec, truncation: bool = True) -> CharReport:
    """Tail variant ``sup u/B int_tau^inf h``: six terms built from ``Psi`` and ``psi``.

    Raises:
        InvalidSpecError: If ``int_x^inf b^{p'} v^{1-p'}`` is zero or infinite.
    """
    return _report(spec, "thm33", "thm33", truncation)


def thm41(spec: ProblemSpec, truncation: bool = True) -> CharReport:
    """``R_u`` on nonincreasing functions: kernel ``u V^{-2}``, density ``V^{p'} v``."""
    return _report(spec, "thm41", "thm41", truncation)


def thm51(spec: ProblemSpec, truncation: bool = True) -> CharReport:
    """``P_{u,b}`` on nonincreasing functions: terms ``P1`` to ``P5``."""
    return _report(spec, "thm51", "thm51", truncation)


def thm61(spec: ProblemSpec, truncation: bool = True) -> CharReport:
    """``T_{u,b}`` on nonincreasing functions: ``R1..R5`` then ``P1..P5`` with the level function.

    A warning is recorded when the split condition value exceeds 100 or is
    infinite.
    """
    return _report(spec, "thm61", "thm61", truncation)


def thm71_spec(p: float, q: float, gamma_over_n: float, v, w, grid: Grid) -> ProblemSpec:
    """The :func:`thm61` problem behind the fractional maximal estimate."""
    if not (0.0 < gamma_over_n < 1.0):
        raise DomainError("gamma/n must lie in (0, 1)")
    w_eff = wl.Mul(wl.Pow(wl.Var(), -float(q)), wl.as_expr(w))
    return ProblemSpec("thm61", Exponents(p, q), u=wl.Pow(wl.Var(), float(gamma_over_n)),
                       v=v, w=w_eff, a="1", b="1", grid=grid, cone="nonincreasing")


def thm71(p: float, q: float, gamma_over_n: float, v, w, grid: Grid,
          truncation: bool = True) -> CharReport:
    """Fractional maximal operator from ``Lambda^p(v)`` into ``Gamma^q(w)``.

    Evaluates :func:`thm61` with ``u = t^{gamma/n}``, ``b = a = 1`` and outer
    weight ``x^{-q} w(x)``.
    """
    spec = thm71_spec(p, q, gamma_over_n, v, w, grid)
    return _report(spec, "thm61", "thm71", truncation)


def evaluate(spec: ProblemSpec, truncation: bool = True) -> CharReport:
    """Dispatch on ``spec.theorem``."""
    if spec.theorem == "thm71":
        return thm71(spec.exponents.p, spec.exponents.q, spec.gamma_over_n, spec.v, spec.w,
                     spec.grid, truncation=truncation)
    return _report(spec, spec.theorem, spec.theorem, truncation)
