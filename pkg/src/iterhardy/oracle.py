"""Brute-force lower bounds on best constants.

For a :class:`~iterhardy.characterizations.ProblemSpec` the oracle evaluates

    ratio(f) = ||Op f||_target / ||f||_{L^p(v)}

over structured test functions, then improves the best one by multiplicative
coordinate ascent. The largest ratio seen is a lower estimate of the best
constant on the grid.

Test functions are node sequences. Functions on the nonnegative cone vanish
below ``t_min``; nonincreasing functions are continued by their first value.
Pieces of the target norm outside ``[t_min, t_max]`` are replaced by lower
estimates, so truncation never inflates a ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .calculus import Quadrature, primitive, tail_primitive
from .characterizations import CharReport, ProblemSpec, evaluate, thm71_spec
from .numgrid import INF, DomainError, GridFn, xdiv, xmul, xpow

__all__ = [
    "Candidate", "OracleResult", "Certification", "RatioEvaluator",
    "seed_candidates", "ratio", "ascend", "run_oracle", "certify", "project",
    "OPERATOR_OF", "SEED", "ZeroNormError",
]

SEED = 20240601
N_BUMPS = 32
FACTORS = (1.25, 0.8)

# theorem -> (operator, cone)
OPERATOR_OF = {
    "thm31": ("S", "nonnegative"),
    "thm32": ("T", "nonnegative"),
    "thm33": ("Tstar", "nonnegative"),
    "thm41": ("R", "nonincreasing"),
    "thm51": ("P", "nonincreasing"),
    "thm61": ("T", "nonincreasing"),
    "thm71": ("T", "nonincreasing"),
}


class ZeroNormError(DomainError):
    """The source norm of a test function is zero."""


@dataclass(frozen=True)
class Candidate:
    """A test function and its ratio.

    Attributes:
        kind: ``"indicator-scaled"``, ``"dual-density"``, ``"random-bump"``
            or ``"refined"``.
        values: Node values.
        ratio: ``||Op f|| / ||f||``.
        label: Short description of the family member.
    """

    kind: str
    values: np.ndarray
    ratio: float
    label: str = ""

    def f(self, grid) -> GridFn:
        return GridFn(grid, self.values)


@dataclass(frozen=True)
class OracleResult:
    best: Candidate
    history: tuple
    cone_checked: bool
    n_candidates: int = 0

    def to_dict(self) -> dict:
        return {
            "lower": self.best.ratio,
            "bestKind": self.best.kind,
            "bestLabel": self.best.label,
            "history": list(self.history),
            "coneChecked": self.cone_checked,
            "candidates": self.n_candidates,
        }


@dataclass(frozen=True)
class Certification:
    lower: float
    rhs: CharReport
    band: float
    passed: bool
    c_lower: float
    c_upper: float
    oracle: OracleResult = field(repr=False, default=None)


def project(values: np.ndarray, cone: str) -> np.ndarray:
    """Cone projection: running maximum from the right for nonincreasing."""
    vals = np.maximum(np.asarray(values, dtype=float), 0.0)
    if cone == "nonincreasing":
        vals = np.maximum.accumulate(vals[::-1])[::-1]
    return vals


def _effective(spec: ProblemSpec) -> ProblemSpec:
    if spec.theorem == "thm71":
        eff = thm71_spec(spec.exponents.p, spec.exponents.q, spec.gamma_over_n,
                         spec.v, spec.w, spec.grid)
        return ProblemSpec("thm61", eff.exponents, u=eff.u, v=eff.v, w=eff.w, a=eff.a,
                           b=eff.b, grid=eff.grid, cone="nonincreasing", target=spec.target)
    return spec


def _steps(weight: GridFn):
    """Linear maps of trapezoid quadrature against ``weight``.

    Returns ``(c, lo, hi)`` with ``int g * weight = c @ g`` and the integral
    over node interval ``i`` equal to ``lo[i] g_i + hi[i] g_{i+1}``.
    """
    n = weight.grid.n
    E = Quadrature.of(weight).interval_integrals(np.eye(n))
    idx = np.arange(n - 1)
    return E.sum(axis=1), E[idx, idx].copy(), E[idx + 1, idx].copy()


def _head_mass(f: GridFn) -> float:
    if f.head is None:
        return 0.0
    return float(f.head.lower_integral(f.grid.t_min))


class RatioEvaluator:
    """Precomputed, vectorised ``ratio`` for one problem."""

    def __init__(self, spec: ProblemSpec):
        spec = _effective(spec)
        self.spec = spec
        self.op, default_cone = OPERATOR_OF[spec.theorem]
        self.cone = default_cone
        g = spec.grid
        ex = spec.exponents
        self.p, self.q = ex.p, ex.q
        u, v, w, a, b = (spec.sample(k) for k in ("u", "v", "w", "a", "b"))
        self.grid = g
        self.u = u.values
        # source norm
        self.c_v, _, _ = _steps(v)
        self.V_head = _head_mass(v) if self.cone == "nonincreasing" else 0.0
        # inner operator
        if self.op in ("T", "Tstar", "P"):
            if np.any(b.values <= 0.0):
                raise DomainError("b must be positive at every node")
            B = primitive(b)
            self.k = xdiv(u.values, B.values)
            _, self.b_lo, self.b_hi = _steps(b)
            self.B_head = _head_mass(b)
        elif self.op == "S":
            self.k = u.values
            _, self.b_lo, self.b_hi = _steps(GridFn.constant(g, 1.0))
            self.B_head = g.t_min
        else:
            self.k = u.values
        # target
        self.c_w, _, _ = _steps(w)
        self.W_tail = float(tail_primitive(w).values[-1])
        self.W_head = _head_mass(w)
        if spec.target == "cesaro":
            _, self.a_lo, self.a_hi = _steps(a)
            self.A_head = _head_mass(a)
            self.ua_head = _head_mass(u * a)
        else:
            self.uqw_head = _head_mass((u ** self.q) * w)

    # -- pieces ---------------------------------------------------------

    def source_pow(self, f: np.ndarray) -> float:
        """``int f^p v`` including the constant continuation below ``t_min``."""
        fp = xpow(f, self.p)
        val = float(self.c_v @ fp)
        if self.V_head:
            val += float(fp[0]) * self.V_head
        return val

    def _cum(self, g: np.ndarray, lo: np.ndarray, hi: np.ndarray, head: float) -> np.ndarray:
        out = np.empty_like(g)
        out[0] = head
        with np.errstate(invalid="ignore"):
            np.cumsum(xmul(lo, g[:-1]) + xmul(hi, g[1:]), out=out[1:])
        out[1:] += head
        return out

    def apply(self, f: np.ndarray) -> np.ndarray:
        """Operator output at the nodes."""
        op = self.op
        if op == "R":
            return np.maximum.accumulate(xmul(self.k, f)[::-1])[::-1]
        head = f[0] * self.B_head if self.cone == "nonincreasing" else 0.0
        if op == "Tstar":
            parts = xmul(self.b_lo, f[:-1]) + xmul(self.b_hi, f[1:])
            H = np.zeros_like(f)
            H[:-1] = np.cumsum(parts[::-1])[::-1]
        else:
            H = self._cum(f, self.b_lo, self.b_hi, head)
        out = xmul(self.k, H)
        if op == "P":
            return out
        return np.maximum.accumulate(out[::-1])[::-1]

    def target_pow(self, f: np.ndarray, Of: np.ndarray) -> float:
        q = self.q
        if self.spec.target == "cesaro":
            if self.op == "P":
                head = f[0] * self.ua_head if self.cone == "nonincreasing" else 0.0
            else:
                head = Of[0] * self.A_head
            X = self._cum(Of, self.a_lo, self.a_hi, head)
            Xq = xpow(X, q)
            val = float(self.c_w @ Xq)
            if self.W_tail:
                val += float(xmul(Xq[-1], self.W_tail))
            return val
        Oq = xpow(Of, q)
        val = float(self.c_w @ Oq)
        if self.op == "P":
            if self.cone == "nonincreasing":
                val += float(xpow(f[0], q)) * self.uqw_head
        else:
            val += float(xmul(Oq[0], self.W_head))
        return val

    def __call__(self, f: np.ndarray) -> float:
        f = np.asarray(f, dtype=float)
        src = self.source_pow(f)
        if not (src > 0.0):
            raise ZeroNormError("test function has zero source norm")
        tgt = self.target_pow(f, self.apply(f))
        return float(xdiv(tgt ** (1.0 / self.q), src ** (1.0 / self.p)))


def ratio(spec: ProblemSpec, f, evaluator: Optional[RatioEvaluator] = None) -> float:
    """``||Op f||_target / ||f||_source`` for a grid function or node values.

    Raises:
        ZeroNormError: If ``||f||_source = 0``.
    """
    ev = evaluator or RatioEvaluator(spec)
    vals = f.values if isinstance(f, GridFn) else np.asarray(f, dtype=float)
    return ev(vals)


# ---------------------------------------------------------------------------
# seeds


def _subsample(n: int, count: int) -> np.ndarray:
    # Keep clear of the grid ends, where test functions mostly probe truncation.
    margin = max(1, n // 16)
    idx = np.unique(np.round(np.linspace(margin, n - 1 - margin, count)).astype(int))
    return idx


def seed_candidates(spec: ProblemSpec, subsample: int = 16, seed: int = SEED,
                    evaluator: Optional[RatioEvaluator] = None) -> list:
    """Structured and random test functions for the problem's cone.

    Nonnegative cone: ``rho chi(0, x_k)`` for the dual densities
    ``v^{1-p'}``, ``b^{p'} v^{1-p'}`` and ``b^{p'-1} v^{1-p'}``, and
    ``v^{1-p'} chi(x_k, x_m)``. Nonincreasing cone: ``chi(0, x_k)``, sums of
    two or three such indicators, and ``V^{-s/p} chi(0, x_k)``. Both cones get
    :data:`N_BUMPS` log-normal bumps drawn from ``seed``. Candidates with a
    zero or non-finite source norm are dropped.
    """
    ev = evaluator or RatioEvaluator(spec)
    g = ev.grid
    n = g.n
    nodes = g.nodes
    eff = ev.spec
    ex = eff.exponents
    pp = ex.p_prime
    ks = _subsample(n, subsample)
    raw = []

    def chi(k):
        return (np.arange(n) <= k).astype(float)

    if ev.cone == "nonnegative":
        v = eff.sample("v").values
        b = eff.sample("b").values
        dual = xpow(v, 1.0 - pp)
        fams = {
            "v^(1-p')": dual,
            "b^p' v^(1-p')": xmul(xpow(b, pp), dual),
            "b^(p'-1) v^(1-p')": xmul(xpow(b, pp - 1.0), dual),
        }
        for name, dens in fams.items():
            for k in ks:
                raw.append(("dual-density", dens * chi(k), f"{name} chi(0,x{k})"))
        for i, k in enumerate(ks):
            for m in ks[i + 1:]:
                band = ((np.arange(n) >= k) & (np.arange(n) <= m)).astype(float)
                raw.append(("dual-density", dual * band, f"v^(1-p') chi(x{k},x{m})"))
    else:
        for k in ks:
            raw.append(("indicator-scaled", chi(k), f"chi(0,x{k})"))
        for i, k in enumerate(ks):
            for m in ks[i + 1:]:
                raw.append(("indicator-scaled", chi(k) + chi(m), f"chi(0,x{k})+chi(0,x{m})"))
        for i in range(0, len(ks) - 2, 2):
            k, m, l = ks[i], ks[i + 1], ks[i + 2]
            raw.append(("indicator-scaled", chi(k) + chi(m) + chi(l),
                        f"chi(0,x{k})+chi(0,x{m})+chi(0,x{l})"))
        V = primitive(eff.sample("v")).values
        for s in (0.5, 0.8, 0.95, 0.99):
            prof = xpow(V, -s / ex.p)
            for k in ks:
                raw.append(("indicator-scaled", prof * chi(k), f"V^(-{s}/p) chi(0,x{k})"))

    rng = np.random.default_rng(seed)
    logt = np.log(nodes)
    lo, hi = logt[0], logt[-1]
    for j in range(N_BUMPS):
        mu = rng.uniform(lo, hi)
        width = rng.uniform(0.2, 0.25 * (hi - lo))
        amp = rng.lognormal(0.0, 1.0)
        prof = amp * np.exp(-0.5 * ((logt - mu) / width) ** 2)
        raw.append(("random-bump", prof, f"bump{j}"))

    out = []
    for kind, vals, label in raw:
        vals = project(vals, ev.cone)
        if not np.all(np.isfinite(vals)):
            continue
        src = ev.source_pow(vals)
        if not (0.0 < src < INF):
            continue
        out.append(Candidate(kind, vals, ev(vals), label))
    return out


# ---------------------------------------------------------------------------
# ascent and certification


def ascend(spec: ProblemSpec, start: Candidate, iters: int = 10,
           evaluator: Optional[RatioEvaluator] = None):
    """Multiplicative coordinate ascent from ``start``.

    Every node in increasing order is multiplied by each factor in
    :data:`FACTORS`; the perturbed function is projected to the cone and kept
    when the ratio strictly increases. Stops after ``iters`` sweeps or a sweep
    without improvement.

    Returns:
        ``(candidate, history)`` with the ratio after every sweep.
    """
    ev = evaluator or RatioEvaluator(spec)
    best_vals = np.array(start.values, dtype=float)
    best = start.ratio
    history = [best]
    n = best_vals.size
    for _ in range(iters):
        improved = False
        for i in range(n):
            if best_vals[i] == 0.0:
                continue
            for fac in FACTORS:
                trial = best_vals.copy()
                trial[i] *= fac
                trial = project(trial, ev.cone)
                try:
                    r = ev(trial)
                except ZeroNormError:
                    continue
                if r > best:
                    best, best_vals, improved = r, trial, True
                    break
        history.append(best)
        if not improved:
            break
    if len(history) == 1:
        return start, tuple(history)
    return Candidate("refined", best_vals, best, start.label), tuple(history)


def run_oracle(spec: ProblemSpec, subsample: int = 16, ascent_iters: int = 10,
               seed: int = SEED) -> OracleResult:
    """Seeds, then ascent from the best seed."""
    ev = RatioEvaluator(spec)
    cands = seed_candidates(spec, subsample=subsample, seed=seed, evaluator=ev)
    if not cands:
        raise DomainError("no admissible test functions")
    start = max(cands, key=lambda c: c.ratio)
    best, history = ascend(spec, start, ascent_iters, evaluator=ev)
    cone_ok = all(_in_cone(c.values, ev.cone) for c in cands) and _in_cone(best.values, ev.cone)
    return OracleResult(best, history, cone_ok, len(cands))


def _in_cone(vals: np.ndarray, cone: str) -> bool:
    if np.any(vals < 0):
        return False
    return cone != "nonincreasing" or bool(np.all(vals[:-1] >= vals[1:]))


def certify(spec: ProblemSpec, c_lower: float = 1e-2, c_upper: float = 1e2,
            subsample: int = 16, ascent_iters: int = 10, seed: int = SEED,
            truncation: bool = True) -> Certification:
    """Compare the oracle lower bound with the characterization.

    Passes when ``c_lower <= lower / total <= c_upper``.
    """
    if not (0.0 < c_lower <= c_upper):
        raise DomainError("band needs 0 < c_lower <= c_upper")
    res = run_oracle(spec, subsample=subsample, ascent_iters=ascent_iters, seed=seed)
    rep = evaluate(spec, truncation=truncation)
    band = float(xdiv(res.best.ratio, rep.total))
    ok = bool(c_lower <= band <= c_upper) and math.isfinite(rep.total)
    return Certification(res.best.ratio, rep, band, ok, c_lower, c_upper, res)
