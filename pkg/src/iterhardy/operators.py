"""Supremal and Hardy-type operators, and the norms they are measured in.

All operators act on node values of a :class:`~iterhardy.numgrid.GridFn`:

* ``R_u h(t)      = sup_{tau >= t} u(tau) h(tau)``
* ``P_{u,b} h(t)  = u(t)/B(t) * int_0^t h b``
* ``T_{u,b} g(t)  = sup_{tau >= t} u(tau)/B(tau) * int_0^tau g b``
* ``T*_{u,b} g(t) = sup_{tau >= t} u(tau)/B(tau) * int_tau^inf g b``

with ``B(t) = int_0^t b``. Suprema run over grid nodes up to ``t_max`` and,
when the inputs jump between nodes, over both one-sided limits at each jump.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from . import weightlang as wl
from .calculus import (
    MonotoneEnvelope,
    Quadrature,
    StepFn,
    integral,
    is_nonincreasing,
    level_function,
    primitive,
    rearrange,
    suffix_sup,
    tail_primitive,
)
from .numgrid import INF, DomainError, GridFn, PowerForm, xdiv, xmul, xpow

__all__ = [
    "OperatorSpec", "apply_R", "apply_P", "apply_T", "apply_Tstar", "apply",
    "cesaro_norm", "wlp_norm", "lambda_norm", "gamma_norm",
    "split_condition_value", "split_constant", "frac_max_rearranged",
    "MonotonicityError",
]


class MonotonicityError(DomainError):
    """Input that must be nonincreasing is not."""


def _same_grid(*fs: GridFn) -> None:
    g = fs[0].grid
    for f in fs[1:]:
        if f.grid != g:
            raise DomainError("grid functions live on different grids")


def _B(b: GridFn) -> GridFn:
    if np.any(b.values <= 0.0):
        raise DomainError("b must be positive at every node")
    return primitive(b)


def _inner_jumps(grid, *fs: GridFn) -> np.ndarray:
    """Jump points of the inputs strictly between ``t_min`` and ``t_max``."""
    pts = sorted({c for f in fs for c in f.jumps if grid.t_min < c < grid.t_max})
    return np.asarray(pts, dtype=float)


def _partial_integrals(f: GridFn, points: np.ndarray) -> np.ndarray:
    """``int_0^c f`` at points ``c`` inside the grid.

    Uses the same jump-split trapezoid segments as :func:`primitive`; the
    segment holding ``c`` is cut there with the exact left limit ``f(c-)``.
    """
    g = f.grid
    if f.pure:
        prim = primitive(f)
        return np.asarray(prim.evaluate_at(points), dtype=float)
    F = primitive(f).values
    q = Quadrature.of(f)
    nodes = g.nodes
    w = nodes[q.interval + 1] - nodes[q.interval]
    x0 = nodes[q.interval] + q.theta_left * w
    x1 = nodes[q.interval] + q.theta_right * w
    seg = 0.5 * q.length * (q.f_left + q.f_right)
    out = np.empty(len(points))
    for k, c in enumerate(points):
        i = int(np.searchsorted(nodes, c, side="right")) - 1
        lo = q.starts[i]
        hi = q.starts[i + 1] if i + 1 < g.n - 1 else len(seg)
        acc = [F[i]]
        for s in range(lo, hi):
            if x1[s] <= c * (1 + 1e-14):
                acc.append(seg[s])
                continue
            fc = float(f.evaluate_at(np.array([c]), -1)[0])
            acc.append(0.5 * (c - x0[s]) * (q.f_left[s] + fc))
            break
        out[k] = math.fsum(acc) if np.all(np.isfinite(acc)) else float(np.sum(acc))
    return out


def _with_points(env: MonotoneEnvelope, points: np.ndarray, left: np.ndarray,
                 right: np.ndarray) -> MonotoneEnvelope:
    """Merge one-sided values at off-node points into a suffix supremum.

    ``left`` (the value just below ``c``) counts for nodes ``t < c`` and
    ``right`` for nodes ``t <= c``.
    """
    if points.size == 0:
        return env
    nodes = env.grid.nodes
    vals = env.values.copy()
    for c, lv, rv in zip(points, left, right):
        below = np.searchsorted(nodes, c, side="left")
        upto = np.searchsorted(nodes, c, side="right")
        vals[:below] = np.maximum(vals[:below], lv)
        vals[:upto] = np.maximum(vals[:upto], rv)
    head = env.head
    if head is not None and vals[0] != env.values[0]:
        t1 = env.grid.t_min
        if head.is_zero or head.exponent >= 0.0:
            head = PowerForm(float(vals[0]), 0.0)
        elif float(head(t1)) < vals[0]:
            head = None
    return MonotoneEnvelope(env.grid, vals, head=head, tail=env.tail,
                            direction="nonincreasing")


def apply_R(u: GridFn, h: GridFn) -> MonotoneEnvelope:
    """``R_u h``: suffix supremum of ``u h``."""
    _same_grid(u, h)
    f = u * h
    env = suffix_sup(f)
    pts = _inner_jumps(u.grid, u, h)
    if pts.size == 0:
        return env
    left = np.asarray(f.evaluate_at(pts, -1), dtype=float)
    right = np.asarray(f.evaluate_at(pts, +1), dtype=float)
    return _with_points(env, pts, left, right)


def _kernel_points(u: GridFn, b: GridFn, g: GridFn, tail_side: bool):
    """One-sided values of ``(u/B) * int gb`` at the jumps of ``u``, ``b`` and ``g``."""
    pts = _inner_jumps(u.grid, u, b, g)
    if pts.size == 0:
        return pts, pts, pts
    Bc = _partial_integrals(b, pts)
    Hc = _partial_integrals(g * b, pts)
    if tail_side:
        total = primitive(g * b).values[-1] + tail_primitive(g * b).values[-1]
        Hc = np.maximum(total - Hc, 0.0)
    ul = np.asarray(u.evaluate_at(pts, -1), dtype=float)
    ur = np.asarray(u.evaluate_at(pts, +1), dtype=float)
    return pts, xmul(xdiv(ul, Bc), Hc), xmul(xdiv(ur, Bc), Hc)


def apply_P(u: GridFn, b: GridFn, h: GridFn) -> GridFn:
    """``P_{u,b} h = (u / B) * int_0^t h b``."""
    _same_grid(u, b, h)
    B = _B(b)
    H = primitive(h * b)
    return GridFn(u.grid, xmul(xdiv(u.values, B.values), H.values))


def apply_T(u: GridFn, b: GridFn, g: GridFn) -> MonotoneEnvelope:
    """``T_{u,b} g``: suffix supremum of ``(u / B) * int_0^tau g b``.

    The supremum also reads the kernel at jumps of ``u``, ``b`` and ``g``
    between nodes, where ``int_0^tau g b`` typically has a corner.
    """
    _same_grid(u, b, g)
    B = _B(b)
    H = primitive(g * b)
    env = suffix_sup(GridFn(u.grid, xmul(xdiv(u.values, B.values), H.values)))
    return _with_points(env, *_kernel_points(u, b, g, tail_side=False))


def apply_Tstar(u: GridFn, b: GridFn, g: GridFn) -> MonotoneEnvelope:
    """``T*_{u,b} g``: suffix supremum of ``(u / B) * int_tau^inf g b``."""
    _same_grid(u, b, g)
    B = _B(b)
    H = tail_primitive(g * b)
    env = suffix_sup(GridFn(u.grid, xmul(xdiv(u.values, B.values), H.values)))
    return _with_points(env, *_kernel_points(u, b, g, tail_side=True))


@dataclass(frozen=True)
class OperatorSpec:
    """One of the four operators with its weights.

    Attributes:
        kind: ``"R"``, ``"P"``, ``"T"`` or ``"Tstar"``.
        u: Outer weight.
        b: Inner weight (unused for ``R``).
    """

    kind: str
    u: GridFn
    b: Optional[GridFn] = None

    def __post_init__(self):
        if self.kind not in ("R", "P", "T", "Tstar"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        if self.kind != "R" and self.b is None:
            raise ValueError(f"operator {self.kind} needs b")


def apply(op: OperatorSpec, h: GridFn) -> GridFn:
    """Apply an :class:`OperatorSpec` to ``h``."""
    if op.kind == "R":
        return apply_R(op.u, h)
    if op.kind == "P":
        return apply_P(op.u, op.b, h)
    if op.kind == "T":
        return apply_T(op.u, op.b, h)
    return apply_Tstar(op.u, op.b, h)


# ---------------------------------------------------------------------------
# norms


def _check_exponent(name: str, q: float) -> None:
    if not (1.0 <= q < INF):
        raise DomainError(f"exponent {name}={q} must lie in [1, inf)")


def wlp_norm(f: GridFn, v: GridFn, p: float) -> float:
    """``(int_0^inf f^p v)^{1/p}``."""
    _check_exponent("p", p)
    _same_grid(f, v)
    return integral((f ** p) * v) ** (1.0 / p)


def cesaro_norm(f: GridFn, w: GridFn, a: GridFn, q: float) -> float:
    """``(int_0^inf (int_0^x f a)^q w(x) dx)^{1/q}``."""
    _check_exponent("q", q)
    _same_grid(f, w, a)
    X = primitive(f * a)
    return integral((X ** q) * w) ** (1.0 / q)


def _weight_integrals(v, breaks: np.ndarray) -> np.ndarray:
    """``int_{b_i}^{b_{i+1}} v`` for a weight expression ``v``."""
    expr = wl.as_expr(v)
    pf = wl.power_form(expr)
    out = np.empty(len(breaks) - 1)
    if pf is not None and pf.exponent > -1.0:
        prim = pf.lower_integral
        vals = np.array([prim(b) if b > 0 else 0.0 for b in breaks])
        return np.diff(vals)
    jumps = wl.jump_points(expr)
    f = lambda t: float(wl.evaluate(expr, max(t, 1e-300)))
    for i, (lo, hi) in enumerate(zip(breaks[:-1], breaks[1:])):
        pts = [c for c in jumps if lo < c < hi] or None
        val, _ = integrate.quad(f, lo, hi, points=pts, limit=200)
        out[i] = val
    return out


def lambda_norm(f: GridFn, v, p: float) -> float:
    """``||f^*||_{p,v}`` with ``v`` a weight expression on the measure axis."""
    _check_exponent("p", p)
    fs = rearrange(f)
    if fs.values.size == 0:
        return 0.0
    mass = _weight_integrals(v, fs.breaks)
    parts = xmul(xpow(fs.values, p), mass)
    return math.fsum(parts.tolist()) ** (1.0 / p)


def gamma_norm(f: GridFn, w, q: float) -> float:
    """``||f^{**}||_{q,w}`` where ``f^{**}(t) = t^{-1} int_0^t f^*``."""
    _check_exponent("q", q)
    fs: StepFn = rearrange(f)
    if fs.values.size == 0:
        return 0.0
    expr = wl.as_expr(w)
    jumps = wl.jump_points(expr)
    wt = lambda t: float(wl.evaluate(expr, t))
    cum = np.concatenate(([0.0], np.cumsum(fs.values * fs.lengths)))
    parts = []
    for i, (lo, hi) in enumerate(zip(fs.breaks[:-1], fs.breaks[1:])):
        c0, v = cum[i], fs.values[i]
        g = lambda t, c0=c0, v=v, lo=lo: ((c0 + v * (t - lo)) / t) ** q * wt(t)
        pts = [c for c in jumps if lo < c < hi] or None
        val, _ = integrate.quad(g, lo, hi, points=pts, limit=200)
        parts.append(val)
    total = cum[-1]
    T = fs.breaks[-1]
    pts = [c for c in jumps if c > T]
    lo = T
    for c in pts + [INF]:
        val, _ = integrate.quad(lambda t: (total / t) ** q * wt(t), lo, c, limit=200)
        parts.append(val)
        lo = c
    return math.fsum(parts) ** (1.0 / q)


# ---------------------------------------------------------------------------
# split condition and rearrangement reduction


def split_condition_value(u: GridFn, b: GridFn) -> float:
    """``max_t u(t)/B(t) * int_0^t b/u``; infinite when the condition fails."""
    _same_grid(u, b)
    if np.any(u.values <= 0.0):
        raise DomainError("split condition needs u > 0 at every node")
    B = _B(b)
    inner = primitive(b / u)
    vals = xmul(xdiv(u.values, B.values), inner.values)
    return float(np.max(vals))


def split_constant(u: GridFn, b: GridFn, f: GridFn) -> float:
    """Smallest ``K`` with ``T_{u,b} f <= K (R_u f + P_{ubar,b} f)`` at every node."""
    B = _B(b)
    ubar = level_function(u, B)
    T = apply_T(u, b, f).values
    rhs = apply_R(u, f).values + apply_P(ubar, b, f).values
    return float(np.max(xdiv(T, rhs)))


def frac_max_rearranged(fstar: GridFn, gamma_over_n: float) -> MonotoneEnvelope:
    """``t -> sup_{tau >= t} tau^{gamma/n - 1} int_0^tau f^*``.

    Raises:
        MonotonicityError: If ``fstar`` is not nonincreasing along the nodes.
    """
    if not (0.0 < gamma_over_n < 1.0):
        raise DomainError("gamma/n must lie in (0, 1)")
    if not is_nonincreasing(fstar):
        raise MonotonicityError("fractional maximal reduction needs a nonincreasing f*")
    g = fstar.grid
    u = GridFn.power(g, 1.0, gamma_over_n)
    b = GridFn.constant(g, 1.0)
    return apply_T(u, b, fstar)
