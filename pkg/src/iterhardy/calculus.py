"""Monotone-envelope calculus on truncated grids.

Integrals are computed with the trapezoid rule on node intervals, split at
the jump points a grid function declares. Integrals over ``(0, t_min]`` and
``[t_max, inf)`` are completed analytically when the integrand carries an
exact power form there; otherwise the missing piece is dropped and a warning
is recorded (see :func:`collect_warnings`).

Stieltjes sums follow the node-step convention: a nonincreasing envelope is
read as right-continuous, so the drop between ``t_{k-1}`` and ``t_k`` is an
atom at ``t_k``; a nondecreasing one is read as left-continuous, so the rise
between ``t_i`` and ``t_{i+1}`` is an atom at ``t_i``.
"""

from __future__ import annotations

import contextlib
import contextvars
import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .numgrid import (
    INF,
    ZERO_FORM,
    DomainError,
    Grid,
    GridFn,
    PowerForm,
    xmul,
    xpow,
)

log = logging.getLogger(__name__)

__all__ = [
    "CumFn", "TailFn", "MonotoneEnvelope", "StepFn", "Interval", "Quadrature",
    "collect_warnings", "cumulative", "primitive", "tail", "tail_primitive",
    "integral", "suffix_sup", "prefix_sup", "level_function", "stieltjes",
    "stieltjes_atoms", "rearrange", "is_nonincreasing", "is_nondecreasing",
    "DirectionError",
]


class DirectionError(DomainError):
    """A monotone envelope does not have the direction an operation needs."""


# ---------------------------------------------------------------------------
# warnings

_collector: contextvars.ContextVar = contextvars.ContextVar("iterhardy_warnings", default=None)


@contextlib.contextmanager
def collect_warnings():
    """Collect truncation warnings raised inside the block into a list."""
    bucket: list = []
    token = _collector.set(bucket)
    try:
        yield bucket
    finally:
        _collector.reset(token)


def _warn(msg: str) -> None:
    bucket = _collector.get()
    if bucket is None:
        log.warning(msg)
    elif msg not in bucket:
        bucket.append(msg)


# ---------------------------------------------------------------------------
# quadrature


@dataclass(frozen=True)
class Quadrature:
    """Trapezoid segments for a (possibly discontinuous) weight on a grid.

    Every node interval is split at the weight's jump points. For each
    segment the weight's one-sided limits at both ends are stored, together
    with the position of the ends inside their node interval so that a
    continuous kernel given by node values can be interpolated there.
    """

    grid: Grid
    interval: np.ndarray  # node interval index of each segment
    length: np.ndarray
    f_left: np.ndarray
    f_right: np.ndarray
    theta_left: np.ndarray
    theta_right: np.ndarray
    starts: np.ndarray  # first segment of every node interval

    @classmethod
    def of(cls, f: GridFn) -> "Quadrature":
        g = f.grid
        nodes = g.nodes
        n = g.n
        jumps = np.array(sorted(set(f.jumps)), dtype=float) if f.jumps else np.empty(0)
        idx, x0, x1 = [], [], []
        exact = []
        for i in range(n - 1):
            a, b = nodes[i], nodes[i + 1]
            inner = jumps[(jumps > a) & (jumps < b)] if jumps.size else jumps
            touches = jumps.size and bool(((jumps >= a) & (jumps <= b)).any())
            pts = [a, *inner.tolist(), b]
            for lo, hi in zip(pts[:-1], pts[1:]):
                idx.append(i)
                x0.append(lo)
                x1.append(hi)
                exact.append(bool(touches) and f.at is not None)
        idx = np.asarray(idx, dtype=np.intp)
        x0 = np.asarray(x0)
        x1 = np.asarray(x1)
        exact = np.asarray(exact, dtype=bool)
        w = nodes[idx + 1] - nodes[idx]
        th0 = (x0 - nodes[idx]) / w
        th1 = (x1 - nodes[idx]) / w
        fl = f.values[idx].copy()
        fr = f.values[idx + 1].copy()
        if exact.any():
            fl[exact] = f.evaluate_at(x0[exact], +1)
            fr[exact] = f.evaluate_at(x1[exact], -1)
        length = x1 - x0
        # The last piece ends exactly on the node; keep widths summing to the
        # node spacing when there is no split.
        plain = th0 == 0.0
        plain &= th1 == 1.0
        length[plain] = g.widths[idx[plain]]
        starts = np.searchsorted(idx, np.arange(n - 1))
        return cls(g, idx, length, fl, fr, th0, th1, starts)

    def _kernel_at(self, kernel: np.ndarray):
        k0 = kernel[..., self.interval]
        k1 = kernel[..., self.interval + 1]
        with np.errstate(invalid="ignore"):
            kl = np.where(self.theta_left == 0.0, k0,
                          np.where(self.theta_left == 1.0, k1, k0 + self.theta_left * (k1 - k0)))
            kr = np.where(self.theta_right == 1.0, k1,
                          np.where(self.theta_right == 0.0, k0, k0 + self.theta_right * (k1 - k0)))
        return kl, kr

    def interval_integrals(self, kernel: Optional[np.ndarray] = None) -> np.ndarray:
        """Integrals of ``weight * kernel`` over every node interval.

        Args:
            kernel: Node values of a continuous factor, shape ``(..., n)``;
                ``None`` means the constant 1.

        Returns:
            Array of shape ``(..., n - 1)``.
        """
        if kernel is None:
            seg = 0.5 * self.length * (self.f_left + self.f_right)
        else:
            kl, kr = self._kernel_at(np.asarray(kernel, dtype=float))
            seg = 0.5 * self.length * (xmul(self.f_left, kl) + xmul(self.f_right, kr))
        if seg.shape[-1] == self.grid.n - 1:
            return seg
        return np.add.reduceat(seg, self.starts, axis=-1)

    def cumulative(self, kernel: Optional[np.ndarray] = None) -> np.ndarray:
        """Running integrals from ``t_min`` to each node, shape ``(..., n)``."""
        parts = self.interval_integrals(kernel)
        out = np.zeros(parts.shape[:-1] + (self.grid.n,))
        np.cumsum(parts, axis=-1, out=out[..., 1:])
        return out

    def tails(self, kernel: Optional[np.ndarray] = None) -> np.ndarray:
        """Integrals from each node to ``t_max``, shape ``(..., n)``."""
        parts = self.interval_integrals(kernel)
        out = np.zeros(parts.shape[:-1] + (self.grid.n,))
        np.cumsum(parts[..., ::-1], axis=-1, out=out[..., -2::-1])
        return out


# ---------------------------------------------------------------------------
# cumulative and tail integrals


@dataclass(frozen=True, eq=False)
class CumFn(GridFn):
    """``F(t_i) = int_{t_min}^{t_i} f``; ``head_mass`` is ``int_0^{t_min} f``."""

    head_mass: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.values[0] != 0.0:
            raise DomainError("cumulative integrals start at 0")


@dataclass(frozen=True, eq=False)
class TailFn(GridFn):
    """``G(t_i) = int_{t_i}^{t_max} f``; ``extra`` is ``int_{t_max}^inf f``."""

    extra: float = 0.0

    def __post_init__(self):
        super().__post_init__()
        if self.values[-1] != 0.0:
            raise DomainError("tail integrals end at 0")


def _head_mass(f: GridFn) -> float:
    t1 = f.grid.t_min
    if f.head is not None:
        return f.head.lower_integral(t1)
    if f.values[0] > 0.0:
        _warn(f"no exact form below t_min={t1:g}; integral over (0, t_min) dropped")
    return 0.0


def _tail_mass(f: GridFn) -> float:
    tn = f.grid.t_max
    if f.tail is not None:
        return f.tail.upper_integral(tn)
    if f.values[-1] > 0.0:
        _warn(f"no exact form above t_max={tn:g}; integral over (t_max, inf) dropped")
    return 0.0


def cumulative(f: GridFn) -> CumFn:
    """``F(t_i) = int_{t_min}^{t_i} f`` by jump-aware trapezoid quadrature."""
    vals = Quadrature.of(f).cumulative()
    return CumFn(f.grid, vals, head_mass=_head_mass(f))


def tail(f: GridFn) -> TailFn:
    """``G(t_i) = int_{t_i}^{t_max} f`` with the beyond-``t_max`` part in ``extra``."""
    vals = Quadrature.of(f).tails()
    return TailFn(f.grid, vals, extra=_tail_mass(f))


def _lower_form(pf: PowerForm) -> Optional[PowerForm]:
    """Form of ``x -> int_0^x pf``; ``None`` when divergent."""
    if pf.is_zero:
        return ZERO_FORM
    lam = pf.exponent
    if lam <= -1.0:
        return None
    return PowerForm(pf.coefficient / (lam + 1.0), lam + 1.0)


def _upper_form(pf: PowerForm) -> Optional[PowerForm]:
    """Form of ``x -> int_x^inf pf``; ``None`` when divergent."""
    if pf.is_zero:
        return ZERO_FORM
    lam = pf.exponent
    if lam >= -1.0:
        return None
    return PowerForm(pf.coefficient / (-lam - 1.0), lam + 1.0)


def primitive(f: GridFn) -> GridFn:
    """``x -> int_0^x f`` at the nodes, the part below ``t_min`` done analytically.

    Power-pure integrands are integrated exactly. A divergent integral near 0
    makes every value infinite.
    """
    g = f.grid
    if f.pure:
        form = _lower_form(f.head)
        if form is None:
            return GridFn(g, np.full(g.n, INF))
        return GridFn(g, form(g.nodes), head=form, tail=form, pure=True,
                      at=lambda pts, side: form(np.asarray(pts, dtype=float)))
    cum = cumulative(f)
    head_mass = cum.head_mass
    if math.isinf(head_mass):
        return GridFn(g, np.full(g.n, INF))
    vals = head_mass + cum.values
    head = _lower_form(f.head) if f.head is not None else None
    tail_form = PowerForm(float(vals[-1]), 0.0) if (f.tail is not None and f.tail.is_zero) else None
    return GridFn(g, vals, head=head, tail=tail_form)


def tail_primitive(f: GridFn) -> GridFn:
    """``x -> int_x^inf f`` at the nodes, the part above ``t_max`` done analytically."""
    g = f.grid
    if f.pure:
        form = _upper_form(f.tail)
        if form is None:
            return GridFn(g, np.full(g.n, INF))
        return GridFn(g, form(g.nodes), head=form, tail=form, pure=True,
                      at=lambda pts, side: form(np.asarray(pts, dtype=float)))
    tl = tail(f)
    if math.isinf(tl.extra):
        return GridFn(g, np.full(g.n, INF))
    vals = tl.values + tl.extra
    tail_form = _upper_form(f.tail) if f.tail is not None else None
    head = PowerForm(float(vals[0]), 0.0) if (f.head is not None and f.head.is_zero) else None
    return GridFn(g, vals, head=head, tail=tail_form)


def integral(f: GridFn) -> float:
    """``int_0^inf f`` with analytic completion of both ends."""
    if f.pure:
        pf = f.head
        if pf.is_zero:
            return 0.0
        return INF
    head = _head_mass(f)
    body = float(Quadrature.of(f).interval_integrals().sum())
    return head + body + _tail_mass(f)


# ---------------------------------------------------------------------------
# monotone envelopes


def _nonincreasing(v: np.ndarray) -> bool:
    return bool(np.all(v[:-1] >= v[1:]))


def _nondecreasing(v: np.ndarray) -> bool:
    return bool(np.all(v[:-1] <= v[1:]))


def is_nonincreasing(f) -> bool:
    return _nonincreasing(np.asarray(getattr(f, "values", f), dtype=float))


def is_nondecreasing(f) -> bool:
    return _nondecreasing(np.asarray(getattr(f, "values", f), dtype=float))


@dataclass(frozen=True, eq=False)
class MonotoneEnvelope(GridFn):
    """A monotone node sequence read as a step function.

    ``direction`` is ``"nonincreasing"`` (right-continuous steps) or
    ``"nondecreasing"`` (left-continuous steps).
    """

    direction: str = "nonincreasing"

    def __post_init__(self):
        super().__post_init__()
        if self.direction == "nonincreasing":
            ok = _nonincreasing(self.values)
        elif self.direction == "nondecreasing":
            ok = _nondecreasing(self.values)
        else:
            raise ValueError(f"unknown direction {self.direction!r}")
        if not ok:
            raise DirectionError(f"values are not {self.direction}")

    @property
    def total_variation(self) -> float:
        return abs(float(self.values[0]) - float(self.values[-1]))

    @classmethod
    def of(cls, f: GridFn, direction: str = "nonincreasing") -> "MonotoneEnvelope":
        if isinstance(f, MonotoneEnvelope) and f.direction == direction:
            return f
        return cls(f.grid, f.values, head=f.head, tail=f.tail, pure=f.pure,
                   jumps=f.jumps, at=f.at, direction=direction)


def suffix_sup(f: GridFn) -> MonotoneEnvelope:
    """``phi(t_i) = max_{j >= i} f(t_j)`` in one backward pass.

    The envelope keeps exact end forms where they follow from the input's:
    on the tail a nonincreasing power is its own envelope; on the head the
    envelope is either the head power itself or a constant.
    """
    vals = np.maximum.accumulate(f.values[::-1])[::-1]
    t1 = f.grid.t_min
    head = None
    if f.head is not None:
        h1 = float(f.head(t1))
        lam = f.head.exponent
        if f.head.is_zero or lam >= 0.0:
            head = PowerForm(max(h1, float(vals[0])), 0.0)
        elif h1 >= vals[0] * (1.0 - 1e-12):  # ties up to rounding
            head = f.head
    tail_form = None
    if f.tail is not None and (f.tail.is_zero or f.tail.exponent <= 0.0):
        tail_form = f.tail
    pure = bool(f.pure and f.head is not None and f.head.exponent <= 0.0)
    at = f.at if pure else None
    return MonotoneEnvelope(f.grid, vals, head=head, tail=tail_form, pure=pure,
                            at=at, direction="nonincreasing")


def prefix_sup(f: GridFn) -> MonotoneEnvelope:
    """``phi(t_i) = max_{j <= i} f(t_j)`` (nondecreasing envelope)."""
    vals = np.maximum.accumulate(f.values)
    return MonotoneEnvelope(f.grid, vals, direction="nondecreasing")


def level_function(u: GridFn, B: GridFn) -> GridFn:
    """Least ``B``-multiple majorant: ``ubar = B * suffix_sup(u / B)``.

    Where the supremum is attained at the node itself ``ubar`` is set to
    ``u`` exactly; elsewhere ``max(B * S, u)`` guards against rounding so
    that ``ubar >= u`` holds bit for bit.
    """
    ratio = u / B
    S = suffix_sup(ratio)
    raw = xmul(B.values, S.values)
    peak = S.values == ratio.values
    if peak.all() and S.head is not None and S.head == ratio.head:
        return u  # u/B is already nonincreasing: keep exact forms
    vals = np.where(peak, u.values, np.maximum(raw, u.values))
    head = None
    if B.head is not None and S.head is not None:
        head = B.head.times(S.head)
    tail_form = None
    if S.tail is not None and ratio.tail is not None and S.tail == ratio.tail:
        tail_form = u.tail
    return GridFn(u.grid, vals, head=head, tail=tail_form)


# ---------------------------------------------------------------------------
# Stieltjes integrals


@dataclass(frozen=True)
class Interval:
    """An interval of ``(0, inf)`` with explicit endpoint membership."""

    lo: float = 0.0
    hi: float = INF
    closed_lo: bool = False
    closed_hi: bool = False

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        left = (x >= self.lo) if self.closed_lo else (x > self.lo)
        right = (x <= self.hi) if self.closed_hi else (x < self.hi)
        return left & right

    @classmethod
    def parse(cls, text: str) -> "Interval":
        """Read ``"(0, inf)"``, ``"[x, inf)"``, ``"(a, b]"`` and similar."""
        s = text.strip()
        if len(s) < 5 or s[0] not in "([" or s[-1] not in ")]" or "," not in s:
            raise ValueError(f"not an interval: {text!r}")
        lo, hi = (p.strip() for p in s[1:-1].split(","))
        return cls(float(lo), float(hi), s[0] == "[", s[-1] == "]")


def stieltjes_atoms(phi: GridFn, direction: str = "minus"):
    """Atom positions (node indices) and masses of ``d[-phi]`` or ``d[phi]``.

    Returns:
        ``(index, mass)``; for ``"minus"`` the atom at node ``k >= 1`` has mass
        ``phi_{k-1} - phi_k``; for ``"plus"`` the atom at node ``i <= n-2``
        has mass ``phi_{i+1} - phi_i``.
    """
    v = phi.values
    if direction == "minus":
        if isinstance(phi, MonotoneEnvelope) and phi.direction != "nonincreasing":
            raise DirectionError("d[-phi] needs a nonincreasing envelope")
        if not _nonincreasing(v):
            raise DirectionError("d[-phi] needs a nonincreasing envelope")
        with np.errstate(invalid="ignore"):
            mass = np.where(v[:-1] == v[1:], 0.0, v[:-1] - v[1:])
        return np.arange(1, len(v)), mass
    if direction == "plus":
        if isinstance(phi, MonotoneEnvelope) and phi.direction != "nondecreasing":
            raise DirectionError("d[phi] needs a nondecreasing envelope")
        if not _nondecreasing(v):
            raise DirectionError("d[phi] needs a nondecreasing envelope")
        with np.errstate(invalid="ignore"):
            mass = np.where(v[1:] == v[:-1], 0.0, v[1:] - v[:-1])
        return np.arange(0, len(v) - 1), mass
    raise ValueError(f"direction must be 'minus' or 'plus', got {direction!r}")


def _end_density(phi_form: Optional[PowerForm], g_form: Optional[PowerForm]):
    """Form of ``g * |phi'|`` for power forms; ``None`` if unavailable."""
    if phi_form is None or g_form is None:
        return None
    if phi_form.is_zero or phi_form.exponent == 0.0 or g_form.is_zero:
        return ZERO_FORM
    lam = phi_form.exponent
    dens = PowerForm(phi_form.coefficient * abs(lam), lam - 1.0)
    return g_form.times(dens)


def stieltjes(g: GridFn, phi: GridFn, interval: Interval | str = Interval(),
              direction: str = "minus") -> float:
    """Lebesgue-Stieltjes integral of ``g`` against ``d[-phi]`` or ``d[phi]``.

    Atoms follow the node-step convention of this module; ``g`` is read at
    the atom. The continuous part below ``t_min`` (``"minus"``) or above
    ``t_max`` (``"plus"``) is added from exact end forms when the interval
    reaches it.

    Raises:
        DirectionError: If ``phi`` is not monotone in the required direction.
    """
    if isinstance(interval, str):
        interval = Interval.parse(interval)
    idx, mass = stieltjes_atoms(phi, direction)
    nodes = phi.grid.nodes
    keep = interval.contains(nodes[idx])
    terms = xmul(g.values[idx][keep], mass[keep])
    total = math.fsum(terms.tolist()) if np.all(np.isfinite(terms)) else float(terms.sum())
    if direction == "minus" and interval.lo < nodes[0]:
        dens = _end_density(phi.head, g.head)
        if dens is None:
            if phi.head is None or phi.head.exponent != 0.0:
                _warn("no exact envelope form below t_min; Stieltjes head part dropped")
        else:
            total += dens.lower_integral(nodes[0])
    if direction == "plus" and interval.hi > nodes[-1]:
        dens = _end_density(phi.tail, g.tail)
        if dens is None:
            if phi.tail is None or phi.tail.exponent != 0.0:
                _warn("no exact envelope form above t_max; Stieltjes tail part dropped")
        else:
            total += dens.upper_integral(nodes[-1])
    return total


# ---------------------------------------------------------------------------
# rearrangement


@dataclass(frozen=True)
class StepFn:
    """Nonincreasing step function on ``(0, breaks[-1])``.

    Attributes:
        breaks: ``0 = b_0 < b_1 < ... < b_m``.
        values: ``values[i]`` is taken on ``[b_i, b_{i+1})``, nonincreasing.
        pieces: Piece lengths; defaults to ``diff(breaks)``. Kept separately
            so measures carried over from another function are not rounded
            by the cumulative sum.
    """

    breaks: np.ndarray
    values: np.ndarray
    pieces: Optional[np.ndarray] = None

    @property
    def total_measure(self) -> float:
        return float(self.breaks[-1])

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.breaks) if self.pieces is None else self.pieces

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = np.searchsorted(self.breaks, t, side="right") - 1
        inside = (k >= 0) & (k < len(self.values))
        return np.where(inside, self.values[np.clip(k, 0, len(self.values) - 1)], 0.0)

    def lp_norm(self, p: float) -> float:
        """``(int f^p)^{1/p}`` summed exactly with :func:`math.fsum`."""
        parts = xmul(xpow(self.values, p), self.lengths)
        return math.fsum(parts.tolist()) ** (1.0 / p)

    def distribution(self, level: float) -> float:
        """``|{f > level}|``."""
        return math.fsum(self.lengths[self.values > level].tolist())

    def to_gridfn(self, grid: Grid) -> GridFn:
        return GridFn(grid, self(grid.nodes))


def _pieces(f: GridFn):
    """Constant pieces ``(value, length)`` of the cell-step reading of ``f``."""
    g = f.grid
    edges = g.cell_edges
    vals, lens = [], []
    jumps = sorted(c for c in set(f.jumps) if g.t_min < c < g.t_max)
    for i in range(g.n):
        lo, hi = edges[i], edges[i + 1]
        cuts = [c for c in jumps if lo < c < hi]
        if not cuts or f.at is None:
            vals.append(f.values[i])
            lens.append(hi - lo)
            continue
        pts = [lo, *cuts, hi]
        node = g.nodes[i]
        for a, b in zip(pts[:-1], pts[1:]):
            if a < node < b:
                vals.append(f.values[i])
            else:
                vals.append(float(f.evaluate_at(np.array([0.5 * (a + b)]))[0]))
            lens.append(b - a)
    if f.head is not None and f.head.exponent == 0.0:
        vals.append(f.head.coefficient)
        lens.append(g.t_min)
    return np.asarray(vals, dtype=float), np.asarray(lens, dtype=float)


def rearrange(f: GridFn) -> StepFn:
    """Nonincreasing rearrangement of the cell-step reading of ``f``.

    Every node owns its dual cell; cells containing a jump are split there and
    the piece away from the node takes the exact off-node value. A constant
    head below ``t_min`` contributes a piece of length ``t_min``. Zero pieces
    are dropped.
    """
    vals, lens = _pieces(f)
    if np.isinf(vals).any():
        raise DomainError("rearrangement needs finite values")
    keep = (vals > 0) & (lens > 0)
    vals, lens = vals[keep], lens[keep]
    order = np.argsort(-vals, kind="stable")
    vals, lens = vals[order], lens[order]
    breaks = np.concatenate(([0.0], np.cumsum(lens)))
    return StepFn(breaks, vals, lens)
