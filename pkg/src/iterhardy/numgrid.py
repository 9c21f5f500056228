"""Truncated logarithmic grids and extended nonnegative arithmetic.

Every quantity handled by the package lives in ``[0, inf]``. Products and
quotients follow the conventions ``0 * inf = 0``, ``inf / inf = 0``,
``0 / 0 = 0`` and ``a / 0 = inf`` for ``a > 0``.

The scalar helpers :func:`xmul`, :func:`xdiv` and :func:`xpow` accept floats or
numpy arrays and return the same kind of object they were given.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Union

import numpy as np

INF = math.inf

#: Extended nonnegative real: a float in ``[0, inf]``.
XReal = float

ArrayLike = Union[float, np.ndarray]


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


def _scalar_out(out: np.ndarray, *args) -> ArrayLike:
    if all(np.ndim(a) == 0 for a in args):
        return float(out)
    return out


def xmul(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Product with ``0 * inf = 0``."""
    aa = np.asarray(a, dtype=float)
    bb = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore", over="ignore"):
        out = aa * bb
    out = np.where((aa == 0.0) | (bb == 0.0), 0.0, out)
    return _scalar_out(out, a, b)


def xdiv(a: ArrayLike, b: ArrayLike) -> ArrayLike:
    """Quotient with ``inf/inf = 0``, ``0/0 = 0`` and ``a/0 = inf`` for ``a > 0``."""
    aa = np.asarray(a, dtype=float)
    bb = np.asarray(b, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        out = aa / bb
    out = np.where(bb == 0.0, np.where(aa > 0.0, INF, 0.0), out)
    out = np.where(np.isinf(bb), 0.0, out)
    return _scalar_out(out, a, b)


def xpow(a: ArrayLike, e: float) -> ArrayLike:
    """Power of a nonnegative extended real; ``0**(-s) = inf`` and ``inf**(-s) = 0``."""
    aa = np.asarray(a, dtype=float)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        out = np.power(aa, float(e))
    return _scalar_out(out, a)


def check_xreal(values: ArrayLike, what: str = "value") -> None:
    """Raise :class:`DomainError` unless every entry lies in ``[0, inf]``."""
    arr = np.asarray(values, dtype=float)
    if np.isnan(arr).any():
        raise DomainError(f"{what} contains NaN")
    if (arr < 0).any():
        raise DomainError(f"{what} is negative")


@dataclass(frozen=True)
class Exponents:
    """Lebesgue exponents ``p`` (source) and ``q`` (target), both in ``(1, inf)``.

    Attributes:
        p: Source exponent.
        q: Target exponent.
    """

    p: float
    q: float

    def __post_init__(self):
        for name in ("p", "q"):
            val = getattr(self, name)
            if not (1.0 < val < INF):
                raise DomainError(f"exponent {name}={val} must lie in (1, inf)")

    @property
    def p_prime(self) -> float:
        return self.p / (self.p - 1.0)

    @property
    def q_prime(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def r(self) -> Optional[float]:
        """``pq/(p-q)`` when ``q < p``, otherwise ``None``."""
        if self.q < self.p:
            return self.p * self.q / (self.p - self.q)
        return None

    @property
    def case(self) -> str:
        """``"i"`` when ``p <= q`` and ``"ii"`` when ``q < p``."""
        return "i" if self.p <= self.q else "ii"


@dataclass(frozen=True)
class PowerForm:
    """The function ``coefficient * t**exponent``.

    A zero coefficient encodes the zero function. Power forms describe a
    weight exactly, either on all of ``(0, inf)`` or on one of the two
    truncated ends of a grid.
    """

    coefficient: float
    exponent: float

    def __post_init__(self):
        c, lam = float(self.coefficient), float(self.exponent)
        if not (math.isfinite(c) and c >= 0.0):
            raise DomainError(f"power-form coefficient {c} must be finite and >= 0")
        if not math.isfinite(lam):
            raise DomainError(f"power-form exponent {lam} must be finite")
        object.__setattr__(self, "coefficient", c)
        object.__setattr__(self, "exponent", 0.0 if c == 0.0 else lam)

    @property
    def is_zero(self) -> bool:
        return self.coefficient == 0.0

    def __call__(self, t: ArrayLike) -> ArrayLike:
        if self.is_zero:
            return xmul(0.0, t)
        return self.coefficient * xpow(t, self.exponent)

    def times(self, other: "PowerForm") -> "PowerForm":
        if self.is_zero or other.is_zero:
            return ZERO_FORM
        c = self.coefficient * other.coefficient
        if not math.isfinite(c):
            raise DomainError("power-form coefficient overflow")
        return PowerForm(c, self.exponent + other.exponent)

    def power(self, e: float) -> Optional["PowerForm"]:
        """``self**e``; ``None`` when the result is identically infinite."""
        if e == 0.0:
            return PowerForm(1.0, 0.0)
        if self.is_zero:
            return ZERO_FORM if e > 0 else None
        c = self.coefficient ** e
        if not (math.isfinite(c) and c > 0.0):
            return None
        return PowerForm(c, self.exponent * e)

    def scaled(self, s: float) -> "PowerForm":
        return PowerForm(self.coefficient * s, self.exponent)

    def lower_integral(self, x: float) -> float:
        """``int_0^x c t^lam dt``; infinite unless ``lam > -1``."""
        if self.is_zero:
            return 0.0
        lam = self.exponent
        if lam <= -1.0:
            return INF
        return self.coefficient * x ** (lam + 1.0) / (lam + 1.0)

    def upper_integral(self, x: float) -> float:
        """``int_x^inf c t^lam dt``; infinite unless ``lam < -1``."""
        if self.is_zero:
            return 0.0
        lam = self.exponent
        if lam >= -1.0:
            return INF
        return self.coefficient * x ** (lam + 1.0) / (-lam - 1.0)


ZERO_FORM = PowerForm(0.0, 0.0)


def _form_mul(f: Optional[PowerForm], g: Optional[PowerForm]) -> Optional[PowerForm]:
    if f is not None and f.is_zero:
        return ZERO_FORM
    if g is not None and g.is_zero:
        return ZERO_FORM
    if f is None or g is None:
        return None
    return f.times(g)


def _form_div(f: Optional[PowerForm], g: Optional[PowerForm]) -> Optional[PowerForm]:
    if f is not None and f.is_zero:
        return ZERO_FORM
    if f is None or g is None or g.is_zero:
        return None
    inv = g.power(-1.0)
    return None if inv is None else f.times(inv)


def _form_pow(f: Optional[PowerForm], e: float) -> Optional[PowerForm]:
    return None if f is None else f.power(e)


def _log_nodes(t_min: float, t_max: float, n: int) -> np.ndarray:
    # Nodes depend only on the rational position j/(n-1), so refinement
    # reproduces the coarse nodes bit for bit.
    lo, hi = math.log10(t_min), math.log10(t_max)
    frac = np.arange(n, dtype=float) / float(n - 1)
    nodes = 10.0 ** (lo + (hi - lo) * frac)
    nodes[0], nodes[-1] = t_min, t_max
    return nodes


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Grid:
    """Log-uniform partition of ``[t_min, t_max]`` standing in for ``(0, inf)``.

    Attributes:
        t_min: Left truncation point (> 0).
        t_max: Right truncation point (> t_min).
        n: Number of nodes.
        nodes: Node positions, ``nodes[0] == t_min`` and ``nodes[-1] == t_max``.
        widths: Lengths of the ``n - 1`` node intervals.
        cells: Measures of the ``n`` dual cells, split at geometric midpoints;
            they sum to ``t_max - t_min``.
    """

    t_min: float
    t_max: float
    n: int
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    widths: np.ndarray = field(init=False, repr=False, compare=False)
    cells: np.ndarray = field(init=False, repr=False, compare=False)
    cell_edges: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        t_min, t_max, n = float(self.t_min), float(self.t_max), int(self.n)
        if not (0.0 < t_min < t_max < INF):
            raise DomainError(f"need 0 < t_min < t_max < inf, got ({t_min}, {t_max})")
        if n < 2:
            raise DomainError(f"need at least 2 nodes, got {n}")
        nodes = _log_nodes(t_min, t_max, n)
        if not np.all(np.diff(nodes) > 0):
            raise DomainError("grid nodes are not strictly increasing; reduce n")
        mids = np.sqrt(nodes[:-1] * nodes[1:])
        edges = np.concatenate(([t_min], mids, [t_max]))
        object.__setattr__(self, "t_min", t_min)
        object.__setattr__(self, "t_max", t_max)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "nodes", _readonly(nodes))
        object.__setattr__(self, "widths", _readonly(np.diff(nodes)))
        object.__setattr__(self, "cells", _readonly(np.diff(edges)))
        object.__setattr__(self, "cell_edges", _readonly(edges))


MIN_NODES = 8


def make_grid(t_min: float, t_max: float, n: int) -> Grid:
    """Build a log-uniform grid.

    Args:
        t_min: Left end, ``0 < t_min``.
        t_max: Right end, ``t_min < t_max``.
        n: Node count. Grids used by evaluators need ``n >= MIN_NODES``;
            smaller grids are allowed here for bookkeeping.

    Returns:
        The grid; equal inputs give identical nodes.

    Raises:
        DomainError: On a violated precondition.
    """
    return Grid(t_min, t_max, n)


def refine(g: Grid, factor: int) -> Grid:
    """Split every node interval into ``factor`` log-equal pieces.

    The result has ``(n - 1) * factor + 1`` nodes and contains the nodes of
    ``g`` exactly.
    """
    if int(factor) != factor or factor < 2:
        raise DomainError(f"refinement factor must be an integer >= 2, got {factor}")
    return Grid(g.t_min, g.t_max, (g.n - 1) * int(factor) + 1)


Evaluator = Callable[[np.ndarray, int], np.ndarray]


@dataclass(frozen=True, eq=False)
class GridFn:
    """Nonnegative function sampled at the nodes of a grid.

    Besides the node values a ``GridFn`` may carry exact knowledge that the
    quadrature in :mod:`iterhardy.calculus` uses to complete integrals:

    Attributes:
        grid: The grid.
        values: Node values in ``[0, inf]``.
        head: Exact power form of the function on ``(0, t_min]``, if known.
        tail: Exact power form on ``[t_max, inf)``, if known.
        pure: ``True`` when ``head`` describes the function on all of ``(0, inf)``.
        jumps: Points in ``[t_min, t_max]`` where the function may jump.
        at: Exact evaluator ``at(points, side)`` off the nodes; ``side`` is
            ``-1`` / ``+1`` for one-sided limits and ``0`` for point values.
    """

    grid: Grid
    values: np.ndarray
    head: Optional[PowerForm] = None
    tail: Optional[PowerForm] = None
    pure: bool = False
    jumps: tuple = ()
    at: Optional[Evaluator] = field(default=None, repr=False)

    def __post_init__(self):
        vals = _readonly(self.values)
        if vals.shape != (self.grid.n,):
            raise DomainError(f"expected {self.grid.n} values, got shape {vals.shape}")
        check_xreal(vals, "grid function")
        object.__setattr__(self, "values", vals)
        if self.pure and self.head is None:
            object.__setattr__(self, "pure", False)

    # construction -------------------------------------------------------

    @classmethod
    def constant(cls, grid: Grid, c: float) -> "GridFn":
        form = PowerForm(float(c), 0.0)
        return cls(grid, np.full(grid.n, float(c)), head=form, tail=form, pure=True,
                   at=lambda pts, side: np.full(np.shape(pts), float(c)))

    @classmethod
    def power(cls, grid: Grid, c: float, lam: float) -> "GridFn":
        form = PowerForm(float(c), float(lam))
        return cls(grid, form(grid.nodes), head=form, tail=form, pure=True,
                   at=lambda pts, side: form(np.asarray(pts, dtype=float)))

    def with_values(self, values: np.ndarray) -> "GridFn":
        """Same grid, new node values, no exact side information."""
        return GridFn(self.grid, values)

    # evaluation ---------------------------------------------------------

    def evaluate_at(self, points: ArrayLike, side: int = 0) -> np.ndarray:
        """Values at arbitrary points of ``[t_min, t_max]``.

        Uses the exact evaluator when present and linear interpolation
        between nodes otherwise.
        """
        pts = np.asarray(points, dtype=float)
        if self.at is not None:
            return np.asarray(self.at(pts, side), dtype=float)
        return np.interp(pts, self.grid.nodes, self.values)

    # arithmetic ---------------------------------------------------------

    def _combine(self, other: "GridFn", op, form_op) -> "GridFn":
        if other.grid != self.grid:
            raise DomainError("grid functions live on different grids")
        vals = op(self.values, other.values)
        at = None
        if self.at is not None or other.at is not None or self.jumps or other.jumps:
            a, b = self, other
            at = lambda pts, side: op(a.evaluate_at(pts, side), b.evaluate_at(pts, side))
        jumps = tuple(sorted(set(self.jumps) | set(other.jumps)))
        return GridFn(self.grid, vals,
                      head=form_op(self.head, other.head),
                      tail=form_op(self.tail, other.tail),
                      pure=self.pure and other.pure,
                      jumps=jumps, at=at)

    def __mul__(self, other) -> "GridFn":
        if isinstance(other, GridFn):
            return self._combine(other, xmul, _form_mul)
        return self.scale(other)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "GridFn":
        if isinstance(other, GridFn):
            return self._combine(other, xdiv, _form_div)
        if other <= 0:
            raise DomainError("division by a nonpositive scalar")
        return self.scale(1.0 / other)

    def __pow__(self, e: float) -> "GridFn":
        e = float(e)
        at = None
        if self.at is not None or self.jumps:
            src = self
            at = lambda pts, side: xpow(src.evaluate_at(pts, side), e)
        return GridFn(self.grid, xpow(self.values, e),
                      head=_form_pow(self.head, e), tail=_form_pow(self.tail, e),
                      pure=self.pure, jumps=self.jumps, at=at)

    def scale(self, s: float) -> "GridFn":
        s = float(s)
        if not (s >= 0.0 and math.isfinite(s)):
            raise DomainError(f"scale factor {s} must be finite and >= 0")
        at = None
        if self.at is not None or self.jumps:
            src = self
            at = lambda pts, side: xmul(s, src.evaluate_at(pts, side))
        head = None if self.head is None else self.head.scaled(s)
        tail = None if self.tail is None else self.tail.scaled(s)
        return GridFn(self.grid, xmul(s, self.values), head=head, tail=tail,
                      pure=self.pure, jumps=self.jumps, at=at)
