"""Integration by parts against powers of a cumulative weight, on step data.

For ``G(t) = int_0^t g`` and a nonincreasing right-continuous ``f`` the
quantities compared are

    A1 = int G^alpha g (f - f(inf)) dt,    A2 = int G^{alpha+1} d[-f],

and for ``G(t) = int_t^inf g`` with nondecreasing left-continuous ``f``

    B1 = int G^alpha g (f - f(0+)) dt,     B2 = int G^{alpha+1} d[f].

Instances are steps on grid nodes: a nonincreasing ``f`` equals ``f_i`` on
``[t_i, t_{i+1})`` (and ``f_0`` below ``t_0``); a nondecreasing one equals
``f_{i+1}`` on ``(t_i, t_{i+1}]`` (and ``f_0`` on ``(0, t_0]``). Since
``G^alpha g = d(G^{alpha+1})/(alpha+1)`` every integral has a closed form in
the node values of ``G^{alpha+1}``. Those sums are carried out in exact
rational arithmetic, so the comparisons between them are free of rounding.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .calculus import DirectionError, Quadrature, is_nondecreasing, is_nonincreasing
from .numgrid import ZERO_FORM, DomainError, GridFn, PowerForm, make_grid

__all__ = [
    "IbpInstance", "AResult", "BResult", "IbpRow", "ibp_A", "ibp_B", "ibp_sweep",
    "random_instance", "rows_to_csv", "CSV_HEADER",
]

CSV_HEADER = ("alpha", "seed", "A1", "A2", "ratio", "pass")


def _fsum(x) -> float:
    return math.fsum(np.asarray(x, dtype=float).tolist())


def _q(x) -> list:
    return [Fraction(float(v)) for v in np.asarray(x, dtype=float)]


@dataclass(frozen=True)
class IbpInstance:
    """Step data for one integration-by-parts check.

    Attributes:
        alpha: Exponent, ``> 0``.
        nodes: Increasing nodes ``t_0 < ... < t_{n-1}``.
        masses: ``int_{t_i}^{t_{i+1}} g`` for ``i < n - 1``.
        head: ``int_0^{t_0} g``.
        tail: ``int_{t_{n-1}}^inf g``.
        f: Node values of the monotone step function.
        direction: ``"nonincreasing"`` or ``"nondecreasing"``.
    """

    alpha: float
    nodes: np.ndarray
    masses: np.ndarray
    head: float
    tail: float
    f: np.ndarray
    direction: str = "nonincreasing"

    def __post_init__(self):
        if not (self.alpha > 0.0 and math.isfinite(self.alpha)):
            raise DomainError("alpha must be positive and finite")
        nodes = np.asarray(self.nodes, dtype=float)
        masses = np.asarray(self.masses, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if masses.shape != (nodes.size - 1,) or f.shape != nodes.shape:
            raise DomainError("nodes, masses and f have inconsistent shapes")
        if np.any(masses < 0) or self.head < 0 or self.tail < 0 or np.any(f < 0):
            raise DomainError("masses and f must be nonnegative")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "masses", masses)
        object.__setattr__(self, "f", f)
        if self.direction not in ("nonincreasing", "nondecreasing"):
            raise ValueError(f"unknown direction {self.direction!r}")

    @classmethod
    def from_functions(cls, alpha: float, g: GridFn, f: GridFn,
                       direction: str = "nonincreasing") -> "IbpInstance":
        """Build from grid functions; ``g`` is integrated with the package quadrature."""
        if f.grid != g.grid:
            raise DomainError("f and g live on different grids")
        t0, t1 = g.grid.t_min, g.grid.t_max
        masses = Quadrature.of(g).interval_integrals()
        head = g.head.lower_integral(t0) if g.head is not None else 0.0
        tail = g.tail.upper_integral(t1) if g.tail is not None else 0.0
        return cls(alpha, g.grid.nodes, masses, head, tail, f.values, direction)

    @property
    def G_from_zero(self) -> np.ndarray:
        """``int_0^{t_i} g``."""
        return self.head + np.concatenate(([0.0], np.cumsum(self.masses)))

    @property
    def G_to_inf(self) -> np.ndarray:
        """``int_{t_i}^inf g``."""
        return self.tail + np.concatenate((np.cumsum(self.masses[::-1])[::-1], [0.0]))

    @property
    def total_mass(self) -> float:
        return self.head + _fsum(self.masses) + self.tail

    def reflected(self) -> "IbpInstance":
        """Image under ``t -> 1/t``: reversed cells, head and tail swapped."""
        flip = "nondecreasing" if self.direction == "nonincreasing" else "nonincreasing"
        return IbpInstance(self.alpha, 1.0 / self.nodes[::-1], self.masses[::-1],
                           self.tail, self.head, self.f[::-1], flip)


@dataclass(frozen=True)
class AResult:
    """Float values plus the exact rationals they were rounded from."""

    A1: float
    A2: float
    limit_term: float
    combined: float
    exact: tuple = (Fraction(0), Fraction(0))

    @property
    def ratio(self) -> float:
        """``A1 / A2`` rounded once from the exact quotient."""
        a1, a2 = self.exact
        return float(a1 / a2) if a2 > 0 else math.nan


@dataclass(frozen=True)
class BResult:
    B1: float
    B2: float
    zero_term: float
    combined: float
    exact: tuple = (Fraction(0), Fraction(0))


def _check_interior(G: np.ndarray, what: str) -> None:
    inner = G[1:-1]
    if np.any(~np.isfinite(inner)) or np.any(inner <= 0.0):
        raise DomainError(f"{what} must be finite and positive at interior nodes")


def ibp_A(inst: IbpInstance) -> AResult:
    """``A1``, ``A2``, the limit term and ``int G^alpha g f`` for nonincreasing ``f``.

    Raises:
        DirectionError: If ``f`` is not nonincreasing.
    """
    if inst.direction != "nonincreasing" or not is_nonincreasing(inst.f):
        raise DirectionError("ibp_A needs a nonincreasing right-continuous f")
    a = inst.alpha + 1.0
    G = inst.G_from_zero
    _check_interior(G, "int_0^t g")
    Ga, phi, qa = _q(G ** a), _q(inst.f), Fraction(a)
    last = phi[-1]
    A1 = (phi[0] - last) * Ga[0] + sum((phi[i] - last) * (Ga[i + 1] - Ga[i])
                                       for i in range(len(phi) - 1))
    A1 /= qa
    A2 = sum((phi[i] - phi[i + 1]) * Ga[i + 1] for i in range(len(phi) - 1))
    G_tot = inst.total_mass
    limit = float(last) * G_tot ** a if last > 0 else 0.0
    return AResult(float(A1), float(A2), limit, float(A1) + limit / a, (A1, A2))


def ibp_B(inst: IbpInstance) -> BResult:
    """``B1``, ``B2``, the zero term and ``int G^alpha g f`` for nondecreasing ``f``.

    Raises:
        DirectionError: If ``f`` is not nondecreasing.
        DomainError: If ``int_t^inf g`` is infinite or zero at an interior node.
    """
    if inst.direction != "nondecreasing" or not is_nondecreasing(inst.f):
        raise DirectionError("ibp_B needs a nondecreasing left-continuous f")
    a = inst.alpha + 1.0
    G = inst.G_to_inf
    _check_interior(G, "int_t^inf g")
    Ga, psi, qa = _q(G ** a), _q(inst.f), Fraction(a)
    first = psi[0]
    B1 = sum((psi[i + 1] - first) * (Ga[i] - Ga[i + 1]) for i in range(len(psi) - 1))
    B1 = (B1 + (psi[-1] - first) * Ga[-1]) / qa
    B2 = sum((psi[i + 1] - psi[i]) * Ga[i] for i in range(len(psi) - 1))
    G_tot = inst.total_mass
    zero = float(first) * G_tot ** a if first > 0 else 0.0
    return BResult(float(B1), float(B2), zero, float(B1) + zero / a, (B1, B2))


# ---------------------------------------------------------------------------
# sweep


@dataclass(frozen=True)
class IbpRow:
    alpha: float
    seed: int
    A1: float
    A2: float
    ratio: float
    passed: bool


def random_instance(alpha: float, seed: int, n: int = 64) -> IbpInstance:
    """Random positive ``g`` and a nonincreasing step ``f`` built from atoms."""
    rng = np.random.default_rng(seed)
    grid = make_grid(1e-3, 1e3, n)
    vals = rng.lognormal(0.0, 1.0, size=n)
    g = GridFn(grid, vals, head=PowerForm(float(vals[0]), 0.0), tail=ZERO_FORM)
    k = int(rng.integers(1, 6))
    pos = rng.choice(np.arange(1, n), size=k, replace=False)
    drops = np.zeros(n)
    drops[pos] = rng.exponential(1.0, size=k)
    floor = rng.exponential(1.0) if rng.random() < 0.5 else 0.0
    # f_i = floor + sum of drops at nodes > i
    f = floor + np.concatenate((np.cumsum(drops[::-1])[::-1][1:], [0.0]))
    return IbpInstance.from_functions(alpha, g, GridFn(grid, f))


def ibp_sweep(alphas: Iterable[float], instances: int, seed: int) -> list:
    """Check ``1/(alpha+1) <= A1/A2 <= alpha+1`` on random step instances.

    The comparison uses the exact rational values. Row ``i`` of each alpha
    uses seed ``seed + i``.
    """
    rows = []
    for alpha in alphas:
        a = Fraction(alpha + 1.0)
        for i in range(instances):
            s = seed + i
            res = ibp_A(random_instance(alpha, s))
            A1, A2 = res.exact
            if min(A1, A2) > 0:
                ok = 1 / a <= A1 / A2 <= a
            else:
                ok = True
            rows.append(IbpRow(float(alpha), s, res.A1, res.A2, res.ratio, bool(ok)))
    return rows


def rows_to_csv(rows: Sequence[IbpRow]) -> str:
    """CSV text with header ``alpha,seed,A1,A2,ratio,pass``; floats via ``repr``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow([repr(r.alpha), r.seed, repr(r.A1), repr(r.A2), repr(r.ratio),
                    "true" if r.passed else "false"])
    return buf.getvalue()
