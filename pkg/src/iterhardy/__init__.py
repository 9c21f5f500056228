"""Weighted inequalities for iterated Hardy-type and supremal operators.

Submodules:

* :mod:`~iterhardy.numgrid`: extended reals, log grids, grid functions.
* :mod:`~iterhardy.weightlang`: weight expression language.
* :mod:`~iterhardy.calculus`: primitives, envelopes, Stieltjes sums, rearrangement.
* :mod:`~iterhardy.operators`: the operators and the norms they act between.
* :mod:`~iterhardy.characterizations`: closed-form norm characterizations.
* :mod:`~iterhardy.oracle`: lower bounds from test functions.
* :mod:`~iterhardy.ibp`: integration-by-parts checks on step data.
* :mod:`~iterhardy.cli`: command-line front end.
"""

from .characterizations import (
    THEOREMS, CharReport, InvalidSpecError, ProblemSpec, Term, evaluate, thm31, thm32,
    thm33, thm41, thm51, thm61, thm71,
)
from .numgrid import INF, DomainError, Exponents, Grid, GridFn, PowerForm, make_grid, refine
from .oracle import certify, run_oracle
from .weightlang import ParseError, parse, sample

__version__ = "0.1.0"

__all__ = [
    "THEOREMS", "CharReport", "InvalidSpecError", "ProblemSpec", "Term", "evaluate",
    "thm31", "thm32", "thm33", "thm41", "thm51", "thm61", "thm71",
    "INF", "DomainError", "Exponents", "Grid", "GridFn", "PowerForm", "make_grid", "refine",
    "certify", "run_oracle", "ParseError", "parse", "sample", "__version__",
]
