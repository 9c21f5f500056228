"""A small expression language for weights on ``(0, inf)``.

Grammar (whitespace insensitive)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := atom ('^' signed-number)?
    atom   := 't' | number | '(' expr ')' | func '(' args ')'
    func   := log | exp | min | max | chi

``chi(a, b)`` is the indicator of the open interval ``(a, b)`` and takes
literal endpoints only (``b`` may be ``inf``). ``min`` and ``max`` take two or
more arguments, ``log`` and ``exp`` exactly one. ``^`` binds tighter than
``*``/``/`` which bind tighter than ``+``/``-``; ``t^2^3`` is rejected.

Evaluation follows the extended nonnegative arithmetic of
:mod:`iterhardy.numgrid`; a negative sub-expression is an error.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .numgrid import (
    INF,
    ZERO_FORM,
    DomainError,
    Grid,
    GridFn,
    PowerForm,
    xdiv,
    xmul,
    xpow,
)

__all__ = [
    "Add", "Sub", "Mul", "Div", "Pow", "Num", "Var", "Func", "Chi",
    "WeightExpr", "ParseError", "WeightDomainError", "PowerForm",
    "parse", "to_text", "evaluate", "eval_weight", "power_form", "end_forms",
    "jump_points", "power_primitive", "sample", "as_expr",
]


class ParseError(ValueError):
    """Malformed weight expression.

    Attributes:
        offset: Byte offset of the offending token.
        expected: Tokens that would have been accepted there.
    """

    def __init__(self, src: str, offset: int, expected):
        self.src = src
        self.offset = offset
        self.expected = frozenset(expected)
        exp = ", ".join(sorted(self.expected)) or "nothing"
        super().__init__(f"parse error at offset {offset} in {src!r}: expected one of {exp}")


class WeightDomainError(DomainError):
    """A weight evaluated to a negative or undefined value."""


# ---------------------------------------------------------------------------
# AST


class _Node:
    """Operator overloading so derived weights can be built as trees."""

    def __mul__(self, other):
        return Mul(self, as_expr(other))

    def __rmul__(self, other):
        return Mul(as_expr(other), self)

    def __truediv__(self, other):
        return Div(self, as_expr(other))

    def __add__(self, other):
        return Add(self, as_expr(other))

    def __pow__(self, e):
        return Pow(self, float(e))

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, eq=True)
class Var(_Node):
    pass


@dataclass(frozen=True, eq=True)
class Num(_Node):
    value: float


@dataclass(frozen=True, eq=True)
class Add(_Node):
    left: "WeightExpr"
    right: "WeightExpr"


@dataclass(frozen=True, eq=True)
class Sub(_Node):
    left: "WeightExpr"
    right: "WeightExpr"


@dataclass(frozen=True, eq=True)
class Mul(_Node):
    left: "WeightExpr"
    right: "WeightExpr"


@dataclass(frozen=True, eq=True)
class Div(_Node):
    left: "WeightExpr"
    right: "WeightExpr"


@dataclass(frozen=True, eq=True)
class Pow(_Node):
    base: "WeightExpr"
    exponent: float


@dataclass(frozen=True, eq=True)
class Func(_Node):
    name: str
    args: tuple


@dataclass(frozen=True, eq=True)
class Chi(_Node):
    a: float
    b: float


WeightExpr = Union[Var, Num, Add, Sub, Mul, Div, Pow, Func, Chi]

T = Var()


def as_expr(obj) -> WeightExpr:
    """Coerce text, numbers and trees to an expression tree."""
    if isinstance(obj, _Node):
        return obj
    if isinstance(obj, str):
        return parse(obj)
    if isinstance(obj, (int, float)):
        if not (obj >= 0 and math.isfinite(obj)):
            raise WeightDomainError(f"literal {obj} is not a finite nonnegative number")
        return Num(float(obj))
    raise TypeError(f"cannot interpret {obj!r} as a weight expression")


# ---------------------------------------------------------------------------
# Tokenizer and parser

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<sym>[-+*/^(),]))"
)
_FUNCS = ("log", "exp", "min", "max", "chi")
_ATOM_START = frozenset({"t", "number", "(", *_FUNCS})


@dataclass(frozen=True)
class _Tok:
    kind: str  # 'number', 'name', a symbol, or 'end'
    text: str
    offset: int


def _tokenize(src: str) -> list:
    toks = []
    pos = 0
    raw = src.encode("utf-8")
    # Work on the decoded text but report byte offsets.
    byte_at = [len(src[:i].encode("utf-8")) for i in range(len(src) + 1)]
    while pos < len(src):
        m = _TOKEN_RE.match(src, pos)
        if m is None or m.end() == pos:
            # Only trailing whitespace left, or an illegal character.
            rest = src[pos:]
            if rest.strip() == "":
                break
            skip = len(rest) - len(rest.lstrip())
            raise ParseError(src, byte_at[pos + skip], _ATOM_START | {"+", "-", "*", "/", "^", ")", ","})
        if m.group("num") is not None:
            toks.append(_Tok("number", m.group("num"), byte_at[m.start("num")]))
        elif m.group("name") is not None:
            toks.append(_Tok("name", m.group("name"), byte_at[m.start("name")]))
        else:
            toks.append(_Tok(m.group("sym"), m.group("sym"), byte_at[m.start("sym")]))
        pos = m.end()
    toks.append(_Tok("end", "", len(raw)))
    return toks


class _Parser:
    def __init__(self, src: str):
        self.src = src
        self.toks = _tokenize(src)
        self.i = 0
        self.possible: set = set()

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def _advance(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        self.possible = set()
        return tok

    def _label(self, tok: _Tok) -> str:
        if tok.kind == "name":
            return tok.text if tok.text in _FUNCS or tok.text == "t" else "name"
        return tok.kind

    def _accept(self, kind: str) -> Optional[_Tok]:
        if self.tok.kind == kind:
            return self._advance()
        self.possible.add(kind)
        return None

    def _expect(self, kind: str) -> _Tok:
        tok = self._accept(kind)
        if tok is None:
            self._fail()
        return tok

    def _fail(self, extra=()):
        raise ParseError(self.src, self.tok.offset, self.possible | set(extra))

    def parse(self) -> WeightExpr:
        node = self.expr()
        self._expect("end")
        return node

    def expr(self) -> WeightExpr:
        node = self.term()
        while True:
            if self._accept("+"):
                node = Add(node, self.term())
            elif self._accept("-"):
                node = Sub(node, self.term())
            else:
                return node

    def term(self) -> WeightExpr:
        node = self.factor()
        while True:
            if self._accept("*"):
                node = Mul(node, self.factor())
            elif self._accept("/"):
                node = Div(node, self.factor())
            else:
                return node

    def factor(self) -> WeightExpr:
        node = self.atom()
        if self._accept("^"):
            node = Pow(node, self.signed_number())
        return node

    def signed_number(self) -> float:
        sign = 1.0
        if self._accept("-"):
            sign = -1.0
        elif self._accept("+"):
            pass
        tok = self._expect("number")
        return sign * float(tok.text)

    def number_literal(self) -> float:
        if self.tok.kind == "name" and self.tok.text == "inf":
            self._advance()
            return INF
        self.possible.add("inf")
        return float(self._expect("number").text)

    def atom(self) -> WeightExpr:
        tok = self.tok
        if tok.kind == "number":
            self._advance()
            return Num(float(tok.text))
        if tok.kind == "(":
            self._advance()
            node = self.expr()
            self._expect(")")
            return node
        if tok.kind == "name":
            if tok.text == "t":
                self._advance()
                return T
            if tok.text in _FUNCS:
                self._advance()
                self._expect("(")
                if tok.text == "chi":
                    start = self.tok.offset
                    a = self.number_literal()
                    self._expect(",")
                    b = self.number_literal()
                    self._expect(")")
                    if not (0.0 <= a < b):
                        raise ParseError(self.src, start, {"endpoints a < b"})
                    return Chi(a, b)
                args = [self.expr()]
                while self._accept(","):
                    args.append(self.expr())
                if tok.text in ("log", "exp") and len(args) != 1:
                    self._fail()
                if tok.text in ("min", "max") and len(args) < 2:
                    self._fail()
                self._expect(")")
                return Func(tok.text, tuple(args))
        self.possible |= _ATOM_START
        self._fail()


def parse(src: str) -> WeightExpr:
    """Parse weight text into an expression tree.

    Raises:
        ParseError: With the byte offset and the set of acceptable tokens.
    """
    return _Parser(src).parse()


# ---------------------------------------------------------------------------
# Printer

_PREC = {Add: 1, Sub: 1, Mul: 2, Div: 2, Pow: 3}


def _num_text(v: float) -> str:
    if v == INF:
        return "inf"
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v)) if v != 0 or math.copysign(1.0, v) > 0 else "0"
    return repr(float(v))


def _prec(node) -> int:
    return _PREC.get(type(node), 4)


def to_text(node: WeightExpr) -> str:
    """Render a tree as text that parses back to the same tree."""

    def wrap(child, need: int) -> str:
        s = to_text(child)
        return f"({s})" if _prec(child) < need else s

    if isinstance(node, Var):
        return "t"
    if isinstance(node, Num):
        return _num_text(node.value)
    if isinstance(node, (Add, Sub)):
        op = "+" if isinstance(node, Add) else "-"
        return f"{wrap(node.left, 1)} {op} {wrap(node.right, 2)}"
    if isinstance(node, (Mul, Div)):
        op = "*" if isinstance(node, Mul) else "/"
        return f"{wrap(node.left, 2)} {op} {wrap(node.right, 3)}"
    if isinstance(node, Pow):
        e = node.exponent
        etext = _num_text(abs(e))
        if math.copysign(1.0, e) < 0:
            etext = "-" + etext
        return f"{wrap(node.base, 4)}^{etext}"
    if isinstance(node, Func):
        return f"{node.name}({', '.join(to_text(a) for a in node.args)})"
    if isinstance(node, Chi):
        return f"chi({_num_text(node.a)}, {_num_text(node.b)})"
    raise TypeError(f"not a weight expression: {node!r}")


# ---------------------------------------------------------------------------
# Evaluation


def _negative(node, t) -> WeightDomainError:
    return WeightDomainError(f"weight {to_text(node)!r} is negative or undefined near t={t}")


def evaluate(node: WeightExpr, t, side: int = 0) -> np.ndarray:
    """Vectorised evaluation at points ``t > 0``.

    Args:
        node: Expression tree.
        t: Points, scalar or array, all positive.
        side: ``0`` for point values, ``-1``/``+1`` for left/right limits
            (only indicators are affected).

    Raises:
        WeightDomainError: If a sub-expression is negative or undefined.
    """
    tt = np.asarray(t, dtype=float)
    if (tt <= 0).any() or np.isnan(tt).any():
        raise WeightDomainError("weights are evaluated at t > 0 only")
    return _ev(node, tt, side)


def _ev(node, t, side):
    if isinstance(node, Var):
        return t
    if isinstance(node, Num):
        return np.full(t.shape, node.value)
    if isinstance(node, Chi):
        if side < 0:
            inside = (node.a < t) & (t <= node.b)
        elif side > 0:
            inside = (node.a <= t) & (t < node.b)
        else:
            inside = (node.a < t) & (t < node.b)
        return inside.astype(float)
    if isinstance(node, Add):
        return _ev(node.left, t, side) + _ev(node.right, t, side)
    if isinstance(node, Sub):
        a, b = _ev(node.left, t, side), _ev(node.right, t, side)
        with np.errstate(invalid="ignore"):
            out = a - b
        bad = np.isnan(out) | (out < 0)
        if bad.any():
            raise _negative(node, float(t[np.argmax(bad)]) if t.ndim else float(t))
        return out
    if isinstance(node, Mul):
        return xmul(_ev(node.left, t, side), _ev(node.right, t, side))
    if isinstance(node, Div):
        return xdiv(_ev(node.left, t, side), _ev(node.right, t, side))
    if isinstance(node, Pow):
        return xpow(_ev(node.base, t, side), node.exponent)
    if isinstance(node, Func):
        vals = [_ev(a, t, side) for a in node.args]
        if node.name == "exp":
            with np.errstate(over="ignore"):
                return np.exp(vals[0])
        if node.name == "log":
            with np.errstate(divide="ignore"):
                out = np.log(vals[0])
            bad = out < 0
            if bad.any():
                raise _negative(node, float(t[np.argmax(bad)]) if t.ndim else float(t))
            return out
        if node.name == "min":
            return np.minimum.reduce(vals)
        if node.name == "max":
            return np.maximum.reduce(vals)
    raise TypeError(f"not a weight expression: {node!r}")


def eval_weight(w, t: float) -> float:
    """Evaluate a weight (tree or text) at a single point ``t > 0``."""
    return float(evaluate(as_expr(w), float(t)))


# ---------------------------------------------------------------------------
# Power forms


def _const_form(f: Optional[PowerForm]) -> Optional[float]:
    if f is None:
        return None
    if f.is_zero:
        return 0.0
    if f.exponent == 0.0:
        return f.coefficient
    return None


def _add_forms(f, g, sign=1.0):
    if f is None or g is None:
        return None
    if g.is_zero:
        return f
    if f.is_zero:
        return g if sign > 0 else None
    if f.exponent != g.exponent:
        return None
    c = f.coefficient + sign * g.coefficient
    if c < 0:
        return None
    return PowerForm(c, f.exponent)


def _le_on(f: PowerForm, g: PowerForm, region: str, edge: float) -> bool:
    """Whether ``f <= g`` on ``(0, edge]`` (head) or ``[edge, inf)`` (tail)."""
    if f.is_zero:
        return True
    if g.is_zero:
        return False
    if f(edge) > g(edge):
        return False
    if region == "head":
        return f.exponent >= g.exponent
    return f.exponent <= g.exponent


def _form(node, region: Optional[str], edge: float) -> Optional[PowerForm]:
    """Exact power form of ``node``; ``region=None`` asks for all of (0, inf)."""
    if isinstance(node, Var):
        return PowerForm(1.0, 1.0)
    if isinstance(node, Num):
        return PowerForm(node.value, 0.0)
    if isinstance(node, Add):
        return _add_forms(_form(node.left, region, edge), _form(node.right, region, edge))
    if isinstance(node, Sub):
        return _add_forms(_form(node.left, region, edge), _form(node.right, region, edge), -1.0)
    if isinstance(node, Mul):
        f, g = _form(node.left, region, edge), _form(node.right, region, edge)
        if (f is not None and f.is_zero) or (g is not None and g.is_zero):
            return ZERO_FORM
        return None if f is None or g is None else f.times(g)
    if isinstance(node, Div):
        f, g = _form(node.left, region, edge), _form(node.right, region, edge)
        if f is not None and f.is_zero:
            return ZERO_FORM
        if f is None or g is None or g.is_zero:
            return None
        inv = g.power(-1.0)
        return None if inv is None else f.times(inv)
    if isinstance(node, Pow):
        f = _form(node.base, region, edge)
        return None if f is None else f.power(node.exponent)
    if isinstance(node, Chi):
        if region == "head":
            if node.a >= edge:
                return ZERO_FORM
            if node.a == 0.0 and node.b > edge:
                return PowerForm(1.0, 0.0)
        elif region == "tail":
            if node.b <= edge:
                return ZERO_FORM
            if node.b == INF and node.a < edge:
                return PowerForm(1.0, 0.0)
        return None
    if isinstance(node, Func):
        forms = [_form(a, region, edge) for a in node.args]
        if node.name in ("exp", "log"):
            c = _const_form(forms[0])
            if c is None:
                return None
            if node.name == "exp":
                return PowerForm(math.exp(c), 0.0) if math.isfinite(math.exp(c)) else None
            return PowerForm(math.log(c), 0.0) if c >= 1.0 else None
        if region is None or any(f is None for f in forms):
            # min/max of powers is a single power on all of (0, inf) only in
            # degenerate cases that are not worth detecting.
            consts = [_const_form(f) for f in forms]
            if any(c is None for c in consts):
                return None
            pick = min(consts) if node.name == "min" else max(consts)
            return PowerForm(pick, 0.0)
        best = forms[0]
        for f in forms[1:]:
            small, large = (best, f) if _le_on(best, f, region, edge) else (
                (f, best) if _le_on(f, best, region, edge) else (None, None))
            if small is None:
                return None
            best = small if node.name == "min" else large
        return best
    raise TypeError(f"not a weight expression: {node!r}")


def power_form(w) -> Optional[PowerForm]:
    """Canonical ``c * t^lam`` when the expression is power-pure on ``(0, inf)``.

    Returns ``None`` for expressions that are not a single power with
    ``c > 0``.
    """
    f = _form(as_expr(w), None, 1.0)
    if f is None or f.is_zero:
        return None
    return f


def end_forms(w, t_min: float, t_max: float):
    """Exact power forms of ``w`` on ``(0, t_min]`` and ``[t_max, inf)``.

    Either entry is ``None`` when no single power (possibly zero) describes
    the weight on that end.
    """
    node = as_expr(w)
    return _form(node, "head", t_min), _form(node, "tail", t_max)


def jump_points(w) -> tuple:
    """Finite positive indicator endpoints occurring in the expression."""
    pts = set()

    def walk(node):
        if isinstance(node, Chi):
            for c in (node.a, node.b):
                if 0.0 < c < INF:
                    pts.add(float(c))
        for attr in ("left", "right", "base"):
            if hasattr(node, attr):
                walk(getattr(node, attr))
        if isinstance(node, Func):
            for a in node.args:
                walk(a)

    walk(as_expr(w))
    return tuple(sorted(pts))


def power_primitive(pf: PowerForm, x: float, side: str) -> float:
    """Exact integral of ``c t^lam`` over ``(0, x]`` (``side="lower"``) or ``[x, inf)``.

    Divergent integrals return ``inf``.
    """
    if x <= 0:
        raise DomainError("power_primitive needs x > 0")
    if side == "lower":
        return pf.lower_integral(x)
    if side == "upper":
        return pf.upper_integral(x)
    raise ValueError(f"side must be 'lower' or 'upper', got {side!r}")


def sample(w, grid: Grid) -> GridFn:
    """Sample a weight on a grid, keeping its exact end forms and jumps."""
    node = as_expr(w)
    values = evaluate(node, grid.nodes)
    pf = power_form(node)
    if pf is not None:
        head = tail = pf
    else:
        head, tail = end_forms(node, grid.t_min, grid.t_max)
    jumps = tuple(c for c in jump_points(node) if grid.t_min <= c <= grid.t_max)
    return GridFn(grid, values, head=head, tail=tail, pure=pf is not None, jumps=jumps,
                  at=lambda pts, side: evaluate(node, pts, side))
