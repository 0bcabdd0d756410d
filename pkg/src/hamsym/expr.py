"""Scalar expression trees over chart coordinates.

Expressions are immutable, structurally hashed trees.  Coordinates are
referenced by index into the chart ordering; names only matter for
parsing and printing.  The only simplification ever applied is constant
folding in the node constructors (``x + 0 -> x``, ``2 * 3 -> 6``, ...).
Identities are checked numerically, see :mod:`hamsym.sampling`.
"""

from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import DomainError

FUNCTIONS = ("sin", "cos", "exp", "log", "sqrt")


class Expr:
    __slots__ = ("_hash",)

    def _fields(self) -> tuple:
        raise NotImplementedError

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other) -> bool:
        if self is other:
            return True
        if type(self) is not type(other) or self._hash != other._hash:
            return False
        return self._fields() == other._fields()

    def __repr__(self) -> str:
        args = ", ".join(repr(f) for f in self._fields())
        return f"{type(self).__name__}({args})"

    # arithmetic sugar; every operator goes through the folding constructors
    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return sub(self, as_expr(other))

    def __rsub__(self, other):
        return sub(as_expr(other), self)

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __neg__(self):
        return neg(self)

    def __pow__(self, exponent):
        if isinstance(exponent, Const):
            exponent = exponent.value
        if not isinstance(exponent, (int, float)):
            raise TypeError("exponent must be a real constant")
        return power(self, float(exponent))


class Const(Expr):
    __slots__ = ("value",)

    def __init__(self, value: float):
        value = float(value)
        if value == 0.0:
            value = 0.0  # drop the sign of -0.0
        self.value = value
        self._hash = hash(("c", value))

    def _fields(self):
        return (self.value,)


class Coord(Expr):
    __slots__ = ("index",)

    def __init__(self, index: int):
        if index < 0:
            raise ValueError("coordinate index must be non-negative")
        self.index = int(index)
        self._hash = hash(("x", self.index))

    def _fields(self):
        return (self.index,)


class Neg(Expr):
    __slots__ = ("arg",)

    def __init__(self, arg: Expr):
        self.arg = arg
        self._hash = hash(("neg", arg._hash))

    def _fields(self):
        return (self.arg,)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name: str, arg: Expr):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg
        self._hash = hash((name, arg._hash))

    def _fields(self):
        return (self.name, self.arg)


class BinOp(Expr):
    __slots__ = ("left", "right")
    symbol = "?"

    def __init__(self, left: Expr, right: Expr):
        self.left = left
        self.right = right
        self._hash = hash((self.symbol, left._hash, right._hash))

    def _fields(self):
        return (self.left, self.right)


class Add(BinOp):
    __slots__ = ()
    symbol = "+"


class Sub(BinOp):
    __slots__ = ()
    symbol = "-"


class Mul(BinOp):
    __slots__ = ()
    symbol = "*"


class Div(BinOp):
    __slots__ = ()
    symbol = "/"


class Pow(Expr):
    __slots__ = ("base", "exponent")

    def __init__(self, base: Expr, exponent: float):
        self.base = base
        self.exponent = float(exponent)
        self._hash = hash(("^", base._hash, self.exponent))

    def _fields(self):
        return (self.base, self.exponent)


ZERO = Const(0.0)
ONE = Const(1.0)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, float, np.integer, np.floating)):
        return Const(float(value))
    raise TypeError(f"cannot convert {type(value).__name__} to an expression")


def is_const(e: Expr, value: float | None = None) -> bool:
    return isinstance(e, Const) and (value is None or e.value == value)


def _is_integer(c: float) -> bool:
    return math.isfinite(c) and c == int(c)


# -- folding constructors ---------------------------------------------------


def const(value: float) -> Const:
    return Const(value)


def coord(index: int) -> Coord:
    return Coord(index)


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if is_const(a, 0.0):
        return b
    if is_const(b, 0.0):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if is_const(b, 0.0):
        return a
    if is_const(a, 0.0):
        return neg(b)
    return Sub(a, b)


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if is_const(a, 0.0) or is_const(b, 0.0):
        return ZERO
    if is_const(a, 1.0):
        return b
    if is_const(b, 1.0):
        return a
    if is_const(a, -1.0):
        return neg(b)
    if is_const(b, -1.0):
        return neg(a)
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    if isinstance(b, Const) and b.value != 0.0:
        if isinstance(a, Const):
            return Const(a.value / b.value)
        if b.value == 1.0:
            return a
    if is_const(a, 0.0) and not is_const(b, 0.0):
        return ZERO
    return Div(a, b)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def power(base: Expr, exponent: float) -> Expr:
    exponent = float(exponent)
    if exponent == 0.0:
        return ONE
    if exponent == 1.0:
        return base
    if isinstance(base, Const):
        b = base.value
        if b > 0 or (_is_integer(exponent) and (b != 0 or exponent > 0)):
            return Const(b**exponent)
    return Pow(base, exponent)


_FOLD = {
    "sin": (math.sin, lambda v: True),
    "cos": (math.cos, lambda v: True),
    "exp": (math.exp, lambda v: v < 700.0),
    "log": (math.log, lambda v: v > 0.0),
    "sqrt": (math.sqrt, lambda v: v >= 0.0),
}


def func(name: str, arg: Expr) -> Expr:
    if isinstance(arg, Const):
        fn, ok = _FOLD[name]
        if ok(arg.value):
            return Const(fn(arg.value))
    return Func(name, arg)


def sin(a) -> Expr:
    return func("sin", as_expr(a))


def cos(a) -> Expr:
    return func("cos", as_expr(a))


def exp(a) -> Expr:
    return func("exp", as_expr(a))


def log(a) -> Expr:
    return func("log", as_expr(a))


def sqrt(a) -> Expr:
    return func("sqrt", as_expr(a))


def total(terms) -> Expr:
    result: Expr = ZERO
    for t in terms:
        result = add(result, as_expr(t))
    return result


# -- structure queries ----------------------------------------------------------


@lru_cache(maxsize=None)
def max_index(e: Expr) -> int:
    """Largest coordinate index referenced by ``e`` (-1 for constants)."""
    if isinstance(e, Coord):
        return e.index
    if isinstance(e, Const):
        return -1
    if isinstance(e, (Neg, Func)):
        return max_index(e.arg)
    if isinstance(e, Pow):
        return max_index(e.base)
    return max(max_index(e.left), max_index(e.right))


def depends_on(e: Expr, index: int) -> bool:
    if isinstance(e, Coord):
        return e.index == index
    if isinstance(e, Const):
        return False
    if isinstance(e, (Neg, Func)):
        return depends_on(e.arg, index)
    if isinstance(e, Pow):
        return depends_on(e.base, index)
    return depends_on(e.left, index) or depends_on(e.right, index)


# -- differentiation -----------------------------------------------------------


@lru_cache(maxsize=1 << 16)
def differentiate(e: Expr, index: int) -> Expr:
    """Exact partial derivative of ``e`` with respect to coordinate ``index``."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Coord):
        return ONE if e.index == index else ZERO
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, index))
    if isinstance(e, Add):
        return add(differentiate(e.left, index), differentiate(e.right, index))
    if isinstance(e, Sub):
        return sub(differentiate(e.left, index), differentiate(e.right, index))
    if isinstance(e, Mul):
        a, b = e.left, e.right
        return add(mul(differentiate(a, index), b), mul(a, differentiate(b, index)))
    if isinstance(e, Div):
        a, b = e.left, e.right
        da, db = differentiate(a, index), differentiate(b, index)
        if is_const(db, 0.0):
            return div(da, b)
        return sub(div(da, b), div(mul(a, db), power(b, 2.0)))
    if isinstance(e, Pow):
        db = differentiate(e.base, index)
        if is_const(db, 0.0):
            return ZERO
        c = e.exponent
        return mul(mul(Const(c), power(e.base, c - 1.0)), db)
    if isinstance(e, Func):
        a = e.arg
        da = differentiate(a, index)
        if is_const(da, 0.0):
            return ZERO
        if e.name == "sin":
            outer = cos(a)
        elif e.name == "cos":
            outer = neg(sin(a))
        elif e.name == "exp":
            outer = e
        elif e.name == "log":
            return div(da, a)
        else:  # sqrt
            return div(da, mul(Const(2.0), e))
        return mul(outer, da)
    raise TypeError(f"not an expression: {e!r}")


def gradient(e: Expr, dim: int) -> tuple[Expr, ...]:
    return tuple(differentiate(e, i) for i in range(dim))


# -- compilation and evaluation ---------------------------------------------------

Evaluator = Callable[[np.ndarray, float], "tuple[np.ndarray, np.ndarray]"]


class _Emitter:
    def __init__(self):
        self.lines: list[str] = []
        self.names: dict[Expr, str] = {}

    def tmp(self, code: str) -> str:
        name = f"t{len(self.lines)}"
        self.lines.append(f"{name} = {code}")
        return name

    def guard(self, cond: str) -> None:
        self.lines.append(f"bad |= {cond}")

    def emit(self, e: Expr) -> str:
        cached = self.names.get(e)
        if cached is not None:
            return cached
        if isinstance(e, Const):
            name = f"({e.value!r})"
        elif isinstance(e, Coord):
            name = self.tmp(f"x[{e.index}]")
        elif isinstance(e, Neg):
            name = self.tmp(f"-{self.emit(e.arg)}")
        elif isinstance(e, BinOp):
            a, b = self.emit(e.left), self.emit(e.right)
            if isinstance(e, Div):
                self.guard(f"_abs({b}) <= delta")
            name = self.tmp(f"{a} {e.symbol} {b}")
        elif isinstance(e, Pow):
            b = self.emit(e.base)
            c = e.exponent
            if not _is_integer(c):
                self.guard(f"{b} <= delta")
            elif c < 0:
                self.guard(f"_abs({b}) <= delta")
            name = self.tmp(f"{b} ** ({c!r})")
        elif isinstance(e, Func):
            a = self.emit(e.arg)
            if e.name == "log":
                self.guard(f"{a} <= delta")
            elif e.name == "sqrt":
                self.guard(f"{a} < delta")
            name = self.tmp(f"_{e.name}({a})")
        else:
            raise TypeError(f"not an expression: {e!r}")
        self.names[e] = name
        return name


_NAMESPACE = {
    "_abs": np.abs,
    "_sin": np.sin,
    "_cos": np.cos,
    "_exp": np.exp,
    "_log": np.log,
    "_sqrt": np.sqrt,
    "_zeros": np.zeros,
    "_empty": np.empty,
    "_isfinite": np.isfinite,
}


@lru_cache(maxsize=4096)
def compile_exprs(exprs: tuple[Expr, ...]) -> Evaluator:
    """Compile expressions into one vectorized evaluator.

    The returned callable takes ``x`` of shape ``(dim, N)`` and a singularity
    threshold ``delta`` and returns ``(values, bad)`` with ``values`` of shape
    ``(len(exprs), N)``.  ``bad[k]`` is set when point ``k`` hits a divisor with
    absolute value ``<= delta``, a log/pow base ``<= delta``, a sqrt argument
    ``< delta`` or a non-finite result.  With ``delta = 0`` this is exactly
    the domain of the expressions.
    """
    em = _Emitter()
    outs = [em.emit(e) for e in exprs]
    body = ["bad = _zeros(x.shape[1:], dtype=bool)"] + em.lines
    body.append(f"out = _empty(({len(exprs)},) + x.shape[1:])")
    body += [f"out[{k}] = {name}" for k, name in enumerate(outs)]
    body.append("bad |= ~_isfinite(out).all(axis=0)")
    body.append("return out, bad")
    src = "def _evaluator(x, delta):\n" + "\n".join("    " + line for line in body)
    namespace = dict(_NAMESPACE)
    exec(compile(src, "<hamsym-expr>", "exec"), namespace)
    fn = namespace["_evaluator"]

    def evaluator(x: np.ndarray, delta: float = 0.0):
        with np.errstate(all="ignore"):
            return fn(x, delta)

    evaluator.source = src  # type: ignore[attr-defined]
    evaluator.raw = fn  # type: ignore[attr-defined]  # no errstate guard; callers supply one
    return evaluator


def evaluate_many(exprs: Sequence[Expr], points, delta: float = 0.0):
    """Evaluate expressions on a batch of points of shape ``(dim, N)``."""
    points = np.asarray(points, dtype=float)
    if points.ndim == 1:
        points = points[:, None]
    needed = max((max_index(e) for e in exprs), default=-1) + 1
    if points.shape[0] < needed:
        raise ValueError(f"points have dimension {points.shape[0]}, expressions need {needed}")
    return compile_exprs(tuple(exprs))(points, delta)


def evaluate(e: Expr, point) -> float:
    """Value of ``e`` at a single point; raises :class:`DomainError` outside the domain."""
    point = np.asarray(point, dtype=float).reshape(-1)
    if max_index(e) >= point.shape[0]:
        raise ValueError(f"point has dimension {point.shape[0]}, expression needs {max_index(e) + 1}")
    values, bad = compile_exprs((e,))(point[:, None], 0.0)
    if bad[0]:
        raise DomainError("expression undefined", point)
    return float(values[0, 0])


# -- printing -------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_NEG, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def _number(v: float) -> str:
    if _is_integer(v) and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def to_text(e: Expr, names: Sequence[str]) -> str:
    """Render ``e`` in the parser grammar; ``parse(to_text(e))`` evaluates like ``e``."""
    return _fmt(e, names)[0]


def _wrap(part: tuple[str, int], min_prec: int) -> str:
    text, prec = part
    return text if prec >= min_prec else f"({text})"


def _fmt(e: Expr, names) -> tuple[str, int]:
    if isinstance(e, Const):
        if e.value < 0:
            return "-" + _number(-e.value), _PREC_NEG
        return _number(e.value), _PREC_ATOM
    if isinstance(e, Coord):
        return names[e.index], _PREC_ATOM
    if isinstance(e, Neg):
        return "-" + _wrap(_fmt(e.arg, names), _PREC_POW), _PREC_NEG
    if isinstance(e, Func):
        return f"{e.name}({_fmt(e.arg, names)[0]})", _PREC_ATOM
    if isinstance(e, Pow):
        c = e.exponent
        exponent = _number(c) if c >= 0 else f"(-{_number(-c)})"
        return f"{_wrap(_fmt(e.base, names), _PREC_ATOM)}^{exponent}", _PREC_POW
    if isinstance(e, (Add, Sub)):
        left = _wrap(_fmt(e.left, names), _PREC_ADD)
        right = _wrap(_fmt(e.right, names), _PREC_MUL)
        return f"{left} {e.symbol} {right}", _PREC_ADD
    if isinstance(e, (Mul, Div)):
        left = _wrap(_fmt(e.left, names), _PREC_MUL)
        right = _wrap(_fmt(e.right, names), _PREC_POW)
        return f"{left}{e.symbol}{right}", _PREC_MUL
    raise TypeError(f"not an expression: {e!r}")
