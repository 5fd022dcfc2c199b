"""Immutable symbolic expression trees over named real coordinates.

Nodes are frozen dataclasses compared structurally. The constructor helpers
(:func:`add`, :func:`mul`, ...) apply a deliberately small set of rewrites:
rational constant folding, additive and multiplicative identities, x*0 -> 0,
x - x -> 0, -(-x) -> x, and integer-power unit rules. Nothing beyond that.
Semantic equality of expressions is decided downstream by probabilistic
sampling (see :mod:`degenlag.symbolic.zerotest`), never by a normal form.

Constants are exact rationals; evaluation converts to IEEE doubles at the
leaves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from ..errors import DomainError, MissingCoordinateError

FUNCTION_NAMES = ("sin", "cos", "exp", "log", "sqrt")

ExprLike = Union["Expr", int, Fraction]


class Expr:
    """Base class of all expression nodes.

    Arithmetic operators build new trees through the smart constructors, so
    `q * v + 1` is the tree you expect with the usual folding applied.
    """

    __slots__ = ()

    def __add__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else add(self, other)

    def __radd__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else add(other, self)

    def __sub__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else sub(self, other)

    def __rsub__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else sub(other, self)

    def __mul__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else mul(self, other)

    def __rmul__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else mul(other, self)

    def __truediv__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else div(self, other)

    def __rtruediv__(self, other):
        other = _coerce(other)
        return NotImplemented if other is None else div(other, self)

    def __pow__(self, exponent):
        if not isinstance(exponent, int) or isinstance(exponent, bool):
            return NotImplemented
        return power(self, exponent)

    def __neg__(self):
        return neg(self)

    def __str__(self) -> str:
        return unparse(self)


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True)
class Coord(Expr):
    name: str


@dataclass(frozen=True)
class Add(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Sub(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Mul(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Div(Expr):
    lhs: Expr
    rhs: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Func(Expr):
    name: str
    arg: Expr


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def con(value) -> Const:
    """Exact rational constant from an int, Fraction, or numeric string."""
    if isinstance(value, bool):
        raise TypeError("booleans are not expression constants")
    return Const(Fraction(value))


def coord(name: str) -> Coord:
    return Coord(name)


def _coerce(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        return Const(Fraction(x))
    return None


def _is_zero(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 0


def _is_one(e: Expr) -> bool:
    return isinstance(e, Const) and e.value == 1


def add(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value + b.value)
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return Add(a, b)


def sub(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value - b.value)
    if _is_zero(b):
        return a
    if _is_zero(a):
        return neg(b)
    if a == b:
        return ZERO
    return Sub(a, b)


def _const_factor(e: Expr):
    """Split e into (rational factor, rest) when a constant sits at the
    top: c*x, x*c, x/c, -x. None when there is nothing to pull out."""
    if isinstance(e, Mul):
        if isinstance(e.lhs, Const):
            return e.lhs.value, e.rhs
        if isinstance(e.rhs, Const):
            return e.rhs.value, e.lhs
    if isinstance(e, Div) and isinstance(e.rhs, Const) and e.rhs.value != 0:
        return 1 / e.rhs.value, e.lhs
    if isinstance(e, Neg):
        return Fraction(-1), e.arg
    return None


def mul(a: Expr, b: Expr) -> Expr:
    if isinstance(a, Const) and isinstance(b, Const):
        return Const(a.value * b.value)
    if _is_zero(a) or _is_zero(b):
        return ZERO
    if _is_one(a):
        return b
    if _is_one(b):
        return a
    if isinstance(a, Const) and a.value == -1:
        return neg(b)
    if isinstance(b, Const) and b.value == -1:
        return neg(a)
    if isinstance(a, Const):
        f = _const_factor(b)
        if f is not None:
            return mul(Const(a.value * f[0]), f[1])
    if isinstance(b, Const):
        f = _const_factor(a)
        if f is not None:
            return mul(Const(b.value * f[0]), f[1])
    return Mul(a, b)


def div(a: Expr, b: Expr) -> Expr:
    # division by a constant zero is kept as a node; it fails at evaluation
    if isinstance(a, Const) and isinstance(b, Const) and b.value != 0:
        return Const(a.value / b.value)
    if _is_one(b):
        return a
    if isinstance(b, Const) and b.value == -1:
        return neg(a)
    if isinstance(b, Const) and b.value != 0:
        f = _const_factor(a)
        if f is not None:
            return mul(Const(f[0] / b.value), f[1])
    return Div(a, b)


def power(base: Expr, exponent: int) -> Expr:
    if not isinstance(exponent, int) or isinstance(exponent, bool):
        raise TypeError("exponent must be an integer")
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if isinstance(base, Const) and (base.value != 0 or exponent > 0):
        return Const(base.value**exponent)
    return Pow(base, exponent)


def neg(a: Expr) -> Expr:
    if isinstance(a, Const):
        return Const(-a.value)
    if isinstance(a, Neg):
        return a.arg
    return Neg(a)


def func(name: str, arg: Expr) -> Expr:
    if name not in FUNCTION_NAMES:
        raise ValueError(f"unknown function {name!r}")
    return Func(name, arg)


def sin(a: Expr) -> Expr:
    return func("sin", a)


def cos(a: Expr) -> Expr:
    return func("cos", a)


def exp(a: Expr) -> Expr:
    return func("exp", a)


def log(a: Expr) -> Expr:
    return func("log", a)


def sqrt(a: Expr) -> Expr:
    return func("sqrt", a)


# ----------------------------------------------------------------------
# structural recursion


def free_coords(e: Expr) -> frozenset[str]:
    """The set of coordinate names the expression refers to."""
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Coord):
        return frozenset((e.name,))
    if isinstance(e, (Add, Sub, Mul, Div)):
        return free_coords(e.lhs) | free_coords(e.rhs)
    if isinstance(e, Pow):
        return free_coords(e.base)
    if isinstance(e, (Neg, Func)):
        return free_coords(e.arg)
    raise TypeError(f"not an expression node: {e!r}")


def differentiate(e: Expr, name: str) -> Expr:
    """Partial derivative with respect to the named coordinate.

    Output is built through the smart constructors, so the obvious zero and
    unit factors are already folded away.
    """
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Coord):
        return ONE if e.name == name else ZERO
    if isinstance(e, Add):
        return add(differentiate(e.lhs, name), differentiate(e.rhs, name))
    if isinstance(e, Sub):
        return sub(differentiate(e.lhs, name), differentiate(e.rhs, name))
    if isinstance(e, Mul):
        return add(
            mul(differentiate(e.lhs, name), e.rhs),
            mul(e.lhs, differentiate(e.rhs, name)),
        )
    if isinstance(e, Div):
        u, v = e.lhs, e.rhs
        du, dv = differentiate(u, name), differentiate(v, name)
        return div(sub(mul(du, v), mul(u, dv)), power(v, 2))
    if isinstance(e, Pow):
        du = differentiate(e.base, name)
        return mul(mul(con(e.exponent), power(e.base, e.exponent - 1)), du)
    if isinstance(e, Neg):
        return neg(differentiate(e.arg, name))
    if isinstance(e, Func):
        da = differentiate(e.arg, name)
        if e.name == "sin":
            outer = cos(e.arg)
        elif e.name == "cos":
            outer = neg(sin(e.arg))
        elif e.name == "exp":
            outer = exp(e.arg)
        elif e.name == "log":
            return div(da, e.arg)
        else:  # sqrt
            return div(da, mul(con(2), sqrt(e.arg)))
        return mul(outer, da)
    raise TypeError(f"not an expression node: {e!r}")


def gradient(e: Expr, names) -> list[Expr]:
    return [differentiate(e, n) for n in names]


def substitute(e: Expr, subs: Mapping[str, Expr]) -> Expr:
    """Replace coordinates by expressions, rebuilding through the smart
    constructors (so substitution re-folds constants)."""
    if isinstance(e, Const):
        return e
    if isinstance(e, Coord):
        return subs.get(e.name, e)
    if isinstance(e, Add):
        return add(substitute(e.lhs, subs), substitute(e.rhs, subs))
    if isinstance(e, Sub):
        return sub(substitute(e.lhs, subs), substitute(e.rhs, subs))
    if isinstance(e, Mul):
        return mul(substitute(e.lhs, subs), substitute(e.rhs, subs))
    if isinstance(e, Div):
        return div(substitute(e.lhs, subs), substitute(e.rhs, subs))
    if isinstance(e, Pow):
        return power(substitute(e.base, subs), e.exponent)
    if isinstance(e, Neg):
        return neg(substitute(e.arg, subs))
    if isinstance(e, Func):
        return func(e.name, substitute(e.arg, subs))
    raise TypeError(f"not an expression node: {e!r}")


def simplify(e: Expr) -> Expr:
    """Re-run the constructor rewrites bottom-up. Idempotent."""
    return substitute(e, {})


def evaluate(e: Expr, point: Mapping[str, float]) -> float:
    """Evaluate at a point given as a name -> value mapping.

    This is the reference tree-walking evaluator: exact error reporting,
    one point at a time. Hot paths compile to a tape instead (see
    :mod:`degenlag.symbolic.tape`).

    Raises
    ------
    MissingCoordinateError
        if the point does not bind a coordinate the expression uses.
    DomainError
        on division by zero, log of a non-positive value, square root of a
        negative value, or a zero base raised to a negative power.
    """
    if isinstance(e, Const):
        return float(e.value)
    if isinstance(e, Coord):
        try:
            return float(point[e.name])
        except KeyError:
            raise MissingCoordinateError(
                f"point does not bind coordinate '{e.name}'"
            ) from None
    if isinstance(e, Add):
        return evaluate(e.lhs, point) + evaluate(e.rhs, point)
    if isinstance(e, Sub):
        return evaluate(e.lhs, point) - evaluate(e.rhs, point)
    if isinstance(e, Mul):
        return evaluate(e.lhs, point) * evaluate(e.rhs, point)
    if isinstance(e, Div):
        num = evaluate(e.lhs, point)
        den = evaluate(e.rhs, point)
        if den == 0.0:
            raise DomainError(f"division by zero in '{e}'")
        return num / den
    if isinstance(e, Pow):
        base = evaluate(e.base, point)
        k = e.exponent
        if base == 0.0 and k < 0:
            raise DomainError(f"zero raised to negative power in '{e}'")
        # repeated multiplication, matching the tape backends bit for bit
        r = base
        for _ in range(abs(k) - 1):
            r = r * base
        return 1.0 / r if k < 0 else r
    if isinstance(e, Neg):
        return -evaluate(e.arg, point)
    if isinstance(e, Func):
        x = evaluate(e.arg, point)
        if e.name == "sin":
            return math.sin(x)
        if e.name == "cos":
            return math.cos(x)
        if e.name == "exp":
            try:
                return math.exp(x)
            except OverflowError:
                return math.inf
        if e.name == "log":
            if x <= 0.0:
                raise DomainError(f"log of non-positive value {x!r} in '{e}'")
            return math.log(x)
        if x < 0.0:
            raise DomainError(f"square root of negative value {x!r} in '{e}'")
        return math.sqrt(x)
    raise TypeError(f"not an expression node: {e!r}")


# ----------------------------------------------------------------------
# printing

_PREC_ADD = 10
_PREC_MUL = 20
_PREC_NEG = 30
_PREC_POW = 40
_PREC_ATOM = 50


def _precedence(e: Expr) -> int:
    if isinstance(e, Const):
        if e.value.denominator != 1:
            return _PREC_MUL
        if e.value < 0:
            return _PREC_NEG
        return _PREC_ATOM
    if isinstance(e, (Add, Sub)):
        return _PREC_ADD
    if isinstance(e, (Mul, Div)):
        return _PREC_MUL
    if isinstance(e, Neg):
        return _PREC_NEG
    if isinstance(e, Pow):
        return _PREC_POW
    return _PREC_ATOM


def _wrap(e: Expr, minimum: int) -> str:
    s = unparse(e)
    return f"({s})" if _precedence(e) < minimum else s


def unparse(e: Expr) -> str:
    """Render to a string the parser reads back to an evaluation-equivalent
    expression (operator precedence: ^ above unary minus above * / above + -)."""
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Coord):
        return e.name
    if isinstance(e, Add):
        return f"{_wrap(e.lhs, _PREC_ADD)} + {_wrap(e.rhs, _PREC_ADD)}"
    if isinstance(e, Sub):
        return f"{_wrap(e.lhs, _PREC_ADD)} - {_wrap(e.rhs, _PREC_ADD + 1)}"
    if isinstance(e, Mul):
        return f"{_wrap(e.lhs, _PREC_MUL)}*{_wrap(e.rhs, _PREC_MUL)}"
    if isinstance(e, Div):
        return f"{_wrap(e.lhs, _PREC_MUL)}/{_wrap(e.rhs, _PREC_MUL + 1)}"
    if isinstance(e, Neg):
        return f"-{_wrap(e.arg, _PREC_NEG)}"
    if isinstance(e, Pow):
        head = _wrap(e.base, _PREC_ATOM)
        return f"{head}^{e.exponent}" if e.exponent >= 0 else f"{head}^({e.exponent})"
    if isinstance(e, Func):
        return f"{e.name}({unparse(e.arg)})"
    raise TypeError(f"not an expression node: {e!r}")
