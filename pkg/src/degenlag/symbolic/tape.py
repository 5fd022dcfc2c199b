"""Flat postfix programs compiled from expression trees.

A :class:`Tape` fixes a coordinate order and a vector of expressions, and
turns the trees into one stack program with integer opcodes. Interpreting
the program over a batch of points is the package's hot kernel; two
interpreters with identical semantics live in ``_evalcore`` (Cython) and
``_evalpy`` (vectorized numpy). Integer powers are expanded to repeated
multiplication in the same association order in every backend, so the
arithmetic opcodes agree bit for bit.

Batch evaluation never raises on domain violations: offending points get
NaN, which then propagates. The scalar tree-walking evaluator in
:mod:`degenlag.symbolic.expr` is the place to get a precise error message.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .expr import (
    Add,
    Const,
    Coord,
    Div,
    Expr,
    Func,
    Mul,
    Neg,
    Pow,
    Sub,
    free_coords,
)

OP_CONST = 0
OP_VAR = 1
OP_ADD = 2
OP_SUB = 3
OP_MUL = 4
OP_DIV = 5
OP_NEG = 6
OP_POW = 7
OP_SIN = 8
OP_COS = 9
OP_EXP = 10
OP_LOG = 11
OP_SQRT = 12
OP_OUT = 13

_FUNC_OPS = {"sin": OP_SIN, "cos": OP_COS, "exp": OP_EXP, "log": OP_LOG, "sqrt": OP_SQRT}


@dataclass(frozen=True)
class Tape:
    """A compiled expression vector: code, integer args, constant pool."""

    code: np.ndarray  # int32, opcodes
    iarg: np.ndarray  # int32, per-op argument (const index, var slot, exponent, out slot)
    consts: np.ndarray  # float64 constant pool
    names: tuple[str, ...]  # coordinate order defining the input layout
    n_outputs: int
    stack_size: int


def compile_tape(exprs: Sequence[Expr], names: Sequence[str]) -> Tape:
    """Compile expressions into one program over the given coordinate order.

    Every coordinate used by the expressions must appear in ``names``;
    unused names are allowed (their input column is simply never read).
    """
    names = tuple(names)
    slot = {n: i for i, n in enumerate(names)}
    used = set()
    for e in exprs:
        used |= free_coords(e)
    missing = sorted(used - set(slot))
    if missing:
        raise ValueError(f"expressions use coordinates outside the tape layout: {missing}")

    code: list[int] = []
    iarg: list[int] = []
    consts: list[float] = []
    const_index: dict[float, int] = {}

    def emit(op: int, arg: int = 0):
        code.append(op)
        iarg.append(arg)

    def emit_const(value: float):
        idx = const_index.get(value)
        if idx is None:
            idx = len(consts)
            consts.append(value)
            const_index[value] = idx
        emit(OP_CONST, idx)

    depth = 0
    max_depth = 0

    def walk(e: Expr):
        nonlocal depth, max_depth
        if isinstance(e, Const):
            emit_const(float(e.value))
            depth += 1
        elif isinstance(e, Coord):
            emit(OP_VAR, slot[e.name])
            depth += 1
        elif isinstance(e, (Add, Sub, Mul, Div)):
            walk(e.lhs)
            walk(e.rhs)
            op = {Add: OP_ADD, Sub: OP_SUB, Mul: OP_MUL, Div: OP_DIV}[type(e)]
            emit(op)
            depth -= 1
        elif isinstance(e, Pow):
            walk(e.base)
            emit(OP_POW, e.exponent)
        elif isinstance(e, Neg):
            walk(e.arg)
            emit(OP_NEG)
        elif isinstance(e, Func):
            walk(e.arg)
            emit(_FUNC_OPS[e.name])
        else:
            raise TypeError(f"not an expression node: {e!r}")
        max_depth = max(max_depth, depth)

    for out_slot, e in enumerate(exprs):
        walk(e)
        emit(OP_OUT, out_slot)
        depth -= 1

    return Tape(
        code=np.asarray(code, dtype=np.int32),
        iarg=np.asarray(iarg, dtype=np.int32),
        consts=np.asarray(consts, dtype=np.float64),
        names=names,
        n_outputs=len(exprs),
        stack_size=max(max_depth, 1),
    )
