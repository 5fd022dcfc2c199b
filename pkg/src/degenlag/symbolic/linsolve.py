"""Symbolic linear solving with probe-based zero decisions.

Gauss-Jordan elimination over expression entries. Whether an entry counts
as zero (and may never be a pivot) or nonzero (and may) is decided by
evaluating it at probe points, typically sampled from the current
constraint set, so all rank decisions are made "modulo constraints". An
entry whose probe values are zero at some points and nonzero at others has
no consistent rank story; that raises :class:`NonConstantRankError` when it
blocks a pivot choice, which is the signal to fall back to pointwise
numerics.

Unsolvable rows do not make the solve fail: their right-hand sides are the
solvability conditions of the system and are returned as expressions (the
callers turn them into new constraints).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ..errors import IndeterminateZeroTest, NonConstantRankError
from .engine import eval_many
from .expr import (
    ONE,
    ZERO,
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
    div,
    mul,
    neg,
    simplify,
    sub,
)
from .tape import compile_tape
from .zerotest import ZERO_TOL


class _Class(Enum):
    ZERO = 0
    NONZERO = 1
    MIXED = 2
    UNKNOWN = 3  # every probe hit a domain error


@dataclass
class LinearSolution:
    """General solution of M x = rhs in the probe-zero sense.

    ``particular`` sets every free unknown to zero; ``null_basis`` has one
    homogeneous solution per free unknown (that unknown set to one);
    ``conditions`` are the right-hand sides of unsolvable rows, which must
    vanish for the system to be solvable at a point.
    """

    particular: list[Expr]
    null_basis: list[list[Expr]]
    conditions: list[Expr]
    pivot_columns: list[int]
    free_columns: list[int]


def _tree_size(e: Expr) -> int:
    if isinstance(e, (Const, Coord)):
        return 1
    if isinstance(e, (Add, Sub, Mul, Div)):
        return 1 + _tree_size(e.lhs) + _tree_size(e.rhs)
    if isinstance(e, Pow):
        return 1 + _tree_size(e.base)
    if isinstance(e, (Neg, Func)):
        return 1 + _tree_size(e.arg)
    return 1


def _classify(e: Expr, names: Sequence[str], probes: np.ndarray, tol: float) -> _Class:
    if isinstance(e, Const):
        return _Class.ZERO if abs(float(e.value)) <= tol else _Class.NONZERO
    vals = eval_many(compile_tape([e], names), probes)[:, 0]
    valid = ~np.isnan(vals)
    if not valid.any():
        return _Class.UNKNOWN
    nonzero = np.abs(vals[valid]) > tol
    if nonzero.all():
        return _Class.NONZERO
    if not nonzero.any():
        return _Class.ZERO
    return _Class.MIXED


def solve_linear_symbolic(
    matrix: Sequence[Sequence[Expr]],
    rhs: Sequence[Expr],
    names: Sequence[str],
    probes: np.ndarray,
    tol: float = ZERO_TOL,
) -> LinearSolution:
    """Solve a symbolic linear system, deciding ranks at the probe points.

    ``matrix`` is row-major (one row per equation), ``names`` is the
    coordinate order the probe columns refer to. Raises
    :class:`NonConstantRankError` if a pivot decision is ambiguous across
    the probes and :class:`IndeterminateZeroTest` if it rests on an entry
    whose probes all hit domain errors.
    """
    m = len(matrix)
    ncols = len(matrix[0]) if m else 0
    rows = [list(r) for r in matrix]
    b = list(rhs)
    if any(len(r) != ncols for r in rows) or len(b) != m:
        raise ValueError("ragged linear system")

    names = tuple(names)
    pivot_of_col: dict[int, int] = {}
    pivot_rows: set[int] = set()

    for col in range(ncols):
        # candidate pivots among rows not yet used
        best = None
        blockers: list[tuple[_Class, Expr]] = []
        for r in range(m):
            if r in pivot_rows:
                continue
            e = rows[r][col]
            if e == ZERO:
                continue
            cls = _classify(e, names, probes, tol)
            if cls is _Class.ZERO:
                continue
            if cls is _Class.NONZERO:
                key = (0 if isinstance(e, Const) else 1, _tree_size(e), r)
                if best is None or key < best[0]:
                    best = (key, r)
            else:
                blockers.append((cls, e))
        if best is None:
            if any(c is _Class.MIXED for c, _ in blockers):
                bad = next(e for c, e in blockers if c is _Class.MIXED)
                raise NonConstantRankError(
                    f"pivot candidate '{bad}' vanishes at some probes but not others"
                )
            if blockers:
                raise IndeterminateZeroTest(blockers[0][1])
            continue  # free column
        r = best[1]
        pivot_of_col[col] = r
        pivot_rows.add(r)
        piv = rows[r][col]
        for r2 in range(m):
            if r2 == r or rows[r2][col] == ZERO:
                continue
            factor = div(rows[r2][col], piv)
            rows[r2][col] = ZERO  # mathematically exact after elimination
            for c2 in range(ncols):
                if c2 == col or rows[r][c2] == ZERO:
                    continue
                rows[r2][c2] = sub(rows[r2][c2], mul(factor, rows[r][c2]))
            b[r2] = sub(b[r2], mul(factor, b[r]))

    pivot_columns = sorted(pivot_of_col)
    free_columns = [c for c in range(ncols) if c not in pivot_of_col]

    # unsolvable rows: all coefficients are (structurally) zero by now
    conditions = []
    for r in range(m):
        if r in pivot_rows:
            continue
        c_expr = simplify(b[r])
        cls = _classify(c_expr, names, probes, tol)
        if cls is _Class.ZERO:
            continue
        if cls is _Class.UNKNOWN:
            raise IndeterminateZeroTest(c_expr)
        conditions.append(c_expr)

    particular = [ZERO] * ncols
    for col, r in pivot_of_col.items():
        particular[col] = simplify(div(b[r], rows[r][col]))

    null_basis = []
    for f in free_columns:
        vec = [ZERO] * ncols
        vec[f] = ONE
        for col, r in pivot_of_col.items():
            if rows[r][f] != ZERO:
                vec[col] = simplify(neg(div(rows[r][f], rows[r][col])))
        null_basis.append(vec)

    return LinearSolution(particular, null_basis, conditions, pivot_columns, free_columns)
