"""Backend selection and batch-evaluation entry points.

At import time the compiled tape interpreter is preferred; if the extension
is unavailable (or ``DEGENLAG_PURE_PYTHON=1`` is set) the numpy fallback
takes over. ``BACKEND`` reports which one is active. Both are importable
directly for benchmarking and cross-checking.
"""

from __future__ import annotations

import os
from typing import Mapping, Sequence

import numpy as np

from .expr import Expr
from .tape import Tape, compile_tape
from . import _evalpy

try:
    from . import _evalcore
except ImportError:  # pragma: no cover - depends on the build
    _evalcore = None

_FORCE_PURE = os.environ.get("DEGENLAG_PURE_PYTHON", "") not in ("", "0")

if _evalcore is not None and not _FORCE_PURE:
    BACKEND = "compiled"
else:
    BACKEND = "python"


def eval_many_python(tape: Tape, points: np.ndarray) -> np.ndarray:
    return _evalpy.eval_many(
        tape.code, tape.iarg, tape.consts, points, tape.n_outputs, tape.stack_size
    )


def eval_many_compiled(tape: Tape, points: np.ndarray) -> np.ndarray:
    if _evalcore is None:
        raise RuntimeError("compiled evaluation backend is not built")
    return _evalcore.eval_many(
        tape.code, tape.iarg, tape.consts, points, int(tape.n_outputs), int(tape.stack_size)
    )


def eval_many(tape: Tape, points: np.ndarray) -> np.ndarray:
    """Evaluate the tape at a (npoints, nvars) array of points.

    Returns a (npoints, n_outputs) float64 array. Domain violations show up
    as NaN entries, never as exceptions.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != len(tape.names):
        raise ValueError(
            f"points must have shape (npoints, {len(tape.names)}), got {points.shape}"
        )
    if BACKEND == "compiled":
        return eval_many_compiled(tape, points)
    return eval_many_python(tape, points)


def eval_one(tape: Tape, point: np.ndarray) -> np.ndarray:
    """Evaluate at a single point (1-d array in tape coordinate order)."""
    point = np.asarray(point, dtype=np.float64)
    return eval_many(tape, point.reshape(1, -1))[0]


def values_on(exprs: Sequence[Expr], names: Sequence[str], points: np.ndarray) -> np.ndarray:
    """Compile-and-run convenience: evaluate expressions at many points."""
    return eval_many(compile_tape(exprs, names), points)


def point_map(names: Sequence[str], values: np.ndarray) -> Mapping[str, float]:
    """Pair a coordinate order with one point's values, for the tree-walk
    evaluator and for error messages."""
    return {n: float(v) for n, v in zip(names, values)}
