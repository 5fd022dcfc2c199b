"""Pure-Python (numpy-vectorized) tape interpreter.

Fallback twin of the Cython kernel in ``_evalcore``. Both interpreters run
the same opcode stream with the same operation order; arithmetic results are
bitwise identical, transcendentals may differ by an ulp between libm and
numpy's vectorized routines.
"""

from __future__ import annotations

import numpy as np

from .tape import (
    OP_ADD,
    OP_CONST,
    OP_COS,
    OP_DIV,
    OP_EXP,
    OP_LOG,
    OP_MUL,
    OP_NEG,
    OP_OUT,
    OP_POW,
    OP_SIN,
    OP_SQRT,
    OP_SUB,
    OP_VAR,
)


def eval_many(code, iarg, consts, points, n_outputs, stack_size):
    """Run the tape over a (npoints, nvars) batch; domain errors give NaN."""
    npts = points.shape[0]
    out = np.empty((npts, n_outputs), dtype=np.float64)
    stack = np.empty((stack_size, npts), dtype=np.float64)
    sp = 0
    with np.errstate(all="ignore"):
        for op, arg in zip(code, iarg):
            if op == OP_CONST:
                stack[sp] = consts[arg]
                sp += 1
            elif op == OP_VAR:
                stack[sp] = points[:, arg]
                sp += 1
            elif op == OP_ADD:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] + stack[sp]
            elif op == OP_SUB:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] - stack[sp]
            elif op == OP_MUL:
                sp -= 1
                stack[sp - 1] = stack[sp - 1] * stack[sp]
            elif op == OP_DIV:
                sp -= 1
                a = stack[sp - 1]
                b = stack[sp]
                stack[sp - 1] = np.where(b == 0.0, np.nan, a / np.where(b == 0.0, 1.0, b))
            elif op == OP_NEG:
                stack[sp - 1] = -stack[sp - 1]
            elif op == OP_POW:
                x = stack[sp - 1]
                k = int(arg)
                if k == 0:
                    r = np.ones_like(x)
                else:
                    r = x.copy()
                    for _ in range(abs(k) - 1):
                        r = r * x
                    if k < 0:
                        r = np.where(x == 0.0, np.nan, 1.0 / np.where(x == 0.0, 1.0, r))
                stack[sp - 1] = r
            elif op == OP_SIN:
                stack[sp - 1] = np.sin(stack[sp - 1])
            elif op == OP_COS:
                stack[sp - 1] = np.cos(stack[sp - 1])
            elif op == OP_EXP:
                stack[sp - 1] = np.exp(stack[sp - 1])
            elif op == OP_LOG:
                x = stack[sp - 1]
                stack[sp - 1] = np.where(x > 0.0, np.log(np.where(x > 0.0, x, 1.0)), np.nan)
            elif op == OP_SQRT:
                x = stack[sp - 1]
                stack[sp - 1] = np.where(x < 0.0, np.nan, np.sqrt(np.where(x < 0.0, 0.0, x)))
            elif op == OP_OUT:
                sp -= 1
                out[:, arg] = stack[sp]
            else:
                raise ValueError(f"bad opcode {op}")
    return out
