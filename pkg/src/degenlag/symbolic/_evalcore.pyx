# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tape interpreter: the hot kernel behind batch evaluation.

Semantics match ``_evalpy`` exactly: domain violations (division by zero,
log of a non-positive number, square root of a negative number, zero to a
negative power) produce NaN for that point and propagate. Integer powers
run as repeated multiplication in the same association order as the numpy
fallback, so arithmetic-only tapes agree bit for bit across backends.
"""

import numpy as np

from libc.math cimport NAN, cos, exp, log, sin, sqrt

cdef enum:
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


cdef inline double _ipow(double x, int k) noexcept nogil:
    cdef double r
    cdef int m, i
    if k == 0:
        return 1.0
    m = k if k > 0 else -k
    r = x
    for i in range(m - 1):
        r = r * x
    if k < 0:
        if x == 0.0:
            return NAN
        return 1.0 / r
    return r


def eval_many(int[::1] code, int[::1] iarg, double[::1] consts,
              double[:, ::1] points, int n_outputs, int stack_size):
    """Run the tape over a (npoints, nvars) batch; domain errors give NaN."""
    cdef Py_ssize_t npts = points.shape[0]
    cdef Py_ssize_t ninstr = code.shape[0]
    out_arr = np.empty((npts, n_outputs), dtype=np.float64)
    stack_arr = np.empty(stack_size, dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef double[::1] stack = stack_arr
    cdef Py_ssize_t ip, j
    cdef int op, arg, sp
    cdef double a, b

    with nogil:
        for ip in range(npts):
            sp = 0
            for j in range(ninstr):
                op = code[j]
                arg = iarg[j]
                if op == OP_CONST:
                    stack[sp] = consts[arg]
                    sp += 1
                elif op == OP_VAR:
                    stack[sp] = points[ip, arg]
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
                    b = stack[sp]
                    a = stack[sp - 1]
                    stack[sp - 1] = NAN if b == 0.0 else a / b
                elif op == OP_NEG:
                    stack[sp - 1] = -stack[sp - 1]
                elif op == OP_POW:
                    stack[sp - 1] = _ipow(stack[sp - 1], arg)
                elif op == OP_SIN:
                    stack[sp - 1] = sin(stack[sp - 1])
                elif op == OP_COS:
                    stack[sp - 1] = cos(stack[sp - 1])
                elif op == OP_EXP:
                    stack[sp - 1] = exp(stack[sp - 1])
                elif op == OP_LOG:
                    a = stack[sp - 1]
                    stack[sp - 1] = log(a) if a > 0.0 else NAN
                elif op == OP_SQRT:
                    a = stack[sp - 1]
                    stack[sp - 1] = NAN if a < 0.0 else sqrt(a)
                else:  # OP_OUT
                    sp -= 1
                    out[ip, arg] = stack[sp]
    return out_arr
