"""Symbolic core: charts, expression trees, parsing, differentiation, tape
compilation with compiled/pure evaluation backends, and probabilistic zero
testing."""

from .chart import Chart, Role
from .engine import (
    BACKEND,
    eval_many,
    eval_many_compiled,
    eval_many_python,
    eval_one,
    point_map,
    values_on,
)
from .expr import (
    FUNCTION_NAMES,
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
    add,
    con,
    coord,
    cos,
    differentiate,
    div,
    evaluate,
    exp,
    free_coords,
    func,
    gradient,
    log,
    mul,
    neg,
    power,
    simplify,
    sin,
    sqrt,
    sub,
    substitute,
    unparse,
)
from .parser import parse_expr
from .tape import Tape, compile_tape
from .zerotest import (
    DEFAULT_BOX,
    DEFAULT_SEED,
    ZERO_SAMPLES,
    ZERO_TOL,
    BoxSpec,
    ZeroVerdict,
    box_bounds,
    default_rng,
    is_identically_zero,
    probe_signature,
    sample_box,
    zero_verdict,
)

__all__ = [
    "BACKEND",
    "Chart",
    "Role",
    "Expr",
    "Const",
    "Coord",
    "Add",
    "Sub",
    "Mul",
    "Div",
    "Pow",
    "Neg",
    "Func",
    "FUNCTION_NAMES",
    "con",
    "coord",
    "add",
    "sub",
    "mul",
    "div",
    "power",
    "neg",
    "func",
    "sin",
    "cos",
    "exp",
    "log",
    "sqrt",
    "differentiate",
    "gradient",
    "substitute",
    "simplify",
    "evaluate",
    "unparse",
    "free_coords",
    "parse_expr",
    "Tape",
    "compile_tape",
    "eval_many",
    "eval_one",
    "eval_many_python",
    "eval_many_compiled",
    "values_on",
    "point_map",
    "ZeroVerdict",
    "zero_verdict",
    "is_identically_zero",
    "probe_signature",
    "sample_box",
    "box_bounds",
    "default_rng",
    "BoxSpec",
    "DEFAULT_BOX",
    "DEFAULT_SEED",
    "ZERO_SAMPLES",
    "ZERO_TOL",
]
