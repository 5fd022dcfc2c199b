"""Probabilistic zero testing on coordinate boxes.

The package never decides expression equality through a symbolic normal
form. Instead an expression "is zero" when it evaluates below a tight
tolerance at a batch of uniformly sampled points of a coordinate box. For
the polynomial and rational coefficient functions this pipeline produces,
vanishing at 32 independent random points without being the zero function
has vanishing probability (Schwartz-Zippel flavored argument); the tolerance
absorbs double rounding.

Verdicts are three-valued. Probes that hit domain errors are excluded from
the decision; if every probe errors out there is nothing to decide and the
verdict is indeterminate, which :func:`is_identically_zero` turns into an
:class:`IndeterminateZeroTest` exception rather than a silent guess.
"""

from __future__ import annotations

from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from ..errors import IndeterminateZeroTest
from .engine import eval_many
from .expr import Const, Expr, free_coords
from .tape import compile_tape

DEFAULT_BOX = (-2.0, 2.0)
DEFAULT_SEED = 42
ZERO_SAMPLES = 32
ZERO_TOL = 1e-9

BoxSpec = Mapping[str, tuple[float, float]]


class ZeroVerdict(Enum):
    ZERO = "zero"
    NONZERO = "nonzero"
    INDETERMINATE = "indeterminate"


def default_rng(rng: np.random.Generator | None = None) -> np.random.Generator:
    """The package's deterministic default: a fresh seed-42 generator."""
    return rng if rng is not None else np.random.default_rng(DEFAULT_SEED)


def box_bounds(names: Sequence[str], box: BoxSpec | None = None):
    """Per-coordinate (lo, hi) arrays, filling unlisted names with the
    default box."""
    box = box or {}
    lo = np.empty(len(names))
    hi = np.empty(len(names))
    for i, n in enumerate(names):
        lo[i], hi[i] = box.get(n, DEFAULT_BOX)
        if not lo[i] < hi[i]:
            raise ValueError(f"empty box for coordinate '{n}': {(lo[i], hi[i])}")
    return lo, hi


def sample_box(
    names: Sequence[str],
    box: BoxSpec | None = None,
    n: int = ZERO_SAMPLES,
    rng: np.random.Generator | None = None,
) -> np.ndarray:
    """Uniform samples of the box, shape (n, len(names))."""
    lo, hi = box_bounds(names, box)
    r = default_rng(rng)
    return lo + (hi - lo) * r.random((n, len(names)))


def zero_verdict(
    e: Expr,
    box: BoxSpec | None = None,
    rng: np.random.Generator | None = None,
    n_samples: int = ZERO_SAMPLES,
    tol: float = ZERO_TOL,
) -> ZeroVerdict:
    """Three-valued zero test of an expression over its own free coordinates."""
    if isinstance(e, Const):
        return ZeroVerdict.ZERO if abs(float(e.value)) <= tol else ZeroVerdict.NONZERO
    names = sorted(free_coords(e))
    if not names:
        # constant-valued but not a literal (e.g. log(2), sin(3)^2 + cos(3)^2 - 1)
        vals = eval_many(compile_tape([e], ["_dummy"]), np.zeros((1, 1)))
        v = vals[0, 0]
        if np.isnan(v):
            return ZeroVerdict.INDETERMINATE
        return ZeroVerdict.ZERO if abs(v) <= tol else ZeroVerdict.NONZERO
    pts = sample_box(names, box, n_samples, rng)
    vals = eval_many(compile_tape([e], names), pts)[:, 0]
    valid = ~np.isnan(vals)
    if not valid.any():
        return ZeroVerdict.INDETERMINATE
    if np.any(np.abs(vals[valid]) > tol):
        return ZeroVerdict.NONZERO
    return ZeroVerdict.ZERO


def is_identically_zero(
    e: Expr,
    box: BoxSpec | None = None,
    rng: np.random.Generator | None = None,
    n_samples: int = ZERO_SAMPLES,
    tol: float = ZERO_TOL,
) -> bool:
    """True iff the expression vanishes (within tolerance) at every valid
    probe. Raises :class:`IndeterminateZeroTest` when every probe hit a
    domain error."""
    v = zero_verdict(e, box, rng, n_samples, tol)
    if v is ZeroVerdict.INDETERMINATE:
        raise IndeterminateZeroTest(e)
    return v is ZeroVerdict.ZERO


def probe_signature(
    exprs: Sequence[Expr],
    names: Sequence[str],
    box: BoxSpec | None = None,
    rng: np.random.Generator | None = None,
    n_samples: int = ZERO_SAMPLES,
    tol: float = ZERO_TOL,
):
    """Per-expression (all_zero, any_valid) flags over one shared sample set.

    Useful when several coefficient functions must be judged against the
    same probes, e.g. a Hessian's entries.
    """
    pts = sample_box(names, box, n_samples, rng)
    vals = eval_many(compile_tape(list(exprs), names), pts)
    valid = ~np.isnan(vals)
    any_valid = valid.any(axis=0)
    with np.errstate(invalid="ignore"):
        nonzero = np.nan_to_num(np.abs(vals), nan=0.0) > tol
    all_zero = ~nonzero.any(axis=0)
    return all_zero, any_valid
