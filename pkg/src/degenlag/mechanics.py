"""Lagrangian-side geometry on velocity phase space.

Everything here is derived symbolically from one Lagrangian expression on a
tangent-bundle chart (q1..qn, v1..vn): the fiber derivative (Legendre map),
the energy, the velocity Hessian with its probabilistic regularity verdict,
the associated two-form, exterior derivatives, pullbacks of two-forms along
maps, and the second-order (SODE) condition check for vector fields.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .errors import DegenerateHessianError
from .symbolic import (
    BoxSpec,
    Chart,
    Expr,
    Role,
    ZeroVerdict,
    add,
    compile_tape,
    con,
    coord,
    differentiate,
    eval_many,
    free_coords,
    gradient,
    is_identically_zero,
    mul,
    neg,
    parse_expr,
    sub,
    substitute,
    zero_verdict,
)
from .symbolic.expr import ZERO
from .symbolic.linsolve import solve_linear_symbolic
from .symbolic.zerotest import ZERO_SAMPLES, ZERO_TOL, default_rng, sample_box


@dataclass
class LagrangianSystem:
    """A Lagrangian on the tangent-bundle chart of an n-dof configuration
    space, with an optional coordinate box delimiting the analysis region."""

    n: int
    lagrangian: Expr
    chart: Chart
    box: BoxSpec | None = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        expected = Chart.tangent(self.n)
        if self.chart.names != expected.names:
            raise ValueError(
                f"chart must be the tangent chart {expected.names}, got {self.chart.names}"
            )
        extra = free_coords(self.lagrangian) - set(self.chart.names)
        if extra:
            raise ValueError(f"lagrangian uses unknown coordinates: {sorted(extra)}")

    @staticmethod
    def from_string(n: int, source: str, box: BoxSpec | None = None) -> "LagrangianSystem":
        chart = Chart.tangent(n)
        return LagrangianSystem(n, parse_expr(source, chart), chart, box)


class Regularity(Enum):
    REGULAR = "regular"
    SINGULAR = "singular"
    INDETERMINATE = "indeterminate"


@dataclass
class HessianReport:
    """Velocity Hessian with a sampled regularity verdict."""

    matrix: list[list[Expr]]
    determinant: Expr
    verdict: Regularity


@dataclass
class TwoForm:
    """A two-form stored by its strict upper triangle, so antisymmetry holds
    by construction. Missing entries are zero."""

    chart: Chart
    upper: dict[tuple[int, int], Expr]
    _tape: object = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        d = len(self.chart)
        for (i, j), e in self.upper.items():
            if not (0 <= i < j < d):
                raise ValueError(f"upper-triangle index out of range: {(i, j)}")
            if not isinstance(e, Expr):
                raise TypeError(f"coefficient at {(i, j)} is not an expression")

    def coefficient(self, i: int, j: int) -> Expr:
        if i == j:
            return ZERO
        if i < j:
            return self.upper.get((i, j), ZERO)
        return neg(self.upper.get((j, i), ZERO))

    def contract(self, X: Sequence[Expr]) -> list[Expr]:
        """Components of the one-form obtained by plugging X into the first
        slot: (i_X w)_j = sum_i w_ij X_i."""
        d = len(self.chart)
        if len(X) != d:
            raise ValueError(f"field has {len(X)} components, chart has {d}")
        out = []
        for j in range(d):
            acc = ZERO
            for i in range(d):
                acc = add(acc, mul(self.coefficient(i, j), X[i]))
            out.append(acc)
        return out

    def matrices_at(self, points: np.ndarray) -> np.ndarray:
        """Numeric coefficient matrices, shape (npoints, d, d)."""
        d = len(self.chart)
        keys = sorted(self.upper)
        if self._tape is None:
            exprs = [self.upper[k] for k in keys]
            object.__setattr__(self, "_tape", compile_tape(exprs, self.chart.names))
        vals = eval_many(self._tape, points)
        out = np.zeros((points.shape[0], d, d))
        for col, (i, j) in enumerate(keys):
            out[:, i, j] = vals[:, col]
            out[:, j, i] = -vals[:, col]
        return out

    def is_structurally_zero(self) -> bool:
        return all(e == ZERO for e in self.upper.values())

    @staticmethod
    def canonical(chart: Chart) -> "TwoForm":
        """sum_A dq^A wedge dp^A on a chart with positions and momenta."""
        upper = {}
        for qn, pn in zip(chart.positions, chart.momenta):
            upper[(chart.index(qn), chart.index(pn))] = con(1)
        if not upper:
            raise ValueError("chart has no position/momentum pairs")
        return TwoForm(chart, upper)


# ----------------------------------------------------------------------
# derived objects


def legendre_map(sys: LagrangianSystem) -> list[Expr]:
    """Fiber derivative: momenta as functions on velocity phase space."""
    return [differentiate(sys.lagrangian, v) for v in sys.chart.velocities]


def energy(sys: LagrangianSystem) -> Expr:
    e = ZERO
    for v, w in zip(sys.chart.velocities, legendre_map(sys)):
        e = add(e, mul(coord(v), w))
    return sub(e, sys.lagrangian)


def energy_differential(sys: LagrangianSystem) -> list[Expr]:
    return gradient(energy(sys), sys.chart.names)


def hessian(
    sys: LagrangianSystem,
    rng: np.random.Generator | None = None,
    tol: float = ZERO_TOL,
) -> HessianReport:
    """Velocity Hessian and its regularity verdict.

    The verdict samples the symbolic determinant at probe points of the box:
    nonzero everywhere gives regular, zero everywhere gives singular. A
    genuinely sign-mixed determinant (rank changes across the box) and an
    everywhere-erroring one both give indeterminate.
    """
    vs = sys.chart.velocities
    W = legendre_map(sys)
    matrix = [[differentiate(W[a], vs[b]) for b in range(sys.n)] for a in range(sys.n)]
    det = _determinant(matrix)
    names = sorted(free_coords(det))
    if not names:
        v = abs(float(det.value)) if hasattr(det, "value") else None
        if v is None:
            verdict = Regularity.INDETERMINATE
        else:
            verdict = Regularity.SINGULAR if v <= tol else Regularity.REGULAR
        return HessianReport(matrix, det, verdict)
    pts = sample_box(names, sys.box, ZERO_SAMPLES, default_rng(rng))
    vals = eval_many(compile_tape([det], names), pts)[:, 0]
    valid = vals[~np.isnan(vals)]
    if valid.size == 0:
        verdict = Regularity.INDETERMINATE
    elif np.all(np.abs(valid) <= tol):
        verdict = Regularity.SINGULAR
    elif np.all(np.abs(valid) > tol):
        verdict = Regularity.REGULAR
    else:
        verdict = Regularity.INDETERMINATE
    return HessianReport(matrix, det, verdict)


def _determinant(m: list[list[Expr]]) -> Expr:
    n = len(m)
    if n == 1:
        return m[0][0]
    det = ZERO
    for j in range(n):
        if m[0][j] == ZERO:
            continue
        minor = [[m[i][k] for k in range(n) if k != j] for i in range(1, n)]
        term = mul(m[0][j], _determinant(minor))
        det = add(det, term) if j % 2 == 0 else sub(det, term)
    return det


def lagrangian_two_form(sys: LagrangianSystem) -> TwoForm:
    """The two-form of the Lagrangian: d(q) wedge d(fiber derivative)."""
    qs, vs = sys.chart.positions, sys.chart.velocities
    W = legendre_map(sys)
    upper: dict[tuple[int, int], Expr] = {}
    # dq^A ^ dq^B block (A < B): dW_A/dq^B - dW_B/dq^A
    for a in range(sys.n):
        for b in range(a + 1, sys.n):
            c = sub(differentiate(W[a], qs[b]), differentiate(W[b], qs[a]))
            if c != ZERO:
                upper[(a, b)] = c
    # dq^A ^ dv^B block: the velocity Hessian
    for a in range(sys.n):
        for b in range(sys.n):
            c = differentiate(W[a], vs[b])
            if c != ZERO:
                upper[(a, sys.n + b)] = c
    return TwoForm(sys.chart, upper)


def exterior_derivative(components: Sequence[Expr], chart: Chart) -> TwoForm:
    """d of a one-form given by components in the chart's coordinate order."""
    if len(components) != len(chart):
        raise ValueError("one-form must have one component per coordinate")
    upper = {}
    for i in range(len(chart)):
        for j in range(i + 1, len(chart)):
            c = sub(
                differentiate(components[j], chart.names[i]),
                differentiate(components[i], chart.names[j]),
            )
            if c != ZERO:
                upper[(i, j)] = c
    return TwoForm(chart, upper)


def pullback_two_form(
    form: TwoForm, phi: Mapping[str, Expr], source_chart: Chart
) -> TwoForm:
    """Pull a two-form back along a map into its chart.

    ``phi`` sends each target coordinate name to an expression over the
    source chart; target names shared with the source chart default to the
    identity. Coefficients transform by J^T A J with J the Jacobian of phi.
    """
    target = form.chart
    comp: list[Expr] = []
    for name in target.names:
        if name in phi:
            comp.append(phi[name])
        elif name in source_chart:
            comp.append(coord(name))
        else:
            raise ValueError(f"map does not define target coordinate '{name}'")
    for e in comp:
        extra = free_coords(e) - set(source_chart.names)
        if extra:
            raise ValueError(f"map component uses unknown coordinates: {sorted(extra)}")
    subs = dict(zip(target.names, comp))
    jac = [
        [differentiate(comp[i], x) for x in source_chart.names]
        for i in range(len(target))
    ]
    d = len(source_chart)
    upper: dict[tuple[int, int], Expr] = {}
    for k in range(d):
        for l in range(k + 1, d):
            acc = ZERO
            for (i, j), a_ij in form.upper.items():
                a = substitute(a_ij, subs)
                term = sub(mul(jac[i][k], jac[j][l]), mul(jac[i][l], jac[j][k]))
                acc = add(acc, mul(a, term))
            if acc != ZERO:
                upper[(k, l)] = acc
    return TwoForm(source_chart, upper)


def sode_check(
    X: Sequence[Expr],
    chart: Chart,
    box: BoxSpec | None = None,
    rng: np.random.Generator | None = None,
) -> bool:
    """Second-order condition: the position components of the field must
    equal the velocity coordinates (zero-tested, so exact up to sampling)."""
    if len(X) != len(chart):
        raise ValueError("field must have one component per chart coordinate")
    qs, vs = chart.positions, chart.velocities
    if len(qs) != len(vs):
        raise ValueError("chart has no position/velocity pairing")
    for qn, vn in zip(qs, vs):
        delta = sub(X[chart.index(qn)], coord(vn))
        if not is_identically_zero(delta, box, rng):
            return False
    return True


# ----------------------------------------------------------------------
# regular-case explicit dynamics


def euler_lagrange_accelerations(
    sys: LagrangianSystem, rng: np.random.Generator | None = None
) -> list[Expr]:
    """Accelerations of the unique second-order solution when the velocity
    Hessian is regular, by symbolically solving the Euler-Lagrange linear
    system for the highest derivatives.

    Raises :class:`DegenerateHessianError` when the Hessian verdict is not
    regular.
    """
    rep = hessian(sys, rng)
    if rep.verdict is not Regularity.REGULAR:
        raise DegenerateHessianError(
            f"velocity Hessian verdict is {rep.verdict.value}; no unique accelerations"
        )
    qs, vs = sys.chart.positions, sys.chart.velocities
    W = legendre_map(sys)
    rhs = []
    for a in range(sys.n):
        drift = ZERO
        for b in range(sys.n):
            drift = add(drift, mul(coord(vs[b]), differentiate(W[a], qs[b])))
        rhs.append(sub(differentiate(sys.lagrangian, qs[a]), drift))
    pts = sample_box(sys.chart.names, sys.box, ZERO_SAMPLES, default_rng(rng))
    sol = solve_linear_symbolic(rep.matrix, rhs, sys.chart.names, probes=pts)
    if sol.conditions or sol.free_columns:
        raise DegenerateHessianError("Hessian lost rank during elimination")
    return sol.particular


def euler_lagrange_field(
    sys: LagrangianSystem, rng: np.random.Generator | None = None
) -> list[Expr]:
    """The second-order Euler-Lagrange vector field (regular case only)."""
    acc = euler_lagrange_accelerations(sys, rng)
    return [coord(v) for v in sys.chart.velocities] + acc


def legendre_fiber_solve(
    sys: LagrangianSystem,
    q_values: np.ndarray,
    p_values: np.ndarray,
    seed_v: np.ndarray | None = None,
    tol: float = 1e-10,
    max_iter: int = 60,
) -> np.ndarray:
    """Solve the fiber equation p = (fiber derivative)(q, v) for v
    numerically, by least-norm Newton from the given velocity seed.

    Used wherever a point of momentum phase space must be lifted back to
    velocity phase space. Raises :class:`~degenlag.errors.NewtonError` when
    the residual does not converge.
    """
    from .errors import NewtonError

    names = sys.chart.names
    W = legendre_map(sys)
    vs = sys.chart.velocities
    res_tape = compile_tape(W, names)
    jac = [[differentiate(W[a], vb) for vb in vs] for a in range(sys.n)]
    jac_tape = compile_tape([e for row in jac for e in row], names)

    v = np.zeros(sys.n) if seed_v is None else np.asarray(seed_v, dtype=float).copy()
    q = np.asarray(q_values, dtype=float)
    p = np.asarray(p_values, dtype=float)
    for _ in range(max_iter):
        x = np.concatenate([q, v]).reshape(1, -1)
        r = p - eval_many(res_tape, x)[0]
        if np.all(np.isfinite(r)) and np.max(np.abs(r)) <= tol:
            return v
        J = eval_many(jac_tape, x)[0].reshape(sys.n, sys.n)
        if not np.all(np.isfinite(J)) or not np.all(np.isfinite(r)):
            raise NewtonError("fiber solve hit a domain error")
        dv, *_ = np.linalg.lstsq(J, r, rcond=None)
        v = v + dv
    raise NewtonError(
        f"fiber solve did not converge within {max_iter} iterations"
    )
