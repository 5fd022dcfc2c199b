"""Constraint-chain analysis of presymplectic systems.

A presymplectic system here is a (possibly degenerate) two-form, a one-form
to match, and an optional initial constraint set, all symbolic over one
chart. The chain runner looks for the maximal subset of the chart region
where the contraction equation

    (plug X into the two-form) = (the one-form)

admits solutions tangent to that subset, by alternating two symbolic linear
solves:

  * an algebraic solve for the general solution family X (unsolvable rows
    contribute pointwise solvability conditions, the level-1 constraints);
  * a tangency solve for the family's free coefficients against every
    constraint found so far, with rank decisions made at probe points
    retracted onto the current constraint set, so conditions that are
    already implied by the set are recognized and dropped.

The loop ends when a round adds nothing (stabilized), when the constraint
set runs out of points (empty), or when the round budget is spent. Rank
ambiguity across probes raises
:class:`~degenlag.errors.NonConstantRankError`; the numeric per-point
classifiers below are the supported fallback for such systems.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import NewtonError
from .mechanics import (
    LagrangianSystem,
    TwoForm,
    energy_differential,
    lagrangian_two_form,
    legendre_fiber_solve,
)
from .pontryagin import (
    PontryaginSystem,
    SolutionFamily,
    generalized_energy_differential,
)
from .symbolic import (
    BoxSpec,
    Chart,
    Expr,
    add,
    compile_tape,
    eval_many,
    eval_one,
    free_coords,
    gradient,
    mul,
    neg,
    simplify,
    sub,
    values_on,
)
from .symbolic.expr import ZERO
from .symbolic.linsolve import LinearSolution, solve_linear_symbolic
from .symbolic.tape import Tape
from .symbolic.zerotest import (
    ZERO_SAMPLES,
    ZERO_TOL,
    box_bounds,
    default_rng,
    sample_box,
)

# membership tolerance for "this point lies on the constraint set"
EPS_MEMBERSHIP = 1e-8


@dataclass
class PresymplecticSystem:
    """Two-form + one-form + initial constraints on a chart."""

    chart: Chart
    omega: TwoForm
    alpha: list[Expr]
    constraints: list[Expr]
    box: BoxSpec | None = None

    def __post_init__(self):
        if len(self.alpha) != len(self.chart):
            raise ValueError("one-form must have one component per coordinate")
        allowed = set(self.chart.names)
        for e in list(self.alpha) + list(self.constraints):
            extra = free_coords(e) - allowed
            if extra:
                raise ValueError(f"expression uses unknown coordinates: {sorted(extra)}")


def from_lagrangian(sys: LagrangianSystem) -> PresymplecticSystem:
    """The velocity-phase-space presentation: Lagrangian two-form against
    the energy differential, no initial constraints."""
    return PresymplecticSystem(
        sys.chart, lagrangian_two_form(sys), energy_differential(sys), [], sys.box
    )


def from_pontryagin(ps: PontryaginSystem) -> PresymplecticSystem:
    """The combined-bundle presentation: canonical two-form against the
    generalized-energy differential."""
    return PresymplecticSystem(
        ps.chart, ps.omega, generalized_energy_differential(ps), [], ps.box
    )


def hamiltonian_system(
    n: int,
    h: Expr,
    constraints: Sequence[Expr] = (),
    box: BoxSpec | None = None,
) -> PresymplecticSystem:
    """Momentum-phase-space presentation: canonical two-form against dH,
    with the image constraints of a degenerate fiber derivative supplied
    as the initial set."""
    chart = Chart.cotangent(n)
    return PresymplecticSystem(
        chart, TwoForm.canonical(chart), gradient(h, chart.names), list(constraints), box
    )


# ----------------------------------------------------------------------
# sampling points on a constraint set


def sample_on_constraints(
    constraints: Sequence[Expr],
    names: Sequence[str],
    n: int = ZERO_SAMPLES,
    box: BoxSpec | None = None,
    rng: np.random.Generator | None = None,
    tol: float = 1e-10,
    newton_iters: int = 50,
) -> np.ndarray:
    """Points of the box retracted onto the zero set of the constraints.

    Random starts are polished by Gauss-Newton on the residual; a start is
    kept when the polished residual is below ``tol``. When random starts
    keep failing, a dense screen of the box is polished from its best
    candidates before giving up, so an empty return is strong evidence the
    set has no points in the box. Shape (k, len(names)) with k <= n, and
    k = 0 for that empty case.
    """
    rng = default_rng(rng)
    names = tuple(names)
    if not constraints:
        return sample_box(names, box, n, rng)
    d = len(names)
    m = len(constraints)
    ctape = compile_tape(list(constraints), names)
    grads = [gradient(phi, names) for phi in constraints]
    gtape = compile_tape([g for row in grads for g in row], names)
    lo, hi = box_bounds(names, box)
    span = float(np.max(hi - lo))
    slack = 0.05 * (hi - lo)

    def inside(x: np.ndarray) -> bool:
        # a retraction that leaves the box has found a point of some other
        # region's constraint set; reject it so "no points" keeps meaning
        # "no points in the box"
        return bool(np.all(x >= lo - slack) and np.all(x <= hi + slack))

    def polish(x: np.ndarray) -> np.ndarray | None:
        x = x.copy()
        for _ in range(newton_iters):
            r = eval_one(ctape, x)
            if not np.all(np.isfinite(r)):
                return None
            if np.max(np.abs(r)) <= tol:
                return x if inside(x) else None
            J = eval_one(gtape, x).reshape(m, d)
            if not np.all(np.isfinite(J)):
                return None
            step, *_ = np.linalg.lstsq(J, -r, rcond=None)
            norm = float(np.linalg.norm(step))
            if norm > span:
                step = step * (span / norm)
            x = x + step
        r = eval_one(ctape, x)
        if np.all(np.isfinite(r)) and np.max(np.abs(r)) <= tol and inside(x):
            return x
        return None

    out: list[np.ndarray] = []
    attempts = 0
    while len(out) < n and attempts < 20 * n:
        attempts += 1
        x = polish(rng.uniform(lo, hi))
        if x is not None:
            out.append(x)
    if len(out) < n:
        # dense screen of the box, polish the most promising candidates
        grid = sample_box(names, box, 10_000, rng)
        res = eval_many(ctape, grid)
        score = np.max(np.abs(res), axis=1)
        score[~np.isfinite(score)] = np.inf
        for idx in np.argsort(score)[:64]:
            if len(out) >= n:
                break
            x = polish(grid[idx])
            if x is not None:
                out.append(x)
    if not out:
        return np.empty((0, d))
    return np.array(out)


# ----------------------------------------------------------------------
# the chain


class ChainStatus(Enum):
    STABILIZED = "stabilized"
    EMPTY = "empty"
    BUDGET = "budget"


@dataclass
class ConstraintChain:
    """Result of a chain run.

    ``levels[k]`` is the cumulative constraint list of level k+1, so
    consecutive entries extend one another. ``families[0]`` is the
    algebraic solution family; each later entry is the family narrowed by
    one tangency round. ``index`` is the 1-based level at which the run
    ended: the stable level for STABILIZED, the first empty level for
    EMPTY, the deepest constructed level for BUDGET.
    """

    system: PresymplecticSystem
    levels: list[list[Expr]]
    families: list[SolutionFamily]
    final_family: SolutionFamily | None
    status: ChainStatus
    index: int

    @property
    def final_constraints(self) -> list[Expr]:
        return self.levels[-1] if self.levels else []

    def summary(self) -> str:
        base = f"{self.status.value} at level {self.index}"
        k = len(self.final_constraints)
        base += f", {k} constraint{'s' if k != 1 else ''}"
        if self.final_family is not None:
            base += f", solution family of dimension {self.final_family.null_dimension}"
        return base


def solvability_conditions(
    system: PresymplecticSystem,
    rng: np.random.Generator | None = None,
    n_probes: int = ZERO_SAMPLES,
    tol: float = ZERO_TOL,
) -> tuple[SolutionFamily, list[Expr]]:
    """General solution family of the contraction equation plus the
    pointwise conditions for a solution to exist at all.

    Rank decisions use generic probe points of the box (the equation is
    posed everywhere, not yet on a constraint set).
    """
    chart = system.chart
    d = len(chart)
    matrix = [[system.omega.coefficient(i, j) for i in range(d)] for j in range(d)]
    probes = sample_box(chart.names, system.box, n_probes, default_rng(rng))
    sol = solve_linear_symbolic(matrix, list(system.alpha), chart.names, probes, tol)
    family = SolutionFamily(chart, sol.particular, sol.null_basis, level=1)
    return family, [simplify(c) for c in sol.conditions]


def _dot(grad: Sequence[Expr], vec: Sequence[Expr]) -> Expr:
    acc = ZERO
    for g, x in zip(grad, vec):
        acc = add(acc, mul(g, x))
    return acc


def _narrow(
    base: SolutionFamily, lam: LinearSolution, chart: Chart, level: int
) -> SolutionFamily:
    """Substitute a solved coefficient assignment back into the family."""
    d = len(chart)
    part = list(base.particular)
    for a, lam_a in enumerate(lam.particular):
        if lam_a == ZERO:
            continue
        for i in range(d):
            if base.null_basis[a][i] != ZERO:
                part[i] = simplify(add(part[i], mul(lam_a, base.null_basis[a][i])))
    null = []
    for w in lam.null_basis:
        vec: list[Expr] = [ZERO] * d
        for a, w_a in enumerate(w):
            if w_a == ZERO:
                continue
            for i in range(d):
                if base.null_basis[a][i] != ZERO:
                    vec[i] = simplify(add(vec[i], mul(w_a, base.null_basis[a][i])))
        null.append(vec)
    return SolutionFamily(chart, part, null, level)


def constraint_chain(
    system: PresymplecticSystem,
    max_iter: int | None = None,
    rng: np.random.Generator | None = None,
    n_probes: int = ZERO_SAMPLES,
    tol: float = ZERO_TOL,
) -> ConstraintChain:
    """Run the full stabilization loop.

    ``max_iter`` bounds the number of tangency rounds and defaults to the
    chart dimension plus three (each productive round must add at least one
    functionally independent constraint, so the dimension is a natural
    cap). Probe counts and the zero tolerance are those of the symbolic
    rank decisions; membership of sampled points in constraint sets is at
    the retraction tolerance of :func:`sample_on_constraints`.
    """
    rng = default_rng(rng)
    chart = system.chart
    if max_iter is None:
        max_iter = len(chart) + 3

    family0, conditions = solvability_conditions(system, rng, n_probes, tol)
    level1 = list(system.constraints)
    for c in conditions:
        if not any(c == seen for seen in level1):
            level1.append(c)
    levels = [level1]
    families = [family0]

    probes = sample_on_constraints(
        level1, chart.names, n_probes, system.box, rng
    )
    if level1 and probes.shape[0] == 0:
        return ConstraintChain(system, levels, families, None, ChainStatus.EMPTY, 1)

    current = level1
    for _ in range(max_iter):
        if not current:
            return ConstraintChain(
                system, levels, families, families[-1], ChainStatus.STABILIZED, len(levels)
            )
        k = family0.null_dimension
        matrix = []
        rhs = []
        for phi in current:
            g = gradient(phi, chart.names)
            matrix.append([_dot(g, family0.null_basis[a]) for a in range(k)])
            rhs.append(neg(_dot(g, family0.particular)))
        lam = solve_linear_symbolic(matrix, rhs, chart.names, probes, tol)
        fresh = []
        for c in lam.conditions:
            if not any(c == seen for seen in current + fresh):
                fresh.append(c)
        if not fresh:
            narrowed = _narrow(family0, lam, chart, len(levels))
            families.append(narrowed)
            return ConstraintChain(
                system, levels, families, narrowed, ChainStatus.STABILIZED, len(levels)
            )
        families.append(_narrow(family0, lam, chart, len(levels) + 1))
        current = current + fresh
        levels.append(current)
        probes = sample_on_constraints(
            current, chart.names, n_probes, system.box, rng
        )
        if probes.shape[0] == 0:
            return ConstraintChain(
                system, levels, families, None, ChainStatus.EMPTY, len(levels)
            )
    return ConstraintChain(system, levels, families, None, ChainStatus.BUDGET, len(levels))


# ----------------------------------------------------------------------
# numeric residuals and per-point classification


def solution_residual(
    system: PresymplecticSystem, X: Sequence[Expr], points: np.ndarray
) -> np.ndarray:
    """Max-abs residual of the contraction equation at each point."""
    comps = [sub(a, b) for a, b in zip(system.omega.contract(X), system.alpha)]
    vals = values_on(comps, system.chart.names, points)
    return np.max(np.abs(vals), axis=1)


def _solvable(M: np.ndarray, b: np.ndarray, tol: float) -> bool:
    if not (np.all(np.isfinite(M)) and np.all(np.isfinite(b))):
        return False
    x, *_ = np.linalg.lstsq(M, b, rcond=None)
    return bool(np.max(np.abs(M @ x - b)) <= tol)


@dataclass
class _GridData:
    omega: np.ndarray  # (npts, d, d)
    alpha: np.ndarray  # (npts, d)
    initial: np.ndarray  # (npts, n_initial)
    jacobians: list[np.ndarray]  # per level: (npts, m_l, d)


def _grid_data(chain: ConstraintChain, points: np.ndarray) -> _GridData:
    sys = chain.system
    names = sys.chart.names
    d = len(names)
    omega = sys.omega.matrices_at(points)
    alpha = values_on(sys.alpha, names, points)
    if sys.constraints:
        initial = values_on(sys.constraints, names, points)
    else:
        initial = np.zeros((points.shape[0], 0))
    jacobians = []
    for level in chain.levels:
        if not level:
            jacobians.append(np.zeros((points.shape[0], 0, d)))
            continue
        flat = [g for phi in level for g in gradient(phi, names)]
        vals = values_on(flat, names, points)
        jacobians.append(vals.reshape(points.shape[0], len(level), d))
    return _GridData(omega, alpha, initial, jacobians)


def classify_grid(
    chain: ConstraintChain, points: np.ndarray, tol: float = EPS_MEMBERSHIP
) -> np.ndarray:
    """Deepest chain level each point belongs to, by numeric rank tests.

    Level 1 requires the initial constraints to vanish and the contraction
    equation to be least-squares solvable at the point; level l+1
    additionally requires solvability with the tangency rows of all level-l
    constraints stacked on. This route never evaluates the derived
    constraint expressions themselves, so it is an independent
    cross-check of the symbolic chain. Returns 0 for points outside level
    1, capped at the number of constructed levels.
    """
    points = np.asarray(points, dtype=float)
    if points.ndim != 2:
        raise ValueError("points must be a 2d array")
    data = _grid_data(chain, points)
    npts = points.shape[0]
    out = np.zeros(npts, dtype=int)
    n_levels = len(chain.levels)
    for p in range(npts):
        if data.initial.shape[1] and np.max(np.abs(data.initial[p])) > tol:
            continue
        M = data.omega[p].T  # row j of the system is sum_i omega_ij X_i
        alpha = data.alpha[p]
        if not _solvable(M, alpha, tol):
            continue
        level = 1
        for l in range(1, n_levels):
            G = data.jacobians[l - 1][p]
            stacked = np.vstack([M, G])
            b = np.concatenate([alpha, np.zeros(G.shape[0])])
            if not _solvable(stacked, b, tol):
                break
            level = l + 1
        out[p] = level
    return out


def classify_point(
    chain: ConstraintChain, point: np.ndarray, tol: float = EPS_MEMBERSHIP
) -> int:
    return int(classify_grid(chain, np.asarray(point, dtype=float)[None, :], tol)[0])


def symbolic_levels_at(
    chain: ConstraintChain, points: np.ndarray, tol: float = EPS_MEMBERSHIP
) -> np.ndarray:
    """Deepest level whose constraint expressions all vanish at each point:
    the symbolic route that :func:`classify_grid` is checked against."""
    points = np.asarray(points, dtype=float)
    names = chain.system.chart.names
    npts = points.shape[0]
    out = np.zeros(npts, dtype=int)
    for l, level in enumerate(chain.levels, start=1):
        if not level:
            ok = np.ones(npts, dtype=bool)
        else:
            vals = values_on(level, names, points)
            finite = np.all(np.isfinite(vals), axis=1)
            ok = finite & (np.max(np.abs(vals), axis=1) <= tol)
        out[ok & (out == l - 1)] = l
    return out


# ----------------------------------------------------------------------
# relating the combined-bundle chain to the momentum-side chain


@dataclass
class LevelProjection:
    level: int
    n_samples: int
    max_residual: float

    @property
    def ok(self) -> bool:
        return self.n_samples > 0 and self.max_residual <= EPS_MEMBERSHIP


@dataclass
class ProjectionReport:
    forward: list[LevelProjection]
    reverse: LevelProjection
    ok: bool


def check_projection_lemma(
    base: LagrangianSystem,
    sr_chain: ConstraintChain,
    ham_chain: ConstraintChain,
    n: int = 120,
    rng: np.random.Generator | None = None,
    tol: float = EPS_MEMBERSHIP,
) -> ProjectionReport:
    """Sampled verification that the combined-bundle constraint levels
    project onto the momentum-side levels, and that momentum-side points
    of the final level lift back (through the fiber equation) into the
    final combined-bundle level.

    ``sr_chain`` must be the chain of the combined-bundle system of
    ``base`` and ``ham_chain`` the momentum-side chain; the forward checks
    pair level k with momentum level min(k, deepest).
    """
    rng = default_rng(rng)
    sr_names = sr_chain.system.chart.names
    ham_names = ham_chain.system.chart.names
    cols = [sr_names.index(nm) for nm in ham_names]

    forward = []
    for k, level in enumerate(sr_chain.levels, start=1):
        pts = sample_on_constraints(
            level, sr_names, n, sr_chain.system.box, rng
        )
        if pts.shape[0] == 0:
            forward.append(LevelProjection(k, 0, float("inf")))
            continue
        target = ham_chain.levels[min(k, len(ham_chain.levels)) - 1]
        if not target:
            forward.append(LevelProjection(k, pts.shape[0], 0.0))
            continue
        vals = values_on(target, ham_names, pts[:, cols])
        vals = np.where(np.isfinite(vals), vals, np.inf)
        forward.append(
            LevelProjection(k, pts.shape[0], float(np.max(np.abs(vals))))
        )

    ham_pts = sample_on_constraints(
        ham_chain.final_constraints, ham_names, n, ham_chain.system.box, rng
    )
    nq = base.n
    worst = 0.0
    lifted = 0
    final = sr_chain.final_constraints
    for row in ham_pts:
        q, p = row[:nq], row[nq:]
        try:
            v = legendre_fiber_solve(base, q, p)
        except NewtonError:
            worst = float("inf")
            continue
        lifted += 1
        point = np.concatenate([q, v, p])[None, :]
        if final:
            vals = values_on(final, sr_names, point)
            vals = np.where(np.isfinite(vals), vals, np.inf)
            worst = max(worst, float(np.max(np.abs(vals))))
    reverse = LevelProjection(len(sr_chain.levels), lifted, worst)

    ok = all(f.ok for f in forward) and reverse.ok and lifted == ham_pts.shape[0]
    return ProjectionReport(forward, reverse, ok)
