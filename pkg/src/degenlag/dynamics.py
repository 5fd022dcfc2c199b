"""Numeric integration of solution fields, on and off constraint sets, and
trajectory lifting through sections.

Everything here is fixed-step classical RK4, deliberately: the point of
these trajectories is deterministic, reproducible verification of the
integral-curve correspondence at desk scale, not long-time studies. Curves
restricted to a constraint set get a Newton retraction after every step so
the violation stays at solver precision instead of drifting at the
integrator's order.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import RetractionError
from .gnh import EPS_MEMBERSHIP, PresymplecticSystem
from .hamilton_jacobi import Section, projected_field, section_contraction_residual
from .symbolic import Expr, Role, compile_tape, coord, eval_one, gradient, values_on


@dataclass
class Trajectory:
    """A sampled curve: strictly increasing times against chart points."""

    times: np.ndarray
    names: tuple[str, ...]
    values: np.ndarray
    error: str | None = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 2 or self.values.shape != (len(self.times), len(self.names)):
            raise ValueError(
                f"values must have shape ({len(self.times)}, {len(self.names)})"
            )
        if len(self.times) == 0:
            raise ValueError("a trajectory has at least its initial sample")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    def state(self, i: int) -> dict[str, float]:
        return {n: float(v) for n, v in zip(self.names, self.values[i])}

    @property
    def states(self) -> list[dict[str, float]]:
        return [self.state(i) for i in range(len(self))]

    @property
    def endpoint(self) -> np.ndarray:
        return self.values[-1]


def _check_start(names, x0):
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (len(names),):
        raise ValueError(f"initial point must have {len(names)} coordinates")
    return x0


def integrate_field(
    F: Sequence[Expr],
    names: Sequence[str],
    x0: np.ndarray,
    t_end: float,
    h: float,
    t0: float = 0.0,
) -> Trajectory:
    """Classical RK4 for x' = F(x).

    The final step is shortened to land exactly on ``t_end``. If an
    expression leaves its domain mid-trajectory (NaN from the evaluation
    backend) the part computed so far is returned with ``error`` set.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    names = tuple(names)
    x0 = _check_start(names, x0)
    tape = compile_tape(list(F), names)

    times = [t0]
    states = [x0]
    t, x = t0, x0
    error = None
    while t < t_end - 1e-12:
        dt = min(h, t_end - t)
        k1 = eval_one(tape, x)
        k2 = eval_one(tape, x + 0.5 * dt * k1)
        k3 = eval_one(tape, x + 0.5 * dt * k2)
        k4 = eval_one(tape, x + dt * k3)
        nxt = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(nxt)):
            error = f"evaluation left the expression domain near t = {t + dt:.6g}"
            break
        t, x = t + dt, nxt
        times.append(t)
        states.append(x)
    return Trajectory(np.array(times), names, np.array(states), error)


def _retract(x, c_tape, j_tape, m, d, tol, max_iter):
    """Least-norm Newton correction onto the constraint zero set."""
    for _ in range(max_iter):
        phi = eval_one(c_tape, x)
        worst = float(np.max(np.abs(phi))) if phi.size else 0.0
        if not np.isfinite(worst):
            return x, np.inf
        if worst <= tol:
            return x, worst
        J = eval_one(j_tape, x).reshape(m, d)
        if not np.all(np.isfinite(J)):
            return x, np.inf
        step = np.linalg.lstsq(J, phi, rcond=None)[0]
        x = x - step
    phi = eval_one(c_tape, x)
    return x, float(np.max(np.abs(phi))) if phi.size else 0.0


def integrate_on_constraints(
    F: Sequence[Expr],
    names: Sequence[str],
    constraints: Sequence[Expr],
    x0: np.ndarray,
    t_end: float,
    h: float,
    t0: float = 0.0,
    tol: float = 1e-12,
    max_newton: int = 20,
    budget: float = 1e-7,
) -> Trajectory:
    """RK4 with a post-step Newton retraction onto {constraints = 0}.

    The start point must already satisfy the constraints (within the
    membership tolerance); along the trajectory the violation is pushed to
    ``tol`` after every step and :class:`~degenlag.errors.RetractionError`
    is raised if it cannot be kept within ``budget``.
    """
    if h <= 0:
        raise ValueError("step size must be positive")
    names = tuple(names)
    x0 = _check_start(names, x0)
    constraints = list(constraints)
    if not constraints:
        return integrate_field(F, names, x0, t_end, h, t0)

    f_tape = compile_tape(list(F), names)
    c_tape = compile_tape(constraints, names)
    j_tape = compile_tape(
        [g for phi in constraints for g in gradient(phi, names)], names
    )
    m, d = len(constraints), len(names)

    start_violation = float(np.max(np.abs(eval_one(c_tape, x0))))
    if not start_violation <= EPS_MEMBERSHIP:
        raise ValueError(
            f"initial point violates the constraints by {start_violation:.3e}"
        )

    times = [t0]
    states = [x0]
    t, x = t0, x0
    while t < t_end - 1e-12:
        dt = min(h, t_end - t)
        k1 = eval_one(f_tape, x)
        k2 = eval_one(f_tape, x + 0.5 * dt * k1)
        k3 = eval_one(f_tape, x + 0.5 * dt * k2)
        k4 = eval_one(f_tape, x + dt * k3)
        nxt = x + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(nxt)):
            raise RetractionError(
                f"evaluation left the expression domain near t = {t + dt:.6g}"
            )
        nxt, violation = _retract(nxt, c_tape, j_tape, m, d, tol, max_newton)
        if violation > budget:
            raise RetractionError(
                f"constraint violation {violation:.3e} exceeds the budget near t = {t + dt:.6g}"
            )
        t, x = t + dt, nxt
        times.append(t)
        states.append(x)
    return Trajectory(np.array(times), names, np.array(states))


@dataclass
class LiftComparison:
    """Base curve, its lift through the section, the contraction residual
    of the lifted curve, and the distance to the integral curve of the
    particular field it came from.

    The residual is the contract: the lifted curve must solve the
    presymplectic equation. It need not coincide with the integral curve
    of any particular representative, so ``sup_distance`` is diagnostic."""

    base: Trajectory
    lifted: Trajectory
    residuals: np.ndarray
    sup_residual: float
    field_curve: Trajectory
    sup_distance: float


def lift_and_compare(
    section: Section,
    system: PresymplecticSystem,
    X: Sequence[Expr],
    q0: np.ndarray,
    t_end: float,
    h: float,
    tol: float = EPS_MEMBERSHIP,
    constraints: Sequence[Expr] | None = None,
) -> LiftComparison:
    """Integrate the projected field downstairs, lift through the section,
    and verify the lifted curve's velocity solves the contraction equation.

    The start point's section image must satisfy ``constraints`` (the
    system's stored ones when not given, typically the final level of a
    chain) within ``tol``.
    """
    chart = system.chart
    qnames = section.base_chart.names
    q0 = _check_start(qnames, q0)
    if constraints is None:
        constraints = system.constraints

    lift_exprs: list[Expr] = []
    for name in chart.names:
        role = chart.role_of(name)
        if role is Role.POSITION:
            lift_exprs.append(coord(name))
        elif role is Role.VELOCITY:
            lift_exprs.append(section.Z[chart.velocities.index(name)])
        else:
            lift_exprs.append(section.gamma[chart.momenta.index(name)])

    x0 = values_on(lift_exprs, qnames, q0[None, :])[0]
    if constraints:
        start = values_on(list(constraints), chart.names, x0[None, :])
        worst = float(np.max(np.abs(start)))
        if not worst <= tol:
            raise ValueError(
                f"section image of the start point violates the constraints by {worst:.3e}"
            )

    Xs = projected_field(section, X, chart)
    base = integrate_field(Xs, qnames, q0, t_end, h)
    lifted = Trajectory(
        base.times, chart.names, values_on(lift_exprs, qnames, base.values), base.error
    )
    residuals = section_contraction_residual(section, system, base.values)

    field_curve = integrate_field(X, chart.names, x0, t_end, h)
    k = min(len(lifted), len(field_curve))
    sup_distance = float(np.max(np.abs(lifted.values[:k] - field_curve.values[:k])))
    return LiftComparison(
        base, lifted, residuals, float(np.max(residuals)), field_curve, sup_distance
    )


def write_trajectory_csv(traj: Trajectory, path) -> None:
    """One row per sample: time first, then the chart coordinates, all at
    17 significant digits (enough to round-trip a double)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(("t",) + traj.names)
        for t, row in zip(traj.times, traj.values):
            writer.writerow([f"{t:.17g}"] + [f"{x:.17g}" for x in row])
