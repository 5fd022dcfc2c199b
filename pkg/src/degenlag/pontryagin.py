"""The combined velocity-momentum picture.

A Lagrangian system is re-posed on the bundle with chart (q, v, p): momenta
are independent coordinates, dynamics comes from contracting the canonical
two-form (pulled up from momentum phase space) against the differential of
the generalized energy v.p - L. The equation is degenerate in a structured
way: positions and momenta components of a solution field are forced,
velocity components are free, and solvability pins the graph of the fiber
derivative (the primary constraints).
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import DegenerateHessianError
from .mechanics import (
    LagrangianSystem,
    Regularity,
    TwoForm,
    hessian,
    legendre_map,
)
from .symbolic import (
    Chart,
    Expr,
    add,
    con,
    coord,
    differentiate,
    gradient,
    mul,
    sub,
)
from .symbolic.expr import ZERO
from .symbolic.linsolve import solve_linear_symbolic
from .symbolic.zerotest import ZERO_SAMPLES, default_rng, sample_box


@dataclass
class SolutionFamily:
    """An affine family of vector fields: particular + span(null_basis).

    ``level`` is the 1-based constraint level on which the family is valid
    (members solve the field equation at points of that level, and are
    tangent to every shallower level the producing algorithm has imposed).
    """

    chart: Chart
    particular: list[Expr]
    null_basis: list[list[Expr]]
    level: int

    @property
    def null_dimension(self) -> int:
        return len(self.null_basis)

    def representative(self, coefficients: Sequence | None = None) -> list[Expr]:
        """particular + sum(c_i * basis_i); coefficients default to all 1.

        The all-ones representative is the package's canonical choice when a
        single concrete field is needed for diagnostics.
        """
        if coefficients is None:
            coefficients = [con(1)] * len(self.null_basis)
        if len(coefficients) != len(self.null_basis):
            raise ValueError(
                f"expected {len(self.null_basis)} coefficients, got {len(coefficients)}"
            )
        out = list(self.particular)
        for c, vec in zip(coefficients, self.null_basis):
            ce = c if isinstance(c, Expr) else con(c)
            for i in range(len(out)):
                out[i] = add(out[i], mul(ce, vec[i]))
        return out


@dataclass
class PontryaginSystem:
    """The assembled combined-bundle data for one Lagrangian system."""

    n: int
    chart: Chart  # (q1..qn, v1..vn, p1..pn)
    lagrangian: Expr
    generalized_energy: Expr  # v.p - L
    omega: TwoForm  # canonical dq ^ dp, degenerate along v
    base: LagrangianSystem

    @property
    def box(self):
        return self.base.box


def build_pontryagin(sys: LagrangianSystem) -> PontryaginSystem:
    chart = Chart.velocity_momentum(sys.n)
    D = ZERO
    for vn, pn in zip(chart.velocities, chart.momenta):
        D = add(D, mul(coord(vn), coord(pn)))
    D = sub(D, sys.lagrangian)
    return PontryaginSystem(
        n=sys.n,
        chart=chart,
        lagrangian=sys.lagrangian,
        generalized_energy=D,
        omega=TwoForm.canonical(chart),
        base=sys,
    )


def generalized_energy_differential(ps: PontryaginSystem) -> list[Expr]:
    """Components of d(v.p - L) in chart order: (-dL/dq | p - dL/dv | v)."""
    return gradient(ps.generalized_energy, ps.chart.names)


def primary_constraints(ps: PontryaginSystem) -> list[Expr]:
    """p_A - dL/dv^A: the graph of the fiber derivative."""
    W = legendre_map(ps.base)
    return [sub(coord(pn), w) for pn, w in zip(ps.chart.momenta, W)]


def solution_family(ps: PontryaginSystem) -> SolutionFamily:
    """General solution of the field equation at points of the primary
    constraint set: positions move with the velocity coordinates, momenta
    move with dL/dq, and the velocity directions are pure gauge."""
    n = ps.n
    qs, vs = ps.chart.positions, ps.chart.velocities
    particular: list[Expr] = [coord(v) for v in vs]
    particular += [ZERO] * n
    particular += [differentiate(ps.lagrangian, q) for q in qs]
    null_basis = []
    for a in range(n):
        vec = [ZERO] * (3 * n)
        vec[n + a] = con(1)
        null_basis.append(vec)
    return SolutionFamily(ps.chart, particular, null_basis, level=1)


def euler_lagrange_accelerations(
    ps: PontryaginSystem, rng: np.random.Generator | None = None
) -> list[Expr]:
    """The unique velocity components that make a family member second
    order, available exactly when the velocity Hessian is regular.

    This is the combined-bundle face of the regular-case Euler-Lagrange
    solve; it delegates to the base system and raises
    :class:`DegenerateHessianError` otherwise.
    """
    from .mechanics import euler_lagrange_accelerations as _base_accel

    return _base_accel(ps.base, rng)


def second_order_representative(
    ps: PontryaginSystem, rng: np.random.Generator | None = None
) -> list[Expr]:
    """particular + null combination with the regular-case accelerations."""
    fam = solution_family(ps)
    return fam.representative(euler_lagrange_accelerations(ps, rng))
