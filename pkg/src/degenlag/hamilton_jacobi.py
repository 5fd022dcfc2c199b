"""Hamilton-Jacobi candidate verification.

A candidate is a section sigma = (Z, gamma): a vector field Z and a one-form
gamma on the configuration space, read as a map q -> (q, Z(q), gamma(q))
into the combined bundle. The section solves the Hamilton-Jacobi problem of
a (possibly singular) Lagrangian when four conditions hold, reported under
these ids:

  InW1            the image lies in the level-1 constraint set
  InWf            the image over the projected final set lies in the final set
  GammaClosed     gamma is a closed one-form
  DCircSigmaFlat  d(D composed with sigma) vanishes along the projected
                  final set (D = generalized energy of the setting)

Two diagnostics accompany them: KernelMembership (the defect between a
solution field along the section and the section's tangent lift of its
projection lies in the kernel of the two-form) and SigmaRelated (that
defect vanishes outright). In the singular case the kernel condition can
hold while relatedness fails; the diagnostics keep the two separate.

The same report shape covers the velocity-space setting (candidate = a
vector field Z alone, closedness replaced by vanishing of the pullback of
the two-form through Z) and the momentum-space setting (candidate = a
one-form gamma against a reduced Hamiltonian).

Restriction to the projected final set is never done symbolically: the
projected set is probed, either by sampling the final constraint set and
projecting points down, or by root-searching the pulled-back constraints,
and differentials are tested against numeric tangent bases obtained from
singular value decompositions of constraint Jacobians.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import FiberDependenceError, NotTangentError
from .gnh import (
    ChainStatus,
    ConstraintChain,
    EPS_MEMBERSHIP,
    PresymplecticSystem,
    constraint_chain,
    from_lagrangian,
    from_pontryagin,
    hamiltonian_system,
    sample_on_constraints,
)
from .mechanics import (
    LagrangianSystem,
    TwoForm,
    energy,
    lagrangian_two_form,
    legendre_fiber_solve,
    legendre_map,
    pullback_two_form,
)
from .pontryagin import PontryaginSystem, build_pontryagin
from .symbolic import (
    BoxSpec,
    Chart,
    Expr,
    Role,
    ZeroVerdict,
    add,
    differentiate,
    free_coords,
    gradient,
    is_identically_zero,
    mul,
    parse_expr,
    simplify,
    sub,
    substitute,
    values_on,
    zero_verdict,
)
from .symbolic.expr import ZERO
from .symbolic.linsolve import solve_linear_symbolic
from .symbolic.zerotest import ZERO_SAMPLES, default_rng, sample_box

KERNEL_TOL = 1e-9


class Verdict(Enum):
    PASS = "pass"
    FAIL = "fail"
    INDETERMINATE = "indeterminate"


@dataclass
class ConditionReport:
    id: str
    verdict: Verdict
    detail: str = ""
    residual: float | None = None
    witness: list[float] | None = None


@dataclass
class HJReport:
    setting: str  # "sr", "lagrangian", "hamiltonian"
    conditions: list[ConditionReport]
    diagnostics: list[ConditionReport]

    def condition(self, cid: str) -> ConditionReport:
        for c in self.conditions + self.diagnostics:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def is_solution(self) -> bool:
        return all(c.verdict is Verdict.PASS for c in self.conditions)

    @property
    def any_indeterminate(self) -> bool:
        return any(c.verdict is Verdict.INDETERMINATE for c in self.conditions)


@dataclass
class Section:
    """A vector-field/one-form pair over the configuration chart."""

    n: int
    Z: list[Expr]
    gamma: list[Expr]

    def __post_init__(self):
        if len(self.Z) != self.n or len(self.gamma) != self.n:
            raise ValueError("section components must have length n")
        allowed = set(self.base_chart.names)
        for e in list(self.Z) + list(self.gamma):
            extra = free_coords(e) - allowed
            if extra:
                raise ValueError(
                    f"section components may only use base coordinates; found {sorted(extra)}"
                )

    @property
    def base_chart(self) -> Chart:
        return Chart.base(self.n)

    def substitution(self, chart: Chart) -> dict[str, Expr]:
        """Replacement map sending the chart's fiber coordinates to the
        section components (velocities to Z, momenta to gamma)."""
        out: dict[str, Expr] = {}
        for a, vn in enumerate(chart.velocities):
            out[vn] = self.Z[a]
        for a, pn in enumerate(chart.momenta):
            out[pn] = self.gamma[a]
        return out

    @staticmethod
    def from_strings(n: int, Z: Sequence[str], gamma: Sequence[str]) -> "Section":
        chart = Chart.base(n)
        return Section(
            n,
            [parse_expr(s, chart) for s in Z],
            [parse_expr(s, chart) for s in gamma],
        )

    @staticmethod
    def from_field(sys: LagrangianSystem, Z: Sequence[Expr]) -> "Section":
        """Pair Z with its fiber-derivative image, the canonical choice of
        gamma for a given field."""
        repl = {vn: z for vn, z in zip(sys.chart.velocities, Z)}
        gamma = [simplify(substitute(w, repl)) for w in legendre_map(sys)]
        return Section(sys.n, list(Z), gamma)


# ----------------------------------------------------------------------
# shared machinery


def _zero_test_all(exprs, box, rng) -> tuple[Verdict, int]:
    """(verdict, index of first offending expression or -1)."""
    worst = Verdict.PASS
    for k, e in enumerate(exprs):
        v = zero_verdict(e, box, rng)
        if v is ZeroVerdict.NONZERO:
            return Verdict.FAIL, k
        if v is ZeroVerdict.INDETERMINATE:
            worst = Verdict.INDETERMINATE
    return worst, -1


def _final_pullback(section: Section, chain: ConstraintChain) -> list[Expr]:
    """Final constraints composed with the section: functions of q."""
    repl = section.substitution(chain.system.chart)
    return [simplify(substitute(phi, repl)) for phi in chain.final_constraints]


def _preimage_probes(
    section: Section,
    chain: ConstraintChain,
    n: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Base points whose section image satisfies the final constraints."""
    psi = [e for e in _final_pullback(section, chain) if e != ZERO]
    qnames = section.base_chart.names
    return sample_on_constraints(psi, qnames, n, chain.system.box, rng)


def _projected_final_probes(
    chain: ConstraintChain, n_base: int, n: int, rng: np.random.Generator
) -> np.ndarray:
    """Base points obtained by sampling the final constraint set upstairs
    and projecting down: the probe model of the projected final set."""
    names = chain.system.chart.names
    pts = sample_on_constraints(
        chain.final_constraints, names, n, chain.system.box, rng
    )
    return pts[:, :n_base]


def _tangential_residual(
    grad_exprs: Sequence[Expr],
    psi: Sequence[Expr],
    names: Sequence[str],
    probes: np.ndarray,
    sv_tol: float = 1e-8,
) -> float:
    """Worst projection of a gradient onto the tangent spaces of {psi = 0}
    across the probes. With no constraints the whole space is tangent."""
    gvals = values_on(list(grad_exprs), names, probes)
    psi = [e for e in psi if e != ZERO]
    if not psi:
        return float(np.max(np.abs(gvals)))
    flat = [g for phi in psi for g in gradient(phi, names)]
    jac = values_on(flat, names, probes).reshape(probes.shape[0], len(psi), len(names))
    worst = 0.0
    for k in range(probes.shape[0]):
        J = jac[k]
        g = gvals[k]
        if not (np.all(np.isfinite(J)) and np.all(np.isfinite(g))):
            return float("inf")
        s, vt = np.linalg.svd(J)[1:]
        rank = int(np.sum(s > sv_tol * max(1.0, s[0] if s.size else 1.0)))
        tangent = vt[rank:]
        if tangent.shape[0]:
            worst = max(worst, float(np.max(np.abs(tangent @ g))))
    return worst


def _tangent_lift(
    section: Section, chart: Chart, base_field: Sequence[Expr]
) -> list[Expr]:
    """Push a base vector field through the section map: position slots
    carry the field itself, fiber slots its contraction with the Jacobians
    of Z and gamma."""
    qnames = section.base_chart.names
    out: list[Expr] = []
    for name in chart.names:
        role = chart.role_of(name)
        if role is Role.POSITION:
            out.append(base_field[chart.positions.index(name)])
            continue
        if role is Role.VELOCITY:
            comp = section.Z[chart.velocities.index(name)]
        else:
            comp = section.gamma[chart.momenta.index(name)]
        acc = ZERO
        for qn, f in zip(qnames, base_field):
            acc = add(acc, mul(differentiate(comp, qn), f))
        out.append(simplify(acc))
    return out


def _delta_exprs(
    section: Section, chart: Chart, X: Sequence[Expr]
) -> tuple[list[Expr], list[Expr]]:
    """(field along the section, defect against the tangent lift), both as
    expressions in the base coordinates."""
    repl = section.substitution(chart)
    along = [simplify(substitute(c, repl)) for c in X]
    projected = along[: section.n]
    lift = _tangent_lift(section, chart, projected)
    delta = [simplify(sub(a, b)) for a, b in zip(along, lift)]
    return along, delta


# ----------------------------------------------------------------------
# the four conditions, combined-bundle setting


def check_gamma_closed(
    section: Section,
    box: BoxSpec | None = None,
    rng: np.random.Generator | None = None,
) -> ConditionReport:
    """Closedness of the one-form component, pair by pair."""
    qnames = section.base_chart.names
    for a in range(section.n):
        for b in range(a + 1, section.n):
            e = sub(
                differentiate(section.gamma[a], qnames[b]),
                differentiate(section.gamma[b], qnames[a]),
            )
            v = zero_verdict(e, box, rng)
            if v is ZeroVerdict.NONZERO:
                return ConditionReport(
                    "GammaClosed",
                    Verdict.FAIL,
                    f"antisymmetrized derivative in ({qnames[a]}, {qnames[b]}) is nonzero",
                )
            if v is ZeroVerdict.INDETERMINATE:
                return ConditionReport(
                    "GammaClosed", Verdict.INDETERMINATE, "zero test had no valid probes"
                )
    return ConditionReport("GammaClosed", Verdict.PASS, "one-form is closed")


def check_in_W1(
    section: Section,
    sys: LagrangianSystem,
    rng: np.random.Generator | None = None,
) -> ConditionReport:
    """gamma must be the fiber-derivative image of Z."""
    repl = {vn: z for vn, z in zip(sys.chart.velocities, section.Z)}
    gaps = [
        sub(g, substitute(w, repl))
        for g, w in zip(section.gamma, legendre_map(sys))
    ]
    verdict, k = _zero_test_all(gaps, sys.box, rng)
    if verdict is Verdict.FAIL:
        return ConditionReport(
            "InW1", verdict, f"component {k + 1} of gamma differs from the fiber image of Z"
        )
    if verdict is Verdict.INDETERMINATE:
        return ConditionReport("InW1", verdict, "zero test had no valid probes")
    return ConditionReport("InW1", verdict, "gamma equals the fiber image of Z")


def _check_in_final(
    section: Section,
    chain: ConstraintChain,
    n_probes: int,
    rng: np.random.Generator,
    tol: float = EPS_MEMBERSHIP,
) -> ConditionReport:
    psi = _final_pullback(section, chain)
    verdict, _ = _zero_test_all(psi, chain.system.box, rng)
    if verdict is Verdict.PASS:
        return ConditionReport(
            "InWf", Verdict.PASS, "pulled-back final constraints vanish identically", 0.0
        )
    probes = _projected_final_probes(chain, section.n, n_probes, rng)
    if probes.shape[0] == 0:
        return ConditionReport(
            "InWf", Verdict.INDETERMINATE, "no points found on the projected final set"
        )
    vals = values_on(psi, section.base_chart.names, probes)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    worst = float(np.max(np.abs(vals))) if vals.size else 0.0
    if worst <= tol:
        return ConditionReport(
            "InWf", Verdict.PASS,
            f"section image satisfies the final constraints at {probes.shape[0]} projected points",
            worst,
        )
    k = int(np.argmax(np.max(np.abs(vals), axis=1)))
    return ConditionReport(
        "InWf", Verdict.FAIL,
        "section image leaves the final set over the projected final set",
        worst,
        witness=[float(x) for x in probes[k]],
    )


def check_dD_sigma(
    section: Section,
    ps: PontryaginSystem,
    chain: ConstraintChain,
    n_probes: int = ZERO_SAMPLES,
    rng: np.random.Generator | None = None,
    tol: float = KERNEL_TOL,
) -> ConditionReport:
    """d of (generalized energy composed with the section), restricted to
    the projected final set."""
    rng = default_rng(rng)
    repl = section.substitution(ps.chart)
    composed = simplify(substitute(ps.generalized_energy, repl))
    qnames = section.base_chart.names
    grads = gradient(composed, qnames)
    return _restricted_differential_report(
        "DCircSigmaFlat", grads, section, chain, n_probes, rng, tol,
        "generalized energy along the section",
    )


def _restricted_differential_report(
    cid: str,
    grads: list[Expr],
    section: Section,
    chain: ConstraintChain,
    n_probes: int,
    rng: np.random.Generator,
    tol: float,
    what: str,
) -> ConditionReport:
    verdict, _ = _zero_test_all(grads, chain.system.box, rng)
    if verdict is Verdict.PASS:
        return ConditionReport(
            cid, Verdict.PASS, f"differential of the {what} vanishes identically", 0.0
        )
    probes = _preimage_probes(section, chain, n_probes, rng)
    if probes.shape[0] == 0:
        return ConditionReport(
            cid, Verdict.INDETERMINATE,
            "no base points whose section image meets the final set",
        )
    psi = _final_pullback(section, chain)
    worst = _tangential_residual(grads, psi, section.base_chart.names, probes)
    if worst <= tol:
        return ConditionReport(
            cid, Verdict.PASS,
            f"differential of the {what} vanishes tangentially at {probes.shape[0]} points",
            worst,
        )
    return ConditionReport(
        cid, Verdict.FAIL,
        f"differential of the {what} has a tangential component on the projected final set",
        worst,
    )


# ----------------------------------------------------------------------
# projected fields and the relatedness diagnostics


def projected_field(
    section: Section, X: Sequence[Expr], chart: Chart
) -> list[Expr]:
    """Base components of X along the section: functions of q only."""
    repl = section.substitution(chart)
    return [simplify(substitute(X[a], repl)) for a in range(section.n)]


def kernel_membership(
    section: Section,
    system: PresymplecticSystem,
    X: Sequence[Expr],
    probes: np.ndarray,
    tol: float = KERNEL_TOL,
) -> ConditionReport:
    """Whether the defect between X along the section and the tangent lift
    of its projection is annihilated by the two-form, at the probes."""
    _, delta = _delta_exprs(section, system.chart, X)
    repl = section.substitution(system.chart)
    comps = [simplify(substitute(c, repl)) for c in system.omega.contract(delta)]
    if probes.shape[0] == 0:
        return ConditionReport(
            "KernelMembership", Verdict.INDETERMINATE, "no probe points"
        )
    vals = values_on(comps, section.base_chart.names, probes)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    worst = float(np.max(np.abs(vals))) if vals.size else 0.0
    if worst <= tol:
        return ConditionReport(
            "KernelMembership", Verdict.PASS,
            "two-form annihilates the defect at every probe", worst,
        )
    return ConditionReport(
        "KernelMembership", Verdict.FAIL,
        "defect leaves the kernel of the two-form", worst,
    )


def sigma_relatedness(
    section: Section,
    chart: Chart,
    X: Sequence[Expr],
    probes: np.ndarray,
    tol: float = KERNEL_TOL,
) -> ConditionReport:
    """Whether X along the section equals the tangent lift of its
    projection outright; reports the component values of the defect at the
    worst probe as the witness."""
    _, delta = _delta_exprs(section, chart, X)
    if probes.shape[0] == 0:
        return ConditionReport("SigmaRelated", Verdict.INDETERMINATE, "no probe points")
    vals = values_on(delta, section.base_chart.names, probes)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    per_probe = np.max(np.abs(vals), axis=1)
    worst = float(np.max(per_probe))
    k = int(np.argmax(per_probe))
    witness = [float(x) for x in vals[k]]
    if worst <= tol:
        return ConditionReport(
            "SigmaRelated", Verdict.PASS,
            "X along the section equals the tangent lift of its projection",
            worst, witness,
        )
    return ConditionReport(
        "SigmaRelated", Verdict.FAIL,
        "fields are not related through the section; defect components at the worst probe attached",
        worst, witness,
    )


# ----------------------------------------------------------------------
# full reports per setting


def _require_stabilized(chain: ConstraintChain):
    if chain.status is not ChainStatus.STABILIZED:
        raise ValueError(
            f"constraint chain ended with status '{chain.status.value}'; "
            "verification needs a stabilized chain"
        )


def hj_check_sr(
    section: Section,
    sys: LagrangianSystem,
    X: Sequence[Expr] | None = None,
    chain: ConstraintChain | None = None,
    n_probes: int = ZERO_SAMPLES,
    rng: np.random.Generator | None = None,
    tol: float = KERNEL_TOL,
) -> HJReport:
    """Verify a section against the combined-bundle system of a Lagrangian.

    Runs (or reuses) the constraint chain, evaluates the four conditions,
    then reports the kernel and relatedness diagnostics against ``X``,
    which defaults to the final family's canonical representative (all free
    coefficients set to one).
    """
    rng = default_rng(rng)
    ps = build_pontryagin(sys)
    if chain is None:
        chain = constraint_chain(from_pontryagin(ps), rng=rng)
    _require_stabilized(chain)
    conditions = [
        check_in_W1(section, sys, rng),
        _check_in_final(section, chain, n_probes, rng),
        check_gamma_closed(section, sys.box, rng),
        check_dD_sigma(section, ps, chain, n_probes, rng, tol),
    ]
    if X is None:
        X = chain.final_family.representative()
    probes = _preimage_probes(section, chain, n_probes, rng)
    diagnostics = [
        kernel_membership(section, chain.system, X, probes, tol),
        sigma_relatedness(section, chain.system.chart, X, probes, tol),
    ]
    return HJReport("sr", conditions, diagnostics)


def hj_check_lagrangian(
    Z: Sequence[Expr],
    sys: LagrangianSystem,
    xi: Sequence[Expr] | None = None,
    chain: ConstraintChain | None = None,
    n_probes: int = ZERO_SAMPLES,
    rng: np.random.Generator | None = None,
    tol: float = KERNEL_TOL,
) -> HJReport:
    """Velocity-space verification of a candidate vector field Z.

    The closedness slot is occupied by its analogue here: the pullback of
    the Lagrangian two-form through Z must vanish. The relatedness
    diagnostic is reported but does not enter the solution verdict (it can
    fail for genuine solutions of singular systems).
    """
    rng = default_rng(rng)
    Z = list(Z)
    section = Section(sys.n, Z, [ZERO] * sys.n)  # gamma unused on this chart
    if chain is None:
        chain = constraint_chain(from_lagrangian(sys), rng=rng)
    _require_stabilized(chain)
    repl = section.substitution(sys.chart)

    level1 = [simplify(substitute(phi, repl)) for phi in chain.levels[0]]
    verdict, k = _zero_test_all(level1, sys.box, rng)
    if verdict is Verdict.PASS:
        detail = (
            "level-1 constraints vanish along the field graph"
            if level1
            else "level 1 carries no constraint functions"
        )
        c1 = ConditionReport("InW1", Verdict.PASS, detail)
    elif verdict is Verdict.FAIL:
        c1 = ConditionReport("InW1", Verdict.FAIL, f"level-1 constraint {k + 1} is violated")
    else:
        c1 = ConditionReport("InW1", Verdict.INDETERMINATE, "zero test had no valid probes")

    c2 = _check_in_final(section, chain, n_probes, rng)

    back = pullback_two_form(
        lagrangian_two_form(sys),
        {vn: z for vn, z in zip(sys.chart.velocities, Z)},
        section.base_chart,
    )
    verdict, _ = _zero_test_all(list(back.upper.values()), sys.box, rng)
    if verdict is Verdict.PASS:
        c3 = ConditionReport("GammaClosed", Verdict.PASS, "pullback of the two-form vanishes")
    elif verdict is Verdict.FAIL:
        c3 = ConditionReport("GammaClosed", Verdict.FAIL, "pullback of the two-form is nonzero")
    else:
        c3 = ConditionReport("GammaClosed", Verdict.INDETERMINATE, "zero test had no valid probes")

    composed = simplify(substitute(energy(sys), repl))
    grads = gradient(composed, section.base_chart.names)
    c4 = _restricted_differential_report(
        "DCircSigmaFlat", grads, section, chain, n_probes, rng, tol,
        "energy along the field graph",
    )

    if xi is None:
        xi = chain.final_family.representative()
    probes = _preimage_probes(section, chain, n_probes, rng)
    diagnostics = [
        kernel_membership(section, chain.system, xi, probes, tol),
        sigma_relatedness(section, chain.system.chart, xi, probes, tol),
    ]
    return HJReport("lagrangian", [c1, c2, c3, c4], diagnostics)


# ----------------------------------------------------------------------
# momentum-side setting


@dataclass
class HamiltonianInput:
    """Reduced Hamiltonian data on momentum phase space: the function, the
    image constraints of the fiber derivative, and where they came from."""

    n: int
    h1: Expr
    constraints: list[Expr]
    provenance: str  # "derived" | "user"
    box: BoxSpec | None = None

    @property
    def chart(self) -> Chart:
        return Chart.cotangent(self.n)

    def system(self) -> PresymplecticSystem:
        return hamiltonian_system(self.n, self.h1, self.constraints, self.box)


def derive_hamiltonian(
    sys: LagrangianSystem,
    rng: np.random.Generator | None = None,
) -> HamiltonianInput:
    """Eliminate velocities from the fiber equation to express the energy
    on momentum phase space.

    Works when the fiber derivative is affine in the velocities: the fiber
    equation is then a symbolic linear system whose unsolvable rows are
    exactly the image constraints and whose solution is a velocity section.
    The result is validated by pushing h1 back through the fiber derivative
    and zero-testing against the energy.
    """
    rng = default_rng(rng)
    n = sys.n
    W = legendre_map(sys)
    vnames = sys.chart.velocities
    C = [[differentiate(W[a], vb) for vb in vnames] for a in range(n)]
    for row in C:
        for e in row:
            if free_coords(e) & set(vnames):
                raise ValueError(
                    "fiber derivative is not affine in the velocities; "
                    "supply h1 and constraints explicitly"
                )
    at_zero = {vn: ZERO for vn in vnames}
    cot = Chart.cotangent(n)
    rhs = [
        sub(parse_expr(pn, cot), substitute(W[a], at_zero))
        for a, pn in enumerate(cot.momenta)
    ]
    probes = sample_box(cot.names, sys.box, ZERO_SAMPLES, rng)
    sol = solve_linear_symbolic(C, rhs, cot.names, probes)
    constraints = [simplify(c) for c in sol.conditions]
    E = energy(sys)
    if is_identically_zero(E, sys.box):
        h1 = ZERO
    else:
        vbar = {vn: sol.particular[b] for b, vn in enumerate(vnames)}
        h1 = simplify(substitute(E, vbar))
    pushed = substitute(h1, {pn: W[a] for a, pn in enumerate(cot.momenta)})
    if not is_identically_zero(sub(pushed, E), sys.box):
        raise ValueError(
            "derived h1 does not reproduce the energy through the fiber derivative"
        )
    return HamiltonianInput(n, h1, constraints, "derived", sys.box)


def hamiltonian_input_from_user(
    n: int,
    h1: Expr,
    constraints: Sequence[Expr],
    sys: LagrangianSystem | None = None,
    box: BoxSpec | None = None,
) -> HamiltonianInput:
    """Package user-supplied momentum-side data, validating it against a
    Lagrangian when one is given."""
    inp = HamiltonianInput(n, h1, list(constraints), "user", box)
    if sys is not None:
        W = legendre_map(sys)
        pushed = substitute(h1, {pn: W[a] for a, pn in enumerate(inp.chart.momenta)})
        if not is_identically_zero(sub(pushed, energy(sys)), sys.box):
            raise ValueError("h1 does not reproduce the energy through the fiber derivative")
    return inp


def hj_check_hamiltonian(
    gamma: Sequence[Expr],
    ham: HamiltonianInput,
    chain: ConstraintChain | None = None,
    n_probes: int = ZERO_SAMPLES,
    rng: np.random.Generator | None = None,
    tol: float = KERNEL_TOL,
) -> HJReport:
    """Momentum-side verification of a one-form candidate against the
    reduced Hamiltonian."""
    rng = default_rng(rng)
    gamma = list(gamma)
    n = ham.n
    system = ham.system()
    if chain is None:
        chain = constraint_chain(system, rng=rng)
    _require_stabilized(chain)
    Y = chain.final_family.representative()
    # project Y through gamma to get the base field, then treat the pair as
    # a section of the momentum bundle
    probe_section = Section(n, [ZERO] * n, gamma)
    Ygamma = projected_field(probe_section, Y, system.chart)
    section = Section(n, Ygamma, gamma)
    repl = section.substitution(system.chart)

    level1 = [simplify(substitute(phi, repl)) for phi in ham.constraints]
    verdict, k = _zero_test_all(level1, ham.box, rng)
    if verdict is Verdict.PASS:
        detail = (
            "initial constraints vanish along gamma"
            if level1
            else "no initial constraints"
        )
        c1 = ConditionReport("InW1", Verdict.PASS, detail)
    elif verdict is Verdict.FAIL:
        c1 = ConditionReport("InW1", Verdict.FAIL, f"initial constraint {k + 1} is violated along gamma")
    else:
        c1 = ConditionReport("InW1", Verdict.INDETERMINATE, "zero test had no valid probes")

    c2 = _check_in_final(section, chain, n_probes, rng)
    c3 = check_gamma_closed(Section(n, [ZERO] * n, gamma), ham.box, rng)

    composed = simplify(substitute(ham.h1, repl))
    grads = gradient(composed, section.base_chart.names)
    c4 = _restricted_differential_report(
        "DCircSigmaFlat", grads, section, chain, n_probes, rng, tol,
        "reduced Hamiltonian along gamma",
    )

    probes = _preimage_probes(section, chain, n_probes, rng)
    diagnostics = [
        kernel_membership(section, system, Y, probes, tol),
        sigma_relatedness(section, system.chart, Y, probes, tol),
    ]
    return HJReport("hamiltonian", [c1, c2, c3, c4], diagnostics)


# ----------------------------------------------------------------------
# cross-setting constructions


def sode_point(
    xi: Sequence[Expr],
    sys: LagrangianSystem,
    point_qp: np.ndarray,
    seeds: Sequence[np.ndarray] | None = None,
    tol: float = 1e-8,
) -> np.ndarray:
    """Map a momentum-side point to the velocity-side point whose velocity
    is the base component of xi at a fiber preimage.

    The preimage is found by Newton on the fiber equation from several
    seeds; the construction is only meaningful when the result does not
    depend on which preimage was found, so the values are compared across
    seeds and :class:`~degenlag.errors.FiberDependenceError` is raised when
    they disagree beyond ``tol``.
    """
    n = sys.n
    point_qp = np.asarray(point_qp, dtype=float)
    if point_qp.shape != (2 * n,):
        raise ValueError(f"expected a point with {2 * n} coordinates")
    q, p = point_qp[:n], point_qp[n:]
    if seeds is None:
        seeds = [np.zeros(n), np.full(n, 0.7), np.full(n, -0.6)]
    etas = []
    for s in seeds:
        v = legendre_fiber_solve(sys, q, p, seed_v=np.asarray(s, dtype=float))
        x = np.concatenate([q, v])[None, :]
        etas.append(values_on(list(xi[:n]), sys.chart.names, x)[0])
    spread = 0.0
    for i in range(len(etas)):
        for j in range(i + 1, len(etas)):
            spread = max(spread, float(np.max(np.abs(etas[i] - etas[j]))))
    if spread > tol:
        raise FiberDependenceError(
            f"base component of the field varies across the fiber (spread {spread:.3e}); "
            "the construction's hypotheses fail here"
        )
    return np.concatenate([q, etas[0]])


def build_section_from_gamma(
    gamma: Sequence[Expr], Y: Sequence[Expr], n: int
) -> Section:
    """Assemble the combined-bundle section (Y projected through gamma,
    gamma) from momentum-side data."""
    gamma = list(gamma)
    probe = Section(n, [ZERO] * n, gamma)
    cot = Chart.cotangent(n)
    Z = projected_field(probe, list(Y[:n]), cot)
    return Section(n, Z, gamma)


def section_contraction_residual(
    section: Section,
    system: PresymplecticSystem,
    q_points: np.ndarray,
) -> np.ndarray:
    """Per-point residual of the contraction equation for the tangent lift
    of Z along the section image: how well the lifted field solves the
    system on the section."""
    chart = system.chart
    lift = _tangent_lift(section, chart, section.Z)
    comps = [sub(a, b) for a, b in zip(system.omega.contract(lift), system.alpha)]
    repl = section.substitution(chart)
    comps = [simplify(substitute(c, repl)) for c in comps]
    vals = values_on(comps, section.base_chart.names, q_points)
    vals = np.where(np.isfinite(vals), vals, np.inf)
    return np.max(np.abs(vals), axis=1)


def project_solution(
    X: Sequence[Expr],
    ps: PontryaginSystem,
    target: str,
    chain: ConstraintChain | None = None,
    rng: np.random.Generator | None = None,
    tol: float = EPS_MEMBERSHIP,
) -> list[Expr]:
    """Project a combined-bundle solution field to one side.

    ``target`` is "lagrangian" (keep base and velocity slots, rewrite
    momenta through the fiber derivative so the result lives on velocity
    phase space) or "hamiltonian" (keep base and momentum slots). When a
    chain is supplied, tangency of X to the final constraint set (the
    family's validity domain) is spot checked first and
    :class:`~degenlag.errors.NotTangentError` raised on violation.
    """
    n = ps.n
    X = list(X)
    if len(X) != 3 * n:
        raise ValueError(f"field must have {3 * n} components")
    if chain is not None:
        rng = default_rng(rng)
        names = ps.chart.names
        final = chain.final_constraints
        pts = sample_on_constraints(final, names, 16, chain.system.box, rng)
        for phi in final:
            g = gradient(phi, names)
            comp = ZERO
            for ge, xe in zip(g, X):
                comp = add(comp, mul(ge, xe))
            vals = values_on([comp], names, pts)
            if np.max(np.abs(vals)) > tol:
                raise NotTangentError(
                    "field is not tangent to the final constraint set"
                )
    if target == "lagrangian":
        W = legendre_map(ps.base)
        repl = {pn: w for pn, w in zip(ps.chart.momenta, W)}
        return [simplify(substitute(c, repl)) for c in X[: 2 * n]]
    if target == "hamiltonian":
        return X[:n] + X[2 * n :]
    raise ValueError("target must be 'lagrangian' or 'hamiltonian'")


def hamiltonian_projection_residual(
    ps: PontryaginSystem,
    X2: Sequence[Expr],
    ham: HamiltonianInput,
    points: np.ndarray,
    sv_tol: float = 1e-8,
) -> float:
    """Residual of the momentum-side equation for a projected field,
    restricted to tangent directions of the constraint set.

    ``points`` are combined-bundle samples (the projected components may
    still reference velocities); the constraint tangent spaces are computed
    on the momentum chart at the projected points.
    """
    n = ps.n
    cot = ham.chart
    omega = TwoForm.canonical(cot)
    comps = [
        sub(a, b)
        for a, b in zip(omega.contract(list(X2)), gradient(ham.h1, cot.names))
    ]
    vals = values_on(comps, ps.chart.names, points)
    cols = [ps.chart.names.index(nm) for nm in cot.names]
    projected = points[:, cols]
    if not ham.constraints:
        return float(np.max(np.abs(vals)))
    flat = [g for phi in ham.constraints for g in gradient(phi, cot.names)]
    jac = values_on(flat, cot.names, projected).reshape(
        points.shape[0], len(ham.constraints), 2 * n
    )
    worst = 0.0
    for k in range(points.shape[0]):
        s, vt = np.linalg.svd(jac[k])[1:]
        rank = int(np.sum(s > sv_tol * max(1.0, s[0] if s.size else 1.0)))
        tangent = vt[rank:]
        if tangent.shape[0]:
            worst = max(worst, float(np.max(np.abs(tangent @ vals[k]))))
    return worst
