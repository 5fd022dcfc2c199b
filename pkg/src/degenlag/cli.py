"""Command line front end.

Reads a JSON problem file and runs the library against it. Machine-readable
results go to stdout as JSON with sorted keys (two runs with the same file
and seed emit identical bytes); ``report`` emits markdown instead. The exit
code summarizes verdicts only, it never adds judgment of its own:

  0  everything that produces a verdict passed (or the command is factual)
  1  some condition verdict failed
  2  something came back indeterminate (including chains out of budget)
  3  the problem file or arguments are unusable
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .dynamics import lift_and_compare, write_trajectory_csv
from .errors import DegenlagError, ProblemFileError
from .gnh import ConstraintChain, constraint_chain, from_lagrangian, from_pontryagin
from .hamilton_jacobi import (
    HJReport,
    Verdict,
    derive_hamiltonian,
    hj_check_hamiltonian,
    hj_check_lagrangian,
    hj_check_sr,
)
from .mechanics import energy, hessian, lagrangian_two_form, legendre_map
from .pontryagin import build_pontryagin
from .problemfile import Problem, load_problem

PASS, FAIL, INDETERMINATE, INPUT_ERROR = 0, 1, 2, 3


def _combine(codes) -> int:
    codes = list(codes)
    if FAIL in codes:
        return FAIL
    if INDETERMINATE in codes:
        return INDETERMINATE
    return PASS


def _emit(doc) -> None:
    print(json.dumps(doc, sort_keys=True, indent=2))


def _atomic_write(path, text: str) -> None:
    tmp = f"{path}.tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


# ----------------------------------------------------------------------
# serialization


def _condition_doc(c) -> dict:
    return {
        "id": c.id,
        "verdict": c.verdict.value,
        "detail": c.detail,
        "residual": c.residual,
        "witness": c.witness,
    }


def _report_doc(rep: HJReport) -> dict:
    return {
        "setting": rep.setting,
        "conditions": [_condition_doc(c) for c in rep.conditions],
        "diagnostics": [_condition_doc(c) for c in rep.diagnostics],
        "is_solution": rep.is_solution,
    }


def _family_doc(fam) -> dict | None:
    if fam is None:
        return None
    return {
        "particular": [str(c) for c in fam.particular],
        "null_basis": [[str(c) for c in b] for b in fam.null_basis],
        "dimension": fam.null_dimension,
        "level": fam.level,
    }


def _chain_doc(chain: ConstraintChain) -> dict:
    return {
        "status": chain.status.value,
        "stabilization_index": chain.index,
        "levels": [[str(phi) for phi in level] for level in chain.levels],
        "final_constraints": [str(phi) for phi in chain.final_constraints],
        "family": _family_doc(chain.final_family),
        "summary": chain.summary(),
    }


def _report_exit(rep: HJReport) -> int:
    codes = []
    for c in rep.conditions:
        if c.verdict is Verdict.FAIL:
            codes.append(FAIL)
        elif c.verdict is Verdict.INDETERMINATE:
            codes.append(INDETERMINATE)
        else:
            codes.append(PASS)
    return _combine(codes)


# ----------------------------------------------------------------------
# per-command work


def _hamiltonian_input(problem: Problem, rng):
    if problem.hamiltonian is not None:
        return problem.hamiltonian
    return derive_hamiltonian(problem.system, rng=rng)


def _chain_for(problem: Problem, setting: str, rng) -> ConstraintChain:
    if setting == "sr":
        system = from_pontryagin(build_pontryagin(problem.system))
    elif setting == "lag":
        system = from_lagrangian(problem.system)
    else:
        system = _hamiltonian_input(problem, rng).system()
    return constraint_chain(system, rng=rng, n_probes=problem.probe_count)


def _cmd_analyze(problem: Problem, args) -> int:
    rng = np.random.default_rng(problem.probe_seed)
    sys_ = problem.system
    hess = hessian(sys_, rng=rng)
    omega = lagrangian_two_form(sys_)
    doc = {
        "command": "analyze",
        "dim": problem.n,
        "lagrangian": str(sys_.lagrangian),
        "legendre_map": [str(w) for w in legendre_map(sys_)],
        "energy": str(energy(sys_)),
        "hessian": {
            "matrix": [[str(e) for e in row] for row in hess.matrix],
            "determinant": str(hess.determinant),
            "verdict": hess.verdict.value,
        },
        "two_form": [
            [i, j, str(e)] for (i, j), e in sorted(omega.upper.items())
        ],
    }
    _emit(doc)
    return INDETERMINATE if hess.verdict.value == "indeterminate" else PASS


def _cmd_chain(problem: Problem, args) -> int:
    rng = np.random.default_rng(problem.probe_seed)
    try:
        chain = _chain_for(problem, args.setting, rng)
    except (DegenlagError, ValueError) as e:
        _emit({"command": "chain", "setting": args.setting, "error": str(e)})
        return INDETERMINATE
    doc = {"command": "chain", "setting": args.setting}
    doc.update(_chain_doc(chain))
    _emit(doc)
    return INDETERMINATE if chain.status.value == "budget" else PASS


def _run_section(problem: Problem, name: str, setting: str, rng) -> HJReport:
    section = problem.sections[name]
    if setting == "sr":
        return hj_check_sr(
            section, problem.system, n_probes=problem.probe_count, rng=rng
        )
    if setting == "lag":
        return hj_check_lagrangian(
            section.Z, problem.system, n_probes=problem.probe_count, rng=rng
        )
    ham = _hamiltonian_input(problem, rng)
    return hj_check_hamiltonian(
        section.gamma, ham, n_probes=problem.probe_count, rng=rng
    )


def _cmd_hj_check(problem: Problem, args) -> int:
    if args.section not in problem.sections:
        print(f"error: no section named '{args.section}'", file=sys.stderr)
        return INPUT_ERROR
    rng = np.random.default_rng(problem.probe_seed)
    try:
        rep = _run_section(problem, args.section, args.setting, rng)
    except (DegenlagError, ValueError) as e:
        _emit({"command": "hj-check", "section": args.section,
               "setting": args.setting, "error": str(e)})
        return INDETERMINATE
    doc = {"command": "hj-check", "section": args.section}
    doc.update(_report_doc(rep))
    _emit(doc)
    return _report_exit(rep)


def _cmd_simulate(problem: Problem, args) -> int:
    if problem.simulate is None:
        print("error: the problem file has no simulate block", file=sys.stderr)
        return INPUT_ERROR
    sim = problem.simulate
    section = problem.sections[sim.section]
    rng = np.random.default_rng(problem.probe_seed)
    try:
        chain = _chain_for(problem, "sr", rng)
        X = chain.final_family.representative()
    except (DegenlagError, ValueError) as e:
        _emit({"command": "simulate", "error": str(e)})
        return INDETERMINATE
    try:
        out = lift_and_compare(
            section, chain.system, X, np.array(sim.q0), sim.t_end, sim.h,
            constraints=chain.final_constraints,
        )
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR

    os.makedirs(args.out, exist_ok=True)
    paths = {}
    for label, traj in (
        ("base", out.base), ("lifted", out.lifted), ("field", out.field_curve)
    ):
        path = os.path.join(args.out, f"{sim.section}_{label}.csv")
        write_trajectory_csv(traj, path)
        paths[label] = path
    summary = {
        "command": "simulate",
        "section": sim.section,
        "t_end": sim.t_end,
        "h": sim.h,
        "samples": len(out.base),
        "sup_residual": out.sup_residual,
        "sup_distance": out.sup_distance,
        "integration_error": out.base.error,
        "trajectories": paths,
    }
    _atomic_write(
        os.path.join(args.out, f"{sim.section}_summary.json"),
        json.dumps(summary, sort_keys=True, indent=2) + "\n",
    )
    _emit(summary)
    return PASS


_SETTING_TITLES = {"sr": "combined bundle", "lag": "velocity space", "ham": "momentum space"}


def _cmd_report(problem: Problem, args) -> int:
    codes = []
    lines = []
    sys_ = problem.system
    rng = np.random.default_rng(problem.probe_seed)
    hess = hessian(sys_, rng=rng)
    lines += [
        "# Problem report",
        "",
        f"Configuration dimension {problem.n}, Lagrangian `{sys_.lagrangian}`.",
        "",
        "## System",
        "",
        f"- Legendre map: {', '.join(f'`{w}`' for w in legendre_map(sys_))}",
        f"- Energy: `{energy(sys_)}`",
        f"- Velocity Hessian: {hess.verdict.value} (determinant `{hess.determinant}`)",
        "",
        "## Constraint chains",
        "",
    ]
    if hess.verdict.value == "indeterminate":
        codes.append(INDETERMINATE)

    chains: dict[str, ConstraintChain | None] = {}
    for setting in ("sr", "lag", "ham"):
        rng = np.random.default_rng(problem.probe_seed)
        try:
            chain = _chain_for(problem, setting, rng)
        except (DegenlagError, ValueError) as e:
            lines.append(f"- {_SETTING_TITLES[setting]}: not available ({e})")
            chains[setting] = None
            codes.append(INDETERMINATE)
            continue
        chains[setting] = chain
        lines.append(f"- {_SETTING_TITLES[setting]}: {chain.summary()}")
        if chain.status.value == "budget":
            codes.append(INDETERMINATE)
        for k, level in enumerate(chain.levels, start=1):
            shown = ", ".join(f"`{phi}`" for phi in level) if level else "none"
            lines.append(f"    - level {k}: {shown}")

    if problem.sections:
        lines += ["", "## Sections", ""]
    for name in problem.sections:
        lines.append(f"### {name}")
        lines.append("")
        for setting in ("sr", "lag", "ham"):
            rng = np.random.default_rng(problem.probe_seed)
            try:
                rep = _run_section(problem, name, setting, rng)
            except (DegenlagError, ValueError) as e:
                lines.append(f"- {_SETTING_TITLES[setting]}: not verifiable ({e})")
                codes.append(INDETERMINATE)
                continue
            codes.append(_report_exit(rep))
            verdict = "solution" if rep.is_solution else "not a solution"
            parts = ", ".join(f"{c.id}={c.verdict.value}" for c in rep.conditions)
            diag = ", ".join(f"{c.id}={c.verdict.value}" for c in rep.diagnostics)
            lines.append(f"- {_SETTING_TITLES[setting]}: **{verdict}** ({parts}; diagnostics: {diag})")
        lines.append("")

    if problem.simulate is not None:
        sim = problem.simulate
        section = problem.sections[sim.section]
        rng = np.random.default_rng(problem.probe_seed)
        lines += ["## Simulation", ""]
        chain = chains.get("sr")
        if chain is None:
            lines.append("- skipped: no combined-bundle chain")
            codes.append(INDETERMINATE)
        else:
            try:
                out = lift_and_compare(
                    section, chain.system, chain.final_family.representative(),
                    np.array(sim.q0), sim.t_end, sim.h,
                    constraints=chain.final_constraints,
                )
                lines.append(
                    f"- section `{sim.section}` from {sim.q0}: lifted-curve residual "
                    f"{out.sup_residual:.3e}, distance to the representative's integral "
                    f"curve {out.sup_distance:.3e}"
                )
            except ValueError as e:
                lines.append(f"- failed: {e}")
                codes.append(INDETERMINATE)

    text = "\n".join(lines).rstrip() + "\n"
    if args.out:
        _atomic_write(args.out, text)
    print(text, end="")
    return _combine(codes)


# ----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="degenlag",
        description="Constraint analysis and Hamilton-Jacobi verification "
        "for degenerate Lagrangian systems.",
    )
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="Legendre map, energy, two-form, Hessian verdict")
    a.add_argument("problem", help="problem JSON file")
    a.set_defaults(fn=_cmd_analyze)

    c = sub.add_parser("chain", help="run the constraint chain")
    c.add_argument("problem")
    c.add_argument("--setting", choices=("sr", "lag", "ham"), default="sr")
    c.set_defaults(fn=_cmd_chain)

    h = sub.add_parser("hj-check", help="verify a named section")
    h.add_argument("problem")
    h.add_argument("--section", required=True)
    h.add_argument("--setting", choices=("sr", "lag", "ham"), default="sr")
    h.set_defaults(fn=_cmd_hj_check)

    s = sub.add_parser("simulate", help="integrate, lift, and export trajectories")
    s.add_argument("problem")
    s.add_argument("--out", default=".", help="output directory for CSV files")
    s.set_defaults(fn=_cmd_simulate)

    r = sub.add_parser("report", help="markdown report aggregating all analyses")
    r.add_argument("problem")
    r.add_argument("--out", default=None, help="also write the markdown to this file")
    r.set_defaults(fn=_cmd_report)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        problem = load_problem(args.problem)
    except ProblemFileError as e:
        print(f"error: {e}", file=sys.stderr)
        return INPUT_ERROR
    return args.fn(problem, args)


if __name__ == "__main__":
    sys.exit(main())
