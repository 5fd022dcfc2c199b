"""Problem documents for the command line front end.

A problem is one JSON object describing a Lagrangian, optional candidate
sections, optional momentum-side data, probe settings, and an optional
simulation request. Validation is strict (unknown keys are rejected) and
every complaint carries the JSON path of the offending field.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

import jsonschema

from .errors import ParseError, ProblemFileError
from .hamilton_jacobi import HamiltonianInput, Section
from .mechanics import LagrangianSystem
from .symbolic import Chart, Expr, parse_expr

SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["dim", "lagrangian"],
    "additionalProperties": False,
    "properties": {
        "dim": {"type": "integer", "minimum": 1},
        "lagrangian": {"type": "string", "minLength": 1},
        "box": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "number"},
                "minItems": 2,
                "maxItems": 2,
            },
        },
        "sections": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "Z"],
                "additionalProperties": False,
                "properties": {
                    "name": {"type": "string", "minLength": 1},
                    "Z": {"type": "array", "items": {"type": "string"}},
                    "gamma": {"type": "array", "items": {"type": "string"}},
                },
            },
        },
        "hamiltonian": {
            "type": "object",
            "required": ["h1"],
            "additionalProperties": False,
            "properties": {
                "h1": {"type": "string", "minLength": 1},
                "constraints": {"type": "array", "items": {"type": "string"}},
            },
        },
        "probes": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
        },
        "simulate": {
            "type": "object",
            "required": ["section", "q0", "t_end", "h"],
            "additionalProperties": False,
            "properties": {
                "section": {"type": "string", "minLength": 1},
                "q0": {"type": "array", "items": {"type": "number"}},
                "t_end": {"type": "number"},
                "h": {"type": "number", "exclusiveMinimum": 0},
            },
        },
    },
}


@dataclass
class SimulateSpec:
    section: str
    q0: list[float]
    t_end: float
    h: float


@dataclass
class Problem:
    """A validated, fully parsed problem document."""

    n: int
    system: LagrangianSystem
    sections: dict[str, Section] = field(default_factory=dict)
    hamiltonian: HamiltonianInput | None = None
    probe_count: int = 100
    probe_seed: int = 42
    simulate: SimulateSpec | None = None


def _path(parts) -> str:
    out = "$"
    for p in parts:
        out += f"[{p}]" if isinstance(p, int) else f".{p}"
    return out


def _parse(src: str, chart: Chart, where: str) -> Expr:
    try:
        return parse_expr(src, chart)
    except ParseError as e:
        raise ProblemFileError(str(e), where) from e


def load_problem_dict(doc: Any) -> Problem:
    """Validate and parse an already-decoded problem document."""
    validator = jsonschema.Draft202012Validator(SCHEMA)
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        raise ProblemFileError(e.message, _path(e.absolute_path))

    n = doc["dim"]
    vm = Chart.velocity_momentum(n)

    box = None
    if "box" in doc:
        box = {}
        for name, pair in doc["box"].items():
            where = f"$.box.{name}"
            if name not in vm.names:
                raise ProblemFileError(f"unknown coordinate '{name}'", where)
            lo, hi = float(pair[0]), float(pair[1])
            if not lo < hi:
                raise ProblemFileError(f"empty interval [{lo}, {hi}]", where)
            box[name] = (lo, hi)

    tangent = Chart.tangent(n)
    lagrangian = _parse(doc["lagrangian"], tangent, "$.lagrangian")
    system = LagrangianSystem(n, lagrangian, tangent, box)

    base = Chart.base(n)
    sections: dict[str, Section] = {}
    for i, spec in enumerate(doc.get("sections", [])):
        name = spec["name"]
        if name in sections:
            raise ProblemFileError(f"duplicate section '{name}'", f"$.sections[{i}].name")
        if len(spec["Z"]) != n:
            raise ProblemFileError(f"expected {n} components", f"$.sections[{i}].Z")
        Z = [_parse(s, base, f"$.sections[{i}].Z[{j}]") for j, s in enumerate(spec["Z"])]
        if "gamma" in spec:
            if len(spec["gamma"]) != n:
                raise ProblemFileError(f"expected {n} components", f"$.sections[{i}].gamma")
            gamma = [
                _parse(s, base, f"$.sections[{i}].gamma[{j}]")
                for j, s in enumerate(spec["gamma"])
            ]
            sections[name] = Section(n, Z, gamma)
        else:
            # default: pair Z with its image under the fiber derivative
            try:
                sections[name] = Section.from_field(system, Z)
            except ValueError as e:
                raise ProblemFileError(str(e), f"$.sections[{i}]") from e

    hamiltonian = None
    if "hamiltonian" in doc:
        cot = Chart.cotangent(n)
        h1 = _parse(doc["hamiltonian"]["h1"], cot, "$.hamiltonian.h1")
        constraints = [
            _parse(s, cot, f"$.hamiltonian.constraints[{j}]")
            for j, s in enumerate(doc["hamiltonian"].get("constraints", []))
        ]
        hamiltonian = HamiltonianInput(n, h1, constraints, "user", box)

    probes = doc.get("probes", {})
    simulate = None
    if "simulate" in doc:
        sim = doc["simulate"]
        if sim["section"] not in sections:
            raise ProblemFileError(
                f"no section named '{sim['section']}'", "$.simulate.section"
            )
        if len(sim["q0"]) != n:
            raise ProblemFileError(f"expected {n} coordinates", "$.simulate.q0")
        simulate = SimulateSpec(
            sim["section"], [float(x) for x in sim["q0"]], float(sim["t_end"]), float(sim["h"])
        )

    return Problem(
        n=n,
        system=system,
        sections=sections,
        hamiltonian=hamiltonian,
        probe_count=probes.get("count", 100),
        probe_seed=probes.get("seed", 42),
        simulate=simulate,
    )


def load_problem(path) -> Problem:
    """Read, validate, and parse a problem file."""
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ProblemFileError(f"cannot read problem file: {e}") from e
    except json.JSONDecodeError as e:
        raise ProblemFileError(f"not valid JSON: {e}") from e
    return load_problem_dict(doc)
