"""Problem document validation and parsing.

Every rejection must carry a JSON-path locator pointing at the offending
field, so the CLI can print actionable errors. Oracles here are hand-built
documents with a single planted defect each.
"""

import json
from pathlib import Path

import numpy as np
import pytest

from degenlag.errors import ProblemFileError
from degenlag.problemfile import load_problem, load_problem_dict
from degenlag.symbolic.engine import values_on


def doc(**over):
    """Minimal valid document (the exchange model), with overrides."""
    d = {"dim": 2, "lagrangian": "q1*v2 + q2*v1"}
    d.update(over)
    return d


def reject(document):
    with pytest.raises(ProblemFileError) as exc:
        load_problem_dict(document)
    return str(exc.value)


class TestSchemaRejection:
    def test_unknown_top_level_key(self):
        msg = reject(doc(unknown_key=1))
        assert msg.startswith("$: ")
        assert "unknown_key" in msg

    def test_dim_wrong_type(self):
        assert reject(doc(dim="2")).startswith("$.dim: ")

    def test_dim_zero(self):
        assert reject(doc(dim=0)).startswith("$.dim: ")

    def test_missing_lagrangian(self):
        msg = reject({"dim": 2})
        assert msg.startswith("$: ")
        assert "lagrangian" in msg

    def test_section_missing_field(self):
        msg = reject(doc(sections=[{"name": "s"}]))
        assert msg.startswith("$.sections[0]: ")
        assert "Z" in msg

    def test_section_extra_field(self):
        d = doc(sections=[{"name": "s", "Z": ["1", "1"], "xi": ["1"]}])
        assert reject(d).startswith("$.sections[0]: ")

    def test_probe_count_zero(self):
        assert reject(doc(probes={"count": 0})).startswith("$.probes.count: ")

    def test_step_not_positive(self):
        d = doc(
            sections=[{"name": "s", "Z": ["1", "1"]}],
            simulate={"section": "s", "q0": [0, 0], "t_end": 1, "h": 0},
        )
        assert reject(d).startswith("$.simulate.h: ")

    def test_first_error_by_path_order(self):
        # two defects: the one earliest in path order is reported
        d = doc(dim="x")
        d["simulate"] = {"section": "s"}
        assert reject(d).startswith("$.dim: ")

    def test_box_pair_wrong_length(self):
        assert reject(doc(box={"q1": [0]})).startswith("$.box.q1: ")


class TestSemanticRejection:
    def test_lagrangian_parse_error_carries_position(self):
        msg = reject(doc(lagrangian="q1*"))
        assert msg.startswith("$.lagrangian: ")
        assert "position" in msg

    def test_unknown_lagrangian_symbol(self):
        # momenta are not tangent-chart coordinates
        assert reject(doc(lagrangian="p1*v1")).startswith("$.lagrangian: ")

    def test_box_unknown_coordinate(self):
        msg = reject(doc(box={"q9": [0, 1]}))
        assert msg.startswith("$.box.q9: ")
        assert "unknown coordinate" in msg

    def test_box_empty_interval(self):
        msg = reject(doc(box={"q1": [2, 2]}))
        assert msg.startswith("$.box.q1: ")
        assert "empty interval" in msg

    def test_section_length_mismatch(self):
        d = doc(sections=[{"name": "s", "Z": ["1"]}])
        msg = reject(d)
        assert msg.startswith("$.sections[0].Z: ")
        assert "expected 2 components" in msg

    def test_gamma_length_mismatch(self):
        d = doc(sections=[{"name": "s", "Z": ["1", "1"], "gamma": ["q1"]}])
        assert reject(d).startswith("$.sections[0].gamma: ")

    def test_duplicate_section_name(self):
        d = doc(
            sections=[
                {"name": "s", "Z": ["1", "1"]},
                {"name": "s", "Z": ["0", "0"]},
            ]
        )
        msg = reject(d)
        assert msg.startswith("$.sections[1].name: ")
        assert "duplicate" in msg

    def test_section_component_parse_error(self):
        d = doc(sections=[{"name": "s", "Z": ["1", "q1 +"]}])
        assert reject(d).startswith("$.sections[0].Z[1]: ")

    def test_section_component_rejects_velocities(self):
        # section components live over the base chart only
        d = doc(sections=[{"name": "s", "Z": ["v1", "0"]}])
        assert reject(d).startswith("$.sections[0].Z[0]: ")

    def test_simulate_unknown_section(self):
        d = doc(
            sections=[{"name": "s", "Z": ["1", "1"]}],
            simulate={"section": "other", "q0": [0, 0], "t_end": 1, "h": 0.1},
        )
        msg = reject(d)
        assert msg.startswith("$.simulate.section: ")
        assert "other" in msg

    def test_simulate_q0_length(self):
        d = doc(
            sections=[{"name": "s", "Z": ["1", "1"]}],
            simulate={"section": "s", "q0": [0.0], "t_end": 1, "h": 0.1},
        )
        assert reject(d).startswith("$.simulate.q0: ")

    def test_hamiltonian_rejects_velocity_symbols(self):
        d = doc(hamiltonian={"h1": "v1*p1"})
        assert reject(d).startswith("$.hamiltonian.h1: ")

    def test_hamiltonian_constraint_parse_error(self):
        d = doc(hamiltonian={"h1": "p1*q1", "constraints": ["p1 -"]})
        assert reject(d).startswith("$.hamiltonian.constraints[0]: ")


class TestParsing:
    def test_minimal_document(self):
        p = load_problem_dict(doc())
        assert p.n == 2
        assert p.sections == {}
        assert p.hamiltonian is None
        assert p.simulate is None

    def test_probe_defaults(self):
        p = load_problem_dict(doc())
        assert (p.probe_count, p.probe_seed) == (100, 42)

    def test_probe_override(self):
        p = load_problem_dict(doc(probes={"count": 7, "seed": 9}))
        assert (p.probe_count, p.probe_seed) == (7, 9)

    def test_gamma_defaults_to_fiber_derivative_of_Z(self):
        # L = q1*v2 + q2*v1 has fiber derivative (q2, q1), independent of Z
        p = load_problem_dict(doc(sections=[{"name": "s", "Z": ["1", "1"]}]))
        sec = p.sections["s"]
        pts = np.array([[0.3, -1.2], [1.0, 2.0], [-0.5, 0.25]])
        got = values_on(sec.gamma, ["q1", "q2"], pts)
        expected = pts[:, [1, 0]]
        assert np.allclose(got, expected, atol=1e-14)

    def test_explicit_gamma_is_kept(self):
        d = doc(sections=[{"name": "s", "Z": ["1", "1"], "gamma": ["q2", "q1 + 1"]}])
        sec = load_problem_dict(d).sections["s"]
        pts = np.array([[0.5, 2.0]])
        got = values_on(sec.gamma, ["q1", "q2"], pts)
        assert np.allclose(got, [[2.0, 1.5]])

    def test_box_reaches_the_system(self):
        p = load_problem_dict(doc(box={"q1": [-1, 1], "v2": [0, 3]}))
        assert p.system.box == {"q1": (-1.0, 1.0), "v2": (0.0, 3.0)}

    def test_hamiltonian_block(self):
        d = doc(hamiltonian={"h1": "p1*p2", "constraints": ["p1 - q2", "p2 - q1"]})
        p = load_problem_dict(d)
        assert p.hamiltonian is not None
        assert p.hamiltonian.n == 2
        assert len(p.hamiltonian.constraints) == 2
        assert p.hamiltonian.provenance == "user"

    def test_simulate_block(self):
        d = doc(
            sections=[{"name": "s", "Z": ["1", "1"]}],
            simulate={"section": "s", "q0": [0, 1], "t_end": 2, "h": 0.25},
        )
        sim = load_problem_dict(d).simulate
        assert sim.section == "s"
        assert sim.q0 == [0.0, 1.0]
        assert sim.t_end == 2.0
        assert sim.h == 0.25


PROBLEMS = Path(__file__).resolve().parents[1] / "problems"


class TestLoadProblem:
    def test_shipped_exchange_problem(self):
        p = load_problem(PROBLEMS / "exchange.json")
        assert p.n == 2
        assert set(p.sections) == {"Z11", "tilted"}
        assert p.simulate is not None and p.simulate.section == "Z11"

    def test_shipped_mixed_problem(self):
        p = load_problem(PROBLEMS / "mixed.json")
        assert p.n == 2
        assert "rest" in p.sections

    def test_missing_file(self):
        with pytest.raises(ProblemFileError, match="cannot read"):
            load_problem(PROBLEMS / "no_such_file.json")

    def test_invalid_json(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text("{not json")
        with pytest.raises(ProblemFileError, match="not valid JSON"):
            load_problem(bad)

    def test_round_trip_via_dict(self, tmp_path):
        d = doc(sections=[{"name": "s", "Z": ["q2", "q1"]}])
        path = tmp_path / "p.json"
        path.write_text(json.dumps(d))
        p = load_problem(path)
        assert set(p.sections) == {"s"}
