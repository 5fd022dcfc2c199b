"""Integrators and trajectory lifting.

Closed-form oracles: the harmonic oscillator for accuracy and order, the
exchange system L = q1*v2 + q2*v1 for constrained runs and lifting (its
constant section makes every hand value available).
"""

import numpy as np
import pytest

from degenlag import dynamics as dyn
from degenlag.errors import RetractionError
from degenlag.gnh import constraint_chain, from_pontryagin
from degenlag.hamilton_jacobi import Section
from degenlag.mechanics import LagrangianSystem, euler_lagrange_field
from degenlag.pontryagin import build_pontryagin
from degenlag.symbolic import Chart, parse_expr


def lag(n, src):
    return LagrangianSystem.from_string(n, src)


@pytest.fixture
def exchange(rng):
    sys = lag(2, "q1*v2 + q2*v1")
    ps = build_pontryagin(sys)
    chain = constraint_chain(from_pontryagin(ps), rng=rng)
    return sys, ps, chain


class TestTrajectory:
    def test_times_must_increase(self):
        with pytest.raises(ValueError, match="increasing"):
            dyn.Trajectory(np.array([0.0, 0.0]), ("q1",), np.zeros((2, 1)))

    def test_shape_checked(self):
        with pytest.raises(ValueError):
            dyn.Trajectory(np.array([0.0, 1.0]), ("q1", "q2"), np.zeros((2, 1)))

    def test_needs_initial_sample(self):
        with pytest.raises(ValueError):
            dyn.Trajectory(np.array([]), ("q1",), np.zeros((0, 1)))

    def test_states_are_coordinate_maps(self):
        tr = dyn.Trajectory(
            np.array([0.0, 1.0]), ("q1", "v1"), np.array([[1.0, 2.0], [3.0, 4.0]])
        )
        assert tr.state(1) == {"q1": 3.0, "v1": 4.0}
        assert tr.states[0]["v1"] == 2.0
        assert len(tr) == 2


class TestIntegrateField:
    def test_constant_field_exact(self):
        chart = Chart.base(2)
        tr = dyn.integrate_field(
            [parse_expr("1", chart)] * 2, chart.names, np.zeros(2), 1.0, 0.1
        )
        assert tr.error is None
        # no integration error at all; only float step accumulation remains
        assert tr.endpoint == pytest.approx([1.0, 1.0], abs=1e-12)

    def test_oscillator_against_closed_form(self):
        sys = lag(1, "v1^2/2 - q1^2/2")
        xi = euler_lagrange_field(sys)
        tr = dyn.integrate_field(
            xi, sys.chart.names, np.array([1.0, 0.0]), 2 * np.pi, 1e-3
        )
        # q(t) = cos t, v(t) = -sin t: one full period returns to the start
        assert np.max(np.abs(tr.endpoint - [1.0, 0.0])) <= 1e-6
        k = len(tr) // 2
        t_mid = tr.times[k]
        assert tr.values[k] == pytest.approx([np.cos(t_mid), -np.sin(t_mid)], abs=1e-6)

    def test_fourth_order_convergence(self):
        sys = lag(1, "v1^2/2 - q1^2/2")
        xi = euler_lagrange_field(sys)
        err = {}
        for h in (0.02, 0.01):
            tr = dyn.integrate_field(
                xi, sys.chart.names, np.array([1.0, 0.0]), 2 * np.pi, h
            )
            err[h] = np.max(np.abs(tr.endpoint - [1.0, 0.0]))
        assert err[0.02] / err[0.01] >= 8.0

    def test_domain_exit_returns_partial_trajectory(self):
        chart = Chart.base(1)
        tr = dyn.integrate_field(
            [parse_expr("0 - sqrt(q1)", chart)], chart.names, np.array([1.0]), 4.0, 0.1
        )
        assert tr.error is not None and "domain" in tr.error
        assert 1 < len(tr)
        assert tr.times[-1] < 4.0
        assert np.all(np.isfinite(tr.values))

    def test_validation(self):
        chart = Chart.base(1)
        F = [parse_expr("1", chart)]
        with pytest.raises(ValueError):
            dyn.integrate_field(F, chart.names, np.zeros(1), 1.0, 0.0)
        with pytest.raises(ValueError):
            dyn.integrate_field(F, chart.names, np.zeros(2), 1.0, 0.1)


class TestIntegrateOnConstraints:
    def test_exchange_stays_on_constraint_set(self, exchange):
        sys, ps, chain = exchange
        X = chain.final_family.representative()
        x0 = np.array([0.0, 0.0, 1.0, 1.0, 0.0, 0.0])
        tr = dyn.integrate_on_constraints(
            X, ps.chart.names, chain.final_constraints, x0, 1.0, 1e-3
        )
        q1, q2, p1, p2 = tr.values[:, 0], tr.values[:, 1], tr.values[:, 4], tr.values[:, 5]
        assert np.max(np.abs(p1 - q2)) <= 1e-7
        assert np.max(np.abs(p2 - q1)) <= 1e-7
        # v' = 1 makes the base motion q(t) = t + t^2/2 in both slots
        assert tr.endpoint[:2] == pytest.approx([1.5, 1.5], abs=1e-9)

    def test_zero_field_is_stationary(self, exchange):
        sys, ps, chain = exchange
        zero = [parse_expr("0", ps.chart)] * 6
        x0 = np.array([0.3, -0.7, 0.2, 0.9, -0.7, 0.3])
        tr = dyn.integrate_on_constraints(
            zero, ps.chart.names, chain.final_constraints, x0, 0.5, 0.05
        )
        assert np.max(np.abs(tr.values - x0)) == 0.0

    def test_rigid_mixed_field_stationary_from_rest(self, rng):
        sys = lag(2, "v1*q2")
        ps = build_pontryagin(sys)
        chain = constraint_chain(from_pontryagin(ps), rng=rng)
        X = chain.final_family.representative()
        x0 = np.array([0.4, -1.1, 0.0, 0.0, -1.1, 0.0])
        tr = dyn.integrate_on_constraints(
            X, ps.chart.names, chain.final_constraints, x0, 1.0, 1e-2
        )
        assert np.max(np.abs(tr.values - x0)) <= 1e-12

    def test_start_off_the_set_rejected(self, exchange):
        sys, ps, chain = exchange
        X = chain.final_family.representative()
        with pytest.raises(ValueError, match="violates"):
            dyn.integrate_on_constraints(
                X,
                ps.chart.names,
                chain.final_constraints,
                np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]),
                1.0,
                1e-3,
            )

    def test_budget_violation_raises(self):
        # a quartic zero is a worst case for Newton: convergence is linear
        # with ratio 3/4, so 20 iterations cannot reach a 1e-13 budget
        chart = Chart.base(2)
        F = [parse_expr("1", chart), parse_expr("0", chart)]
        con = [parse_expr("q1^4", chart)]
        with pytest.raises(RetractionError, match="budget"):
            dyn.integrate_on_constraints(
                F, chart.names, con, np.zeros(2), 1.0, 0.5, budget=1e-13
            )

    def test_retraction_preserves_unconstrained_order(self):
        sys = lag(1, "v1^2/2 - q1^2/2")
        xi = euler_lagrange_field(sys)
        shell = [parse_expr("(v1^2 + q1^2)/2 - 1/2", sys.chart)]
        x0 = np.array([1.0, 0.0])
        free = dyn.integrate_field(xi, sys.chart.names, x0, 1.0, 1e-3)
        constrained = dyn.integrate_on_constraints(
            xi, sys.chart.names, shell, x0, 1.0, 1e-3
        )
        assert np.max(np.abs(free.values - constrained.values)) <= 1e-8

    def test_no_constraints_degrades_to_plain_integration(self):
        chart = Chart.base(1)
        F = [parse_expr("q1", chart)]
        a = dyn.integrate_field(F, chart.names, np.array([1.0]), 1.0, 0.01)
        b = dyn.integrate_on_constraints(F, chart.names, [], np.array([1.0]), 1.0, 0.01)
        assert np.array_equal(a.values, b.values)


class TestLiftAndCompare:
    def test_exchange_lift_solves_along_the_curve(self, exchange):
        sys, ps, chain = exchange
        sec = Section.from_strings(2, ["1", "1"], ["q2", "q1"])
        X = chain.final_family.representative()
        out = dyn.lift_and_compare(
            sec, chain.system, X, np.zeros(2), 1.0, 1e-3,
            constraints=chain.final_constraints,
        )
        assert out.sup_residual <= 1e-7
        # base curve is the straight line (t, t); the lift pins the
        # velocities at one and copies the base into the momenta
        t = out.base.times
        assert np.max(np.abs(out.base.values - np.stack([t, t], axis=1))) <= 1e-12
        want = np.stack([t, t, np.ones_like(t), np.ones_like(t), t, t], axis=1)
        assert np.max(np.abs(out.lifted.values - want)) <= 1e-12
        # the integral curve of the chosen representative accelerates away:
        # coincidence is not part of the contract, and genuinely fails here
        assert out.sup_distance > 0.5

    def test_regular_free_particle_lift_is_the_integral_curve(self, rng):
        sys = lag(1, "v1^2/2")
        chain = constraint_chain(from_pontryagin(build_pontryagin(sys)), rng=rng)
        sec = Section.from_strings(1, ["1"], ["1"])
        out = dyn.lift_and_compare(
            sec, chain.system, chain.final_family.representative(),
            np.zeros(1), 1.0, 1e-3,
        )
        assert out.sup_residual <= 1e-7
        assert out.sup_distance <= 1e-7

    def test_linear_section_on_regular_system(self, rng):
        # L = v^2/2 + q^2/2 admits gamma = q1 dq1 as an exact solution of
        # the momentum-side problem; the lifted curve follows q' = q
        sys = lag(1, "v1^2/2 + q1^2/2")
        chain = constraint_chain(from_pontryagin(build_pontryagin(sys)), rng=rng)
        sec = Section.from_strings(1, ["q1"], ["q1"])
        out = dyn.lift_and_compare(
            sec, chain.system, chain.final_family.representative(),
            np.array([0.3]), 1.0, 1e-3,
        )
        assert out.sup_residual <= 1e-6
        assert out.sup_distance <= 1e-7
        assert out.base.endpoint[0] == pytest.approx(0.3 * np.e, abs=1e-6)

    def test_start_point_must_lift_into_the_set(self, exchange):
        sys, ps, chain = exchange
        bad = Section.from_strings(2, ["1", "1"], ["q2", "q1 + 1"])
        with pytest.raises(ValueError, match="violates"):
            dyn.lift_and_compare(
                bad, chain.system, chain.final_family.representative(),
                np.zeros(2), 1.0, 1e-2, constraints=chain.final_constraints,
            )


class TestCsvExport:
    def test_round_trip(self, tmp_path):
        tr = dyn.Trajectory(
            np.array([0.0, 0.125]),
            ("q1", "v1"),
            np.array([[1.0, -2.0], [1.0 / 3.0, np.pi]]),
        )
        path = tmp_path / "curve.csv"
        dyn.write_trajectory_csv(tr, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "t,q1,v1"
        got = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
        assert np.array_equal(got[:, 0], tr.times)
        assert np.array_equal(got[:, 1:], tr.values)
