"""Unit tests for the DCA driver."""

import numpy as np
import pytest

from dcaport.dca.penalty import penalized_objective
from dcaport.dca.solver import (
    SolverConfig,
    TerminationReason,
    initial_point,
    run_dca,
)
from dcaport.dca.subproblem import solve_relaxation
from dcaport.dca.trace import (
    TRACE_COLUMNS,
    TraceRecord,
    descent_violations,
    trace_rows,
)
from dcaport.model.feasibility import check_feasibility
from dcaport.model.instance import Point, objective
from dcaport.utils.config import Config
from dcaport.utils.exceptions import (
    ConfigurationError,
    InfeasibleError,
    ValidationError,
)
from tests.instances import (
    diagonal_instance,
    random_instance,
    two_asset_instance,
)


class TestSolverConfig:
    """Test cases for solver settings."""

    def test_defaults(self):
        """Test default values."""
        cfg = SolverConfig()
        assert cfg.theta == 2.0
        assert cfg.epsilon == 1e-6
        assert cfg.theta_escalation

    def test_validation(self):
        """Test rejection of invalid settings."""
        with pytest.raises(ConfigurationError):
            SolverConfig(theta=0.0)
        with pytest.raises(ConfigurationError):
            SolverConfig(epsilon=-1.0)
        with pytest.raises(ConfigurationError):
            SolverConfig(max_iter=0)
        with pytest.raises(ConfigurationError):
            SolverConfig(escalation_factor=1.0)
        with pytest.raises(ConfigurationError):
            SolverConfig(theta=10.0, theta_cap=5.0)

    def test_from_config_with_overrides(self):
        """Test that explicit overrides win and None is ignored."""
        config = Config()
        config.set('solver.theta', 4.0)
        config.set('qp.tol', 1e-7)
        cfg = SolverConfig.from_config(config, theta=None, epsilon=1e-5)
        assert cfg.theta == 4.0
        assert cfg.epsilon == 1e-5
        assert cfg.qp.tol == 1e-7


class TestTrace:
    """Test cases for trace records."""

    def _record(self, k, theta, F):
        point = Point(x=[1.0], x_b=[1.0], x_s=[0.0], z=[1.0])
        return TraceRecord(k=k, point=point, theta=theta, F=F, objective=F,
                           alpha=0.0, step_norm=0.0, solve_seconds=0.0,
                           qp_iterations=0)

    def test_rows(self):
        """Test scalar row export."""
        rows = trace_rows([self._record(1, 2.0, 1.0)])
        assert tuple(rows[0]) == TRACE_COLUMNS
        assert rows[0]['F'] == 1.0

    def test_descent_violations(self):
        """Test that only rises within one theta count."""
        trace = [self._record(1, 2.0, 3.0), self._record(2, 2.0, 2.0),
                 self._record(3, 10.0, 5.0), self._record(4, 10.0, 6.0)]
        assert descent_violations(trace) == [4]


class TestRunDca:
    """Test cases for run_dca."""

    def test_two_asset_example(self):
        """Test that the lower-variance asset is selected."""
        inst = two_asset_instance()
        result = run_dca(inst)
        assert result.solution is not None
        assert result.solution.support == (0,)
        assert np.allclose(result.solution.x, [1.0, 0.0], atol=1e-8)
        assert result.objective == pytest.approx(1.0, abs=1e-8)
        assert result.iterations == len(result.trace)

    def test_initial_point(self):
        """Test rounding the relaxation up to a 0/1 pattern."""
        inst = diagonal_instance([1.0, 1.0], card=1)
        p = initial_point(inst)
        assert np.array_equal(p.z, [1.0, 1.0])
        assert np.allclose(p.x, [0.5, 0.5], atol=1e-6)

    def test_descent_and_binariness(self):
        """Test monotone F within each theta and a binary final z."""
        inst = random_instance(n=8, seed=1, card=3)
        result = run_dca(inst)
        assert descent_violations(result.trace, slack=1e-9) == []
        assert result.solution is not None
        report = check_feasibility(inst, result.solution.point, tol=1e-8,
                                   binary_mode=True)
        assert report.feasible
        assert len(result.solution.support) == 3
        assert result.termination in (TerminationReason.STEP_TOLERANCE,
                                      TerminationReason.MAX_ITER)

    def test_relaxation_bounds_objective(self):
        """Test that the continuous relaxation is a lower bound."""
        inst = random_instance(n=6, seed=4, card=2)
        relaxed, _ = solve_relaxation(inst)
        result = run_dca(inst)
        assert result.objective >= objective(inst, relaxed.x) - 1e-8

    def test_full_support(self):
        """Test the card == n fast path."""
        inst = diagonal_instance([1.0, 2.0, 4.0], card=3)
        result = run_dca(inst)
        assert result.iterations == 1
        assert result.solution.support == (0, 1, 2)
        weights = np.array([4.0, 2.0, 1.0]) / 7.0
        assert np.allclose(result.solution.x, weights, atol=1e-7)

    def test_explicit_start(self):
        """Test running from a given starting point."""
        inst = two_asset_instance()
        start = Point(x=[0.0, 1.0], x_b=[0.0, 1.0], x_s=[0.0, 0.0],
                      z=[0.0, 1.0])
        result = run_dca(inst, start=start)
        assert result.initial_point is start
        assert result.solution is not None

    def test_restart_does_not_raise_penalized_objective(self):
        """Test that restarting from the polished solution is a fixed point."""
        inst = random_instance(n=8, seed=6, card=3)
        cfg = SolverConfig()
        start = run_dca(inst, cfg).solution.point
        before = penalized_objective(inst, cfg.theta, start)
        restart = run_dca(inst, cfg, start=start)
        assert restart.initial_point is start
        first_phase = [r.F for r in restart.trace if r.theta == cfg.theta]
        assert all(F <= before + 1e-9 for F in first_phase)
        assert restart.solution is not None

    def test_iterates_relaxed_feasible(self):
        """Test every recorded iterate against the relaxed constraints."""
        inst = random_instance(n=8, seed=7, card=3)
        cfg = SolverConfig()
        result = run_dca(inst, cfg)
        assert result.trace
        for record in result.trace:
            report = check_feasibility(inst, record.point,
                                       tol=10.0 * cfg.qp.tol)
            assert report.feasible, (record.k, report.max_violation)

    def test_rising_step_rejected(self, mocker):
        """Test that a step raising F ends the run at the current point."""
        inst = two_asset_instance()
        start = Point(x=[1.0, 0.0], x_b=[1.0, 0.0], x_s=[0.0, 0.0],
                      z=[1.0, 0.0])
        worse = Point(x=[0.0, 1.0], x_b=[0.0, 1.0], x_s=[0.0, 0.0],
                      z=[0.0, 1.0])
        mocker.patch('dcaport.dca.solver.Point.from_stacked',
                     return_value=worse)
        result = run_dca(inst, start=start)
        assert result.trace == ()
        assert result.final_point is start
        assert result.termination is TerminationReason.STEP_TOLERANCE
        assert result.solution.support == (0,)

    def test_infeasible_return(self):
        """Test that an unreachable return is rejected up front."""
        with pytest.raises(ValidationError):
            run_dca(two_asset_instance(R=0.5))

    def test_infeasible_relaxation(self):
        """Test a return that passes validation but not the costs."""
        inst = two_asset_instance(R=0.09).with_changes(
            c_b=np.full(2, 0.05))
        with pytest.raises(InfeasibleError):
            run_dca(inst)

    def test_no_escalation(self):
        """Test the fixed-theta mode."""
        inst = random_instance(n=6, seed=2, card=2)
        result = run_dca(inst, SolverConfig(theta_escalation=False))
        assert result.escalations == 0
        assert all(r.theta == 2.0 for r in result.trace)
