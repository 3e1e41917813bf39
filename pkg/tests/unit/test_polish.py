"""Unit tests for support repair and polishing."""

import numpy as np
import pytest

from dcaport.dca.polish import (
    candidate_supports,
    rank_indices,
    repair_and_polish,
    snap_holdings,
    solve_restricted,
)
from dcaport.dca.subproblem import build_restricted
from dcaport.exact.enumeration import enumerate_supports
from dcaport.model.feasibility import check_feasibility
from dcaport.model.instance import Point, objective
from dcaport.qp.admm import solve_qp
from dcaport.qp.problem import KktResiduals, QpSolution, QpStatus
from dcaport.utils.exceptions import DimensionError, InfeasibleError, QpError
from tests.instances import (
    diagonal_instance,
    random_instance,
    two_asset_instance,
)


def stalled_solution(size: int, n_eq: int) -> QpSolution:
    """A restricted solve that ran out of iterations."""
    return QpSolution(
        y=np.zeros(size), eq_duals=np.zeros(n_eq), in_duals=np.zeros(1),
        bound_duals=np.zeros(size), status=QpStatus.ITERATION_LIMIT,
        residuals=KktResiduals(1e-3, 1e-3, 1e-3), iterations=50000)


class TestRanking:
    """Test cases for the support ranking."""

    def test_rank_by_z_then_x_then_index(self):
        """Test every tie-breaking level."""
        z = np.array([0.5, 1.0, 0.5, 0.5])
        x = np.array([0.1, 0.0, 0.3, 0.1])
        assert rank_indices(z, x) == [1, 2, 0, 3]

    def test_candidate_supports(self):
        """Test that attempts replace only the last kept asset."""
        inst = diagonal_instance([1.0, 2.0, 3.0, 4.0], card=2)
        p = Point(x=[0.4, 0.3, 0.2, 0.1], x_b=[0.4, 0.3, 0.2, 0.1],
                  x_s=[0, 0, 0, 0], z=[0.9, 0.1, 0.6, 0.4])
        assert candidate_supports(inst, p) == [(0, 2), (0, 3), (0, 1)]

    def test_candidate_supports_le_mode(self):
        """Test the target size in at-most mode."""
        inst = diagonal_instance([1.0, 2.0, 3.0], card=3).with_changes(
            card_mode='le')
        p = Point(x=[0.9, 0.1, 0.0], x_b=[0.9, 0.1, 0.0], x_s=[0, 0, 0],
                  z=[1.0, 0.2, 0.0])
        assert candidate_supports(inst, p)[0] == (0,)


class TestRestricted:
    """Test cases for fixed-support solves."""

    def setup_method(self):
        """Set up test fixtures."""
        self.inst = diagonal_instance([1.0, 2.0, 3.0], card=2)

    def test_two_asset_support(self):
        """Test minimum-variance weights on a fixed pair."""
        solution = solve_restricted(self.inst, [1, 0])
        assert solution is not None
        assert solution.support == (0, 1)
        # weights proportional to inverse variances
        assert np.allclose(solution.x, [2.0 / 3.0, 1.0 / 3.0, 0.0],
                           atol=1e-7)
        assert solution.objective == pytest.approx(2.0 / 3.0, abs=1e-7)
        assert solution.feasibility.feasible
        assert np.array_equal(solution.z, [1.0, 1.0, 0.0])

    def test_budget_prefilter(self):
        """Test that supports unable to meet the budget are skipped."""
        inst = self.inst.with_changes(b=np.array([0.4, 0.4, 1.0]))
        assert solve_restricted(inst, [0, 1]) is None

    def test_cost_free_single_asset(self):
        """Test a one-asset support when trades cost nothing."""
        solution = solve_restricted(two_asset_instance(), [0])
        assert solution is not None
        assert np.array_equal(solution.x, [1.0, 0.0])
        assert np.array_equal(solution.x_s, [0.0, 0.0])
        assert solution.objective == pytest.approx(1.0, abs=1e-12)

    def test_exactly_feasible(self):
        """Test that restricted solutions pass a zero-tolerance check."""
        inst = random_instance(n=7, seed=5, card=3)
        for support in ((0, 1, 2), (2, 4, 6), (1, 3, 5)):
            solution = solve_restricted(inst, support)
            if solution is None:
                continue
            report = check_feasibility(inst, solution.point, tol=0.0,
                                       binary_mode=True)
            assert report.feasible, report.max_violation

    def test_iteration_limit_raises(self, mocker):
        """Test that a stalled solve is an error, not an empty support."""
        solve = mocker.patch('dcaport.dca.polish.solve_qp',
                             return_value=stalled_solution(6, 3))
        with pytest.raises(QpError):
            solve_restricted(self.inst, [0, 1])
        assert solve.call_count == 2

    def test_iteration_limit_retry(self, mocker):
        """Test the looser warm-started retry after a stalled solve."""
        recovered = solve_qp(build_restricted(self.inst, (0, 1)))
        solve = mocker.patch('dcaport.dca.polish.solve_qp',
                             side_effect=[stalled_solution(6, 3), recovered])
        solution = solve_restricted(self.inst, [0, 1])
        assert solution is not None
        assert solution.support == (0, 1)
        retry = solve.call_args_list[1]
        assert retry.kwargs['tol'] == pytest.approx(1e-6)
        assert retry.kwargs['warm_start'] is not None

    def test_snap_holdings(self):
        """Test that round-off in the weights is removed."""
        x = np.array([2.0 / 3.0 + 3e-12, 1.0 / 3.0 + 1e-12, 1e-13])
        out = snap_holdings(self.inst, (0, 1), x)
        assert float(out.sum()) == 1.0
        assert out[2] == 0.0
        assert np.allclose(out, [2.0 / 3.0, 1.0 / 3.0, 0.0], atol=1e-11)

    def test_cache(self):
        """Test memoization of restricted solves."""
        cache = {}
        first = solve_restricted(self.inst, [0, 2], cache=cache)
        assert (0, 2) in cache
        assert solve_restricted(self.inst, [2, 0], cache=cache) is first

    def test_out_of_range(self):
        """Test index validation."""
        with pytest.raises(DimensionError):
            solve_restricted(self.inst, [0, 3])


class TestRepairAndPolish:
    """Test cases for repair_and_polish."""

    def test_first_support(self):
        """Test that the best-ranked support is used when feasible."""
        inst = two_asset_instance()
        p = Point(x=[0.8, 0.2], x_b=[0.8, 0.2], x_s=[0, 0], z=[0.8, 0.2])
        solution = repair_and_polish(inst, p)
        assert solution.support == (0,)
        assert solution.objective == pytest.approx(1.0, abs=1e-8)

    def test_fallback_support(self):
        """Test moving on when the first support is infeasible."""
        inst = two_asset_instance().with_changes(b=np.array([0.5, 1.0]))
        p = Point(x=[0.8, 0.2], x_b=[0.8, 0.2], x_s=[0, 0], z=[0.8, 0.2])
        solution = repair_and_polish(inst, p)
        assert solution.support == (1,)
        assert solution.objective == pytest.approx(4.0, abs=1e-7)

    def test_not_worse_than_binary_point(self):
        """Test that polishing a feasible 0/1 point never raises the risk."""
        inst = diagonal_instance([1.0, 2.0, 3.0], card=2)
        p = Point(x=[0.5, 0.5, 0.0], x_b=[0.5, 0.5, 0.0], x_s=[0, 0, 0],
                  z=[1.0, 1.0, 0.0])
        assert check_feasibility(inst, p, binary_mode=True).feasible
        solution = repair_and_polish(inst, p)
        assert solution.support == (0, 1)
        assert solution.objective <= objective(inst, p.x) + 1e-8
        assert solution.objective == pytest.approx(2.0 / 3.0, abs=1e-7)

    def test_not_worse_than_enumerated_optimum(self):
        """Test re-polishing the exact optimum on a random instance."""
        inst = random_instance(n=6, seed=2, card=2)
        best = enumerate_supports(inst).solution
        solution = repair_and_polish(inst, best.point)
        assert solution.support == best.support
        assert solution.objective <= best.objective + 1e-8

    def test_all_supports_infeasible(self):
        """Test the error when nothing can be certified."""
        inst = two_asset_instance().with_changes(R=0.2)
        p = Point(x=[0.8, 0.2], x_b=[0.8, 0.2], x_s=[0, 0], z=[0.8, 0.2])
        with pytest.raises(InfeasibleError):
            repair_and_polish(inst, p)

    def test_dimension_mismatch(self):
        """Test rejection of a point of the wrong size."""
        with pytest.raises(DimensionError):
            repair_and_polish(two_asset_instance(),
                              Point(x=[1], x_b=[1], x_s=[0], z=[1]))
