"""Unit tests for the QP model and the ADMM solver."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from dcaport.qp.admm import solve_qp
from dcaport.qp.phase_one import incompatible_bounds, phase_one_feasible
from dcaport.qp.problem import (
    KktResiduals,
    QpProblem,
    QpSettings,
    QpStatus,
    QpWarmStart,
    dump_qp_problem,
    inf_norm,
    kkt_residuals,
    load_qp_problem,
)
from dcaport.utils.config import Config
from dcaport.utils.exceptions import (
    ConfigurationError,
    DimensionError,
    QpInvariantError,
)


def simplex_projection() -> QpProblem:
    """Project (0.8, 0.3, -0.1) onto the unit simplex."""
    return QpProblem(P=np.eye(3), q=np.array([-0.8, -0.3, 0.1]),
                     A_eq=np.ones((1, 3)), b_eq=np.array([1.0]),
                     lower=np.zeros(3))


class TestQpProblem:
    """Test cases for problem construction and KKT residuals."""

    def test_missing_blocks_default_to_empty(self):
        """Test normalization of absent constraint blocks."""
        p = QpProblem(P=np.eye(2), q=np.zeros(2))
        assert p.size == 2
        assert p.n_eq == 0
        assert p.n_in == 0
        assert np.all(np.isinf(p.lower))
        assert not p.P.flags.writeable

    def test_invariants(self):
        """Test rejection of malformed problems."""
        with pytest.raises(QpInvariantError):
            QpProblem(P=np.eye(3), q=np.zeros(2))
        with pytest.raises(QpInvariantError):
            QpProblem(P=np.array([[1.0, 1.0], [0.0, 1.0]]), q=np.zeros(2))
        with pytest.raises(QpInvariantError):
            QpProblem(P=np.eye(2), q=np.array([np.nan, 0.0]))
        with pytest.raises(QpInvariantError):
            QpProblem(P=np.eye(1), q=np.zeros(1), lower=[1.0], upper=[0.0])
        with pytest.raises(QpInvariantError):
            QpProblem(P=np.eye(2), q=np.zeros(2), A_eq=np.ones((1, 3)),
                      b_eq=[1.0])

    def test_objective_and_scaling(self):
        """Test objective evaluation and objective scaling."""
        p = simplex_projection()
        y = np.array([0.75, 0.25, 0.0])
        assert p.objective(y) == pytest.approx(
            0.5 * (0.75 ** 2 + 0.25 ** 2) - 0.8 * 0.75 - 0.3 * 0.25)
        assert p.scaled(4.0).objective(y) == pytest.approx(
            4.0 * p.objective(y))

    def test_kkt_residuals_at_optimum(self):
        """Test that the analytic primal-dual pair has zero residuals."""
        p = simplex_projection()
        y = np.array([0.75, 0.25, 0.0])
        lam = np.array([0.05])
        # stationarity y + q + lam + nu = 0 on the active lower bound
        nu = np.array([0.0, 0.0, -0.15])
        res = kkt_residuals(p, y, lam, np.zeros(0), nu)
        assert res.worst == pytest.approx(0.0, abs=1e-15)

    def test_kkt_residuals_detect_violations(self):
        """Test primal and sign violations."""
        p = simplex_projection()
        res = kkt_residuals(p, np.array([1.0, 0.5, 0.0]), np.zeros(1),
                            np.zeros(0), np.zeros(3))
        assert res.primal == pytest.approx(0.5)
        # a positive multiplier on an infinite upper bound is a sign error
        res = kkt_residuals(p, np.array([0.75, 0.25, 0.0]), np.array([0.05]),
                            np.zeros(0), np.array([0.0, 0.0, 0.15]))
        assert res.dual >= 0.15

    def test_kkt_residuals_dimension_check(self):
        """Test rejection of wrong multiplier lengths."""
        with pytest.raises(DimensionError):
            kkt_residuals(simplex_projection(), np.zeros(3), np.zeros(2),
                          np.zeros(0), np.zeros(3))

    def test_residuals_helpers(self):
        """Test worst and within."""
        res = KktResiduals(primal=1e-9, dual=3e-9, complementarity=0.0)
        assert res.worst == 3e-9
        assert res.within(1e-8)
        assert not res.within(1e-9)
        assert inf_norm(np.zeros(0)) == 0.0

    def test_warm_start_matches(self):
        """Test warm start size checks."""
        p = simplex_projection()
        assert QpWarmStart(y=np.zeros(3)).matches(p)
        assert not QpWarmStart(y=np.zeros(2)).matches(p)
        assert not QpWarmStart(y=np.zeros(3),
                               eq_duals=np.zeros(2)).matches(p)


class TestQpSettings:
    """Test cases for solver settings."""

    def test_defaults(self):
        """Test default values."""
        s = QpSettings()
        assert s.tol == 1e-8
        assert s.alpha == 1.6
        assert s.polish

    def test_validation(self):
        """Test rejection of invalid settings."""
        with pytest.raises(ConfigurationError):
            QpSettings(tol=0.0)
        with pytest.raises(ConfigurationError):
            QpSettings(alpha=2.0)
        with pytest.raises(ConfigurationError):
            QpSettings(max_iter=0)
        with pytest.raises(ConfigurationError):
            QpSettings(rho=-1.0)

    def test_from_config(self):
        """Test reading the qp section."""
        config = Config()
        config.set('qp.tol', 1e-6)
        config.set('qp.unknown_key', 3)
        s = QpSettings.from_config(config)
        assert s.tol == 1e-6
        assert s.max_iter == 50000


class TestAdmm:
    """Test cases for solve_qp."""

    def test_simplex_projection(self):
        """Test a small problem with an active bound."""
        sol = solve_qp(simplex_projection())
        assert sol.status is QpStatus.OPTIMAL
        assert sol.is_optimal
        assert np.allclose(sol.y, [0.75, 0.25, 0.0], atol=1e-7)
        assert sol.residuals.within(1e-8)
        assert sol.bound_duals[2] < 0.0

    def test_box_constrained_scalar(self):
        """Test y^2 on [1, 2]."""
        p = QpProblem(P=np.array([[2.0]]), q=np.zeros(1),
                      lower=np.array([1.0]), upper=np.array([2.0]))
        sol = solve_qp(p)
        assert sol.status is QpStatus.OPTIMAL
        assert sol.y[0] == pytest.approx(1.0, abs=1e-7)
        assert sol.objective == pytest.approx(1.0, abs=1e-6)

    def test_inequality_rows(self):
        """Test a problem whose optimum sits on an inequality row."""
        # min (y1 - 1)^2 + (y2 - 1)^2 s.t. y1 + y2 <= 1
        p = QpProblem(P=2.0 * np.eye(2), q=np.array([-2.0, -2.0]),
                      A_in=np.ones((1, 2)), h_in=np.array([1.0]))
        sol = solve_qp(p)
        assert sol.status is QpStatus.OPTIMAL
        assert np.allclose(sol.y, [0.5, 0.5], atol=1e-7)
        assert sol.in_duals[0] == pytest.approx(1.0, abs=1e-6)

    def test_linear_program(self):
        """Test a problem with a zero Hessian."""
        p = QpProblem(P=np.zeros((2, 2)), q=np.array([1.0, 2.0]),
                      A_eq=np.ones((1, 2)), b_eq=np.array([1.0]),
                      lower=np.zeros(2))
        sol = solve_qp(p)
        assert sol.status is QpStatus.OPTIMAL
        assert np.allclose(sol.y, [1.0, 0.0], atol=1e-7)

    def test_incompatible_bounds(self):
        """Test an equality row that cannot hold inside the box."""
        p = QpProblem(P=np.eye(2), q=np.zeros(2), A_eq=np.ones((1, 2)),
                      b_eq=np.array([3.0]), lower=np.zeros(2),
                      upper=np.ones(2))
        assert incompatible_bounds(p) is not None
        sol = solve_qp(p)
        assert sol.status is QpStatus.INFEASIBLE
        assert sol.certificate
        assert sol.iterations == 0

    def test_contradictory_equalities(self):
        """Test infeasibility detection without a box certificate."""
        p = QpProblem(P=np.eye(1), q=np.zeros(1),
                      A_eq=np.array([[1.0], [1.0]]),
                      b_eq=np.array([0.0, 1.0]))
        assert incompatible_bounds(p) is None
        assert phase_one_feasible(p) is False
        sol = solve_qp(p, max_iter=2000)
        assert sol.status is QpStatus.INFEASIBLE
        assert 'infeasible' in sol.certificate

    def test_iteration_limit(self):
        """Test that an unconverged solve is not reported optimal."""
        settings = QpSettings(polish=False, check_interval=1)
        sol = solve_qp(simplex_projection(), tol=1e-14, max_iter=3,
                       settings=settings)
        assert sol.status is QpStatus.ITERATION_LIMIT
        assert sol.iterations == 3

    def test_scaling_invariance(self):
        """Test that scaling the objective leaves the minimizer unchanged."""
        base = solve_qp(simplex_projection())
        scaled = solve_qp(simplex_projection().scaled(1e3))
        assert scaled.status is QpStatus.OPTIMAL
        assert np.allclose(base.y, scaled.y, atol=1e-6)

    def test_warm_start(self):
        """Test that a converged warm start is accepted immediately."""
        p = simplex_projection()
        first = solve_qp(p)
        second = solve_qp(p, warm_start=QpWarmStart.from_solution(first))
        assert second.status is QpStatus.OPTIMAL
        assert second.iterations <= first.iterations
        assert np.allclose(second.y, first.y, atol=1e-7)

    def test_zero_problem(self):
        """Test an empty problem."""
        p = QpProblem(P=np.zeros((0, 0)), q=np.zeros(0))
        sol = solve_qp(p)
        assert sol.status is QpStatus.OPTIMAL
        assert sol.residuals.worst == 0.0
        assert sol.y.shape == (0,)


class TestQpDump:
    """Test cases for QP dumps."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_dump_and_load(self):
        """Test that a dumped problem reloads with identical data."""
        p = simplex_projection()
        path = dump_qp_problem(p, Path(self.temp_dir) / "p.yaml")
        back = load_qp_problem(path)
        assert np.array_equal(back.P, p.P)
        assert np.array_equal(back.q, p.q)
        assert np.array_equal(back.A_eq, p.A_eq)
        assert np.array_equal(back.lower, p.lower)
        assert np.all(np.isinf(back.upper))
        assert back.n_in == 0
