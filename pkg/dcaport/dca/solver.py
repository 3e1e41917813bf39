"""
DCA driver.

Alternates the penalty subgradient with convex subproblem solves until the
step between iterates falls below ``epsilon``, escalates the penalty
weight while z stays fractional, then polishes the final point. A step
that would raise the penalized objective is not taken.
"""

import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from dcaport.dca.penalty import penalized_objective, penalty_alpha, subgradient_h
from dcaport.dca.polish import Solution, repair_and_polish, solve_restricted
from dcaport.dca.subproblem import build_subproblem, solve_relaxation, usable
from dcaport.dca.trace import TraceRecord
from dcaport.model.feasibility import check_feasibility
from dcaport.model.instance import Instance, Point, objective, validate_instance
from dcaport.qp.admm import solve_qp
from dcaport.qp.problem import QpSettings, QpStatus, QpWarmStart
from dcaport.utils.config import Config
from dcaport.utils.exceptions import ConfigurationError, InfeasibleError
from dcaport.utils.logger import get_logger

logger = get_logger()

ITERATE_TOL_FACTOR = 10.0


@dataclass
class SolverConfig:
    """
    DCA settings.

    Attributes:
        theta: Initial penalty weight
        epsilon: Stopping tolerance on the Euclidean step norm
        max_iter: Iteration cap per penalty weight
        theta_escalation: Raise theta while z is not binary
        escalation_factor: Multiplier per escalation
        theta_cap: Largest theta tried
        binariness_tol: Penalty value below which z counts as binary
        zero_threshold: Relaxed holdings above this start with z = 1
        qp: Settings passed to every subproblem solve
    """

    theta: float = 2.0
    epsilon: float = 1e-6
    max_iter: int = 200
    theta_escalation: bool = True
    escalation_factor: float = 5.0
    theta_cap: float = 1e6
    binariness_tol: float = 1e-6
    zero_threshold: float = 1e-9
    qp: QpSettings = field(default_factory=QpSettings)

    def __post_init__(self):
        if self.theta <= 0:
            raise ConfigurationError(f"theta must be positive: {self.theta}")
        if self.epsilon <= 0:
            raise ConfigurationError(
                f"epsilon must be positive: {self.epsilon}"
            )
        if self.max_iter < 1:
            raise ConfigurationError(
                f"max_iter must be positive: {self.max_iter}"
            )
        if self.escalation_factor <= 1:
            raise ConfigurationError(
                f"escalation_factor must exceed 1: {self.escalation_factor}"
            )
        if self.theta_cap < self.theta:
            raise ConfigurationError("theta_cap must be at least theta")

    @classmethod
    def from_config(cls, config: Config, **overrides) -> 'SolverConfig':
        """
        Build from the ``solver`` and ``qp`` configuration sections.

        Args:
            config: Loaded configuration
            **overrides: Values taking precedence (None entries ignored)

        Returns:
            SolverConfig: Validated settings
        """
        section = dict(config.get('solver', {}) or {})
        section.update({k: v for k, v in overrides.items() if v is not None})
        known = {k: v for k, v in section.items()
                 if k in cls.__dataclass_fields__ and k != 'qp'}
        return cls(qp=QpSettings.from_config(config), **known)


class TerminationReason(Enum):
    """Why the DCA loop stopped."""

    STEP_TOLERANCE = 'step-tolerance'
    MAX_ITER = 'max-iter'
    SUBPROBLEM_INFEASIBLE = 'subproblem-infeasible'


@dataclass(frozen=True, eq=False)
class DcaResult:
    """
    Outcome of ``run_dca``.

    ``trace`` starts with the first subproblem solution; the starting
    point is kept separately as ``initial_point``.
    """

    trace: Tuple[TraceRecord, ...]
    final_point: Point
    solution: Optional[Solution]
    iterations: int
    termination: TerminationReason
    theta: float
    initial_point: Point
    escalations: int = 0
    seconds: float = 0.0

    @property
    def objective(self) -> float:
        """Objective of the polished solution, NaN without one."""
        return self.solution.objective if self.solution else float('nan')


def initial_point(inst: Instance, settings: Optional[QpSettings] = None,
                  zero_threshold: float = 1e-9) -> Point:
    """
    Start from the continuous relaxation rounded up to a 0/1 pattern.

    ``z_j = 1`` wherever the relaxed holding exceeds ``zero_threshold``.
    The count of ones may differ from ``card``.

    Raises:
        InfeasibleError: If the relaxation is infeasible
    """
    relaxed, _ = solve_relaxation(inst, settings)
    z = (relaxed.x > zero_threshold).astype(float)
    return Point(x=relaxed.x, x_b=relaxed.x_b, x_s=relaxed.x_s, z=z)


def _full_support(inst: Instance, cfg: SolverConfig,
                  start: float) -> DcaResult:
    """card == n: every z is one and a single convex solve suffices."""
    solution = solve_restricted(inst, range(inst.n), cfg.qp)
    if solution is None:
        raise InfeasibleError("holding every asset is infeasible")
    point = solution.point
    record = TraceRecord(k=1, point=point, theta=cfg.theta,
                         F=solution.objective,
                         objective=solution.objective, alpha=0.0,
                         step_norm=0.0,
                         solve_seconds=time.perf_counter() - start,
                         qp_iterations=0)
    return DcaResult(trace=(record,), final_point=point, solution=solution,
                     iterations=1,
                     termination=TerminationReason.STEP_TOLERANCE,
                     theta=cfg.theta, initial_point=point,
                     seconds=time.perf_counter() - start)


def run_dca(inst: Instance, cfg: Optional[SolverConfig] = None,
            start: Optional[Point] = None) -> DcaResult:
    """
    Run DCA with penalty escalation and polish the result.

    Args:
        inst: Validated problem instance
        cfg: Solver settings
        start: Optional starting point replacing the relaxation start

    Returns:
        DcaResult: Trace, final point and polished solution

    Raises:
        ValidationError: If the instance is not usable
        InfeasibleError: If the relaxation is infeasible
        QpError: If a polishing solve neither converges nor proves
            infeasibility
    """
    cfg = cfg or SolverConfig()
    validate_instance(inst).raise_if_invalid()
    t0 = time.perf_counter()
    n = inst.n

    if inst.card_mode == 'eq' and inst.card == n and start is None:
        logger.info("card equals n; solving the full-support problem")
        return _full_support(inst, cfg, t0)

    point = start if start is not None else initial_point(
        inst, cfg.qp, cfg.zero_threshold)
    first = point
    theta = cfg.theta
    feasible_tol = ITERATE_TOL_FACTOR * cfg.qp.tol
    # F at the current point, once that point is known to be feasible
    reference: Optional[float] = None
    if start is not None and check_feasibility(inst, start,
                                               tol=feasible_tol).feasible:
        reference = penalized_objective(inst, theta, start)
    trace = []
    warm: Optional[QpWarmStart] = None
    escalations = 0
    total = 0
    logger.info(f"DCA start: n={n}, card={inst.card}, theta={theta:g}")

    while True:
        reason = TerminationReason.MAX_ITER
        for _ in range(cfg.max_iter):
            v = subgradient_h(theta, point.z)
            tic = time.perf_counter()
            sol = solve_qp(build_subproblem(inst, v), settings=cfg.qp,
                           warm_start=warm)
            elapsed = time.perf_counter() - tic
            if not usable(sol, 10.0 * cfg.qp.tol):
                logger.warning(
                    f"Subproblem {total + 1} failed: {sol.status.value}"
                    + (f" ({sol.certificate})" if sol.certificate else "")
                )
                reason = TerminationReason.SUBPROBLEM_INFEASIBLE
                break
            if sol.status is QpStatus.ITERATION_LIMIT:
                logger.warning(f"Subproblem {total + 1} accepted at the "
                               f"iteration limit")

            new = Point.from_stacked(sol.y, n, holdings=inst.P)
            report = check_feasibility(inst, new, tol=feasible_tol)
            if not report.feasible:
                logger.warning(
                    f"Subproblem {total + 1} result violates the relaxed "
                    f"constraints by {report.max_violation:.3e}"
                )
                reason = TerminationReason.SUBPROBLEM_INFEASIBLE
                break
            F_new = penalized_objective(inst, theta, new)
            if reference is not None and F_new > reference:
                logger.debug(f"Step rejected: F would rise from "
                             f"{reference:.12g} to {F_new:.12g}")
                reason = TerminationReason.STEP_TOLERANCE
                break
            total += 1
            step = float(np.linalg.norm(new.stacked() - point.stacked()))
            record = TraceRecord(
                k=total, point=new, theta=theta,
                F=F_new,
                objective=objective(inst, new.x),
                alpha=penalty_alpha(new.z), step_norm=step,
                solve_seconds=elapsed, qp_iterations=sol.iterations,
            )
            trace.append(record)
            logger.debug(f"DCA k={total} F={record.F:.10g} "
                         f"alpha={record.alpha:.3e} step={step:.3e}")
            point = new
            reference = F_new
            warm = QpWarmStart(y=new.stacked(), eq_duals=sol.eq_duals,
                               in_duals=sol.in_duals,
                               bound_duals=sol.bound_duals)
            if step <= cfg.epsilon:
                reason = TerminationReason.STEP_TOLERANCE
                break

        if reason is TerminationReason.SUBPROBLEM_INFEASIBLE:
            break
        alpha = penalty_alpha(point.z)
        if (not cfg.theta_escalation or alpha <= cfg.binariness_tol
                or theta >= cfg.theta_cap):
            break
        theta = min(theta * cfg.escalation_factor, cfg.theta_cap)
        if reference is not None:
            reference = penalized_objective(inst, theta, point)
        escalations += 1
        logger.info(f"z not binary (alpha={alpha:.3e}); escalating theta "
                    f"to {theta:g}")

    solution: Optional[Solution] = None
    try:
        solution = repair_and_polish(inst, point, cfg.qp)
    except InfeasibleError as e:
        logger.warning(f"Polishing failed: {e}")

    seconds = time.perf_counter() - t0
    logger.info(
        f"DCA done: {total} iterations, {reason.value}, theta={theta:g}, "
        f"objective={solution.objective if solution else float('nan'):.10g}"
        f", {seconds:.3f}s"
    )
    return DcaResult(trace=tuple(trace), final_point=point,
                     solution=solution, iterations=total,
                     termination=reason, theta=theta, initial_point=first,
                     escalations=escalations, seconds=seconds)
