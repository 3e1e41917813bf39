"""
Feasibility checks that back the ADMM infeasibility verdicts.

Two independent tests are available: interval arithmetic over the box
bounds, which catches rows that no point of the box can satisfy, and a
phase-one linear program solved with HiGHS.
"""

from typing import Optional

import numpy as np
from scipy.optimize import linprog

from dcaport.qp.problem import QpProblem
from dcaport.utils.logger import get_logger

logger = get_logger()

INTERVAL_TOL = 1e-9


def _row_range(row: np.ndarray, lower: np.ndarray,
               upper: np.ndarray) -> tuple:
    """Range of ``row @ y`` over the box, with infinite ends allowed."""
    pos = row > 0
    neg = row < 0
    with np.errstate(invalid='ignore'):
        lo = np.sum(row[pos] * lower[pos]) + np.sum(row[neg] * upper[neg])
        hi = np.sum(row[pos] * upper[pos]) + np.sum(row[neg] * lower[neg])
    return float(lo), float(hi)


def incompatible_bounds(p: QpProblem) -> Optional[str]:
    """
    Look for a constraint row that cannot hold anywhere inside the box.

    Args:
        p: Problem to inspect

    Returns:
        Optional[str]: Certificate text, or None when nothing was found
    """
    for i in range(p.n_eq):
        lo, hi = _row_range(p.A_eq[i], p.lower, p.upper)
        slack = INTERVAL_TOL * (1.0 + abs(p.b_eq[i]))
        if lo > p.b_eq[i] + slack or hi < p.b_eq[i] - slack:
            return (f"equality row {i} ranges over [{lo:.6g}, {hi:.6g}] "
                    f"and cannot equal {p.b_eq[i]:.6g}")
    for i in range(p.n_in):
        lo, _ = _row_range(p.A_in[i], p.lower, p.upper)
        slack = INTERVAL_TOL * (1.0 + abs(p.h_in[i]))
        if lo > p.h_in[i] + slack:
            return (f"inequality row {i} is at least {lo:.6g} "
                    f"on the box but must be <= {p.h_in[i]:.6g}")
    return None


def phase_one_feasible(p: QpProblem) -> Optional[bool]:
    """
    Decide feasibility of the constraint set with a zero-objective LP.

    Args:
        p: Problem whose constraints are tested

    Returns:
        Optional[bool]: True if feasible, False if proven infeasible,
        None if the LP solver gave no verdict
    """
    if p.size == 0:
        return True
    bounds = [
        (None if not np.isfinite(lo) else float(lo),
         None if not np.isfinite(hi) else float(hi))
        for lo, hi in zip(p.lower, p.upper)
    ]
    try:
        res = linprog(
            c=np.zeros(p.size),
            A_ub=p.A_in if p.n_in else None,
            b_ub=p.h_in if p.n_in else None,
            A_eq=p.A_eq if p.n_eq else None,
            b_eq=p.b_eq if p.n_eq else None,
            bounds=bounds,
            method='highs',
        )
    except ValueError as e:
        logger.warning(f"Phase-one LP rejected the problem: {e}")
        return None

    logger.debug(f"Phase-one LP status {res.status}: {res.message}")
    if res.status == 0:
        return True
    if res.status == 2:
        return False
    return None
