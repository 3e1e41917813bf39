"""
Convex subproblem assembly.

Each DCA step minimizes the tracking risk minus a linear term in z over
the relaxed feasible set. The stacked variable is ``y = (x, x_b, x_s, z)``
of length 4n.
"""

from typing import Optional, Tuple

import numpy as np

from dcaport.model.instance import Instance, Point
from dcaport.qp.admm import solve_qp
from dcaport.qp.problem import (
    QpProblem,
    QpSettings,
    QpSolution,
    QpStatus,
    QpWarmStart,
)
from dcaport.utils.exceptions import DimensionError, InfeasibleError, QpError
from dcaport.utils.logger import get_logger

logger = get_logger()


def trade_caps(inst: Instance) -> Tuple[np.ndarray, np.ndarray]:
    """
    Upper bounds on purchases and sales.

    Canonical trades never exceed ``max(b - P, 0)`` bought or ``P`` sold,
    and costs are nonnegative, so the caps cut off no optimal point. They
    keep the trade block bounded when costs are zero.
    """
    return np.maximum(inst.b - inst.P, 0.0), np.array(inst.P, dtype=float)


def build_subproblem(inst: Instance, v,
                     z_lower: Optional[np.ndarray] = None,
                     z_upper: Optional[np.ndarray] = None) -> QpProblem:
    """
    Assemble the convex QP minimized by one DCA step.

    The objective is ``x^t Q x - 2 (Q x_bar)^t x - v^t z``, which equals the
    tracking risk minus ``<v, z>`` up to the constant ``x_bar^t Q x_bar``.

    Args:
        inst: Problem instance
        v: Linear weight on z (the subgradient of the concave part)
        z_lower: Optional lower bounds on z, default 0
        z_upper: Optional upper bounds on z, default 1

    Returns:
        QpProblem: Problem over 4n variables

    Raises:
        DimensionError: If v or the z bounds have the wrong length
    """
    n = inst.n
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.shape[0] != n:
        raise DimensionError(f"v must have length {n}, got {v.shape[0]}")
    I = np.eye(n)
    O = np.zeros((n, n))
    zeros = np.zeros(n)
    ones = np.ones(n)

    P = np.zeros((4 * n, 4 * n))
    P[:n, :n] = 2.0 * inst.Q
    q = np.concatenate([-2.0 * inst.Q @ inst.x_bar, zeros, zeros, -v])

    budget = np.concatenate([ones, zeros, zeros, zeros])
    cardinality = np.concatenate([zeros, zeros, zeros, ones])
    balance = np.hstack([I, -I, I, O])

    eq_rows = [budget[None, :]]
    eq_rhs = [np.array([1.0])]
    in_rows = []
    in_rhs = []
    if inst.card_mode == 'eq':
        eq_rows.append(cardinality[None, :])
        eq_rhs.append(np.array([float(inst.card)]))
    eq_rows.append(balance)
    eq_rhs.append(inst.P)

    ret = np.concatenate([-inst.r, inst.c_b, inst.c_s, zeros])
    in_rows.append(ret[None, :])
    in_rhs.append(np.array([-inst.R - inst.x_bar @ inst.r]))
    in_rows.append(np.hstack([I, O, O, -np.diag(inst.b)]))
    in_rhs.append(zeros)
    in_rows.append(np.hstack([-I, O, O, np.diag(inst.a)]))
    in_rhs.append(zeros)
    if inst.card_mode == 'le':
        in_rows.append(cardinality[None, :])
        in_rhs.append(np.array([float(inst.card)]))

    z_lo = zeros if z_lower is None else np.asarray(z_lower, dtype=float)
    z_up = ones if z_upper is None else np.asarray(z_upper, dtype=float)
    if z_lo.shape != (n,) or z_up.shape != (n,):
        raise DimensionError(f"z bounds must have length {n}")

    buy_cap, sell_cap = trade_caps(inst)
    lower = np.concatenate([zeros, zeros, zeros, z_lo])
    upper = np.concatenate([np.full(n, np.inf), buy_cap, sell_cap, z_up])

    return QpProblem(P=P, q=q,
                     A_eq=np.vstack(eq_rows), b_eq=np.concatenate(eq_rhs),
                     A_in=np.vstack(in_rows), h_in=np.concatenate(in_rhs),
                     lower=lower, upper=upper)


def build_restricted(inst: Instance, support) -> QpProblem:
    """
    Assemble the convex QP over the assets of one support.

    The variable is ``(x_S, x_b_S, x_s_S)`` of length ``3k``. Assets off
    the support hold nothing and sell their whole position, so their sale
    costs enter the return row as a constant.

    Args:
        inst: Problem instance
        support: Sorted asset indices

    Returns:
        QpProblem: Problem over 3k variables
    """
    idx = np.asarray(support, dtype=int)
    k = idx.size
    I = np.eye(k)
    O = np.zeros((k, k))
    zeros = np.zeros(k)

    P = np.zeros((3 * k, 3 * k))
    P[:k, :k] = 2.0 * inst.Q[np.ix_(idx, idx)]
    q = np.concatenate([(-2.0 * inst.Q @ inst.x_bar)[idx], zeros, zeros])

    A_eq = np.vstack([
        np.concatenate([np.ones(k), zeros, zeros])[None, :],
        np.hstack([I, -I, I]),
    ])
    b_eq = np.concatenate([[1.0], inst.P[idx]])

    off = np.ones(inst.n, dtype=bool)
    off[idx] = False
    liquidation = float(inst.c_s[off] @ inst.P[off])
    A_in = np.concatenate([-inst.r[idx], inst.c_b[idx], inst.c_s[idx]])
    h_in = np.array([-inst.R - inst.x_bar @ inst.r - liquidation])

    a, b, held = inst.a[idx], inst.b[idx], inst.P[idx]
    lower = np.concatenate([a, zeros, zeros])
    upper = np.concatenate([b, np.maximum(b - held, 0.0),
                            np.maximum(held - a, 0.0)])

    return QpProblem(P=P, q=q, A_eq=A_eq, b_eq=b_eq,
                     A_in=A_in[None, :], h_in=h_in,
                     lower=lower, upper=upper)


def usable(sol: QpSolution, tol: float) -> bool:
    """
    Whether a subproblem result can serve as the next iterate.

    Iteration-limit results are accepted when they are primal feasible
    within ``tol``.
    """
    if sol.status is QpStatus.OPTIMAL:
        return True
    return (sol.status is QpStatus.ITERATION_LIMIT
            and sol.residuals.primal <= tol)


def solve_relaxation(inst: Instance, settings: Optional[QpSettings] = None,
                     warm_start: Optional[QpWarmStart] = None
                     ) -> Tuple[Point, QpSolution]:
    """
    Solve the continuous relaxation (z in [0, 1]^n, no linear term).

    Args:
        inst: Problem instance
        settings: QP settings

    Returns:
        Tuple[Point, QpSolution]: Relaxed point with canonical trades and
        the raw QP result

    Raises:
        InfeasibleError: If the relaxation, hence the model, is infeasible
        QpError: If the solver neither converges nor proves infeasibility
    """
    settings = settings or QpSettings()
    sol = solve_qp(build_subproblem(inst, np.zeros(inst.n)),
                   settings=settings, warm_start=warm_start)
    if sol.status is QpStatus.INFEASIBLE:
        raise InfeasibleError(
            f"continuous relaxation is infeasible ({sol.certificate})"
        )
    if not usable(sol, 10.0 * settings.tol):
        raise QpError(
            f"continuous relaxation did not converge: residual "
            f"{sol.residuals.worst:.3e} after {sol.iterations} iterations"
        )
    if sol.status is not QpStatus.OPTIMAL:
        logger.warning(
            f"Relaxation accepted at iteration limit with residual "
            f"{sol.residuals.worst:.3e}"
        )
    return Point.from_stacked(sol.y, inst.n, holdings=inst.P), sol
