"""
Support selection and certified re-optimization.

Turns a relaxed DCA point into a binary-feasible portfolio: rank the
assets, fix z to a support and re-solve the convex QP restricted to that
support, falling back to lower-ranked supports while the restricted
problem is infeasible.
"""

from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from dcaport.dca.subproblem import build_restricted
from dcaport.model.feasibility import (
    FeasibilityReport,
    check_feasibility,
    net_return,
)
from dcaport.model.instance import Instance, Point, objective
from dcaport.qp.admm import solve_qp
from dcaport.qp.problem import QpSettings, QpStatus, QpWarmStart
from dcaport.utils.exceptions import DimensionError, InfeasibleError, QpError
from dcaport.utils.logger import get_logger

logger = get_logger()

RETRY_TOL_FACTOR = 100.0
SNAP_ROUNDS = 16
BINARY_FEASIBILITY_TOL = 1e-9

SupportCache = Dict[Tuple[int, ...], Optional['Solution']]


@dataclass(frozen=True, eq=False)
class Solution:
    """
    Binary-feasible portfolio with its certificate.

    Attributes:
        x: Holdings
        support: Selected asset indices in ascending order
        objective: Tracking risk at x
        x_b: Purchases
        x_s: Sales
        feasibility: Binary-mode feasibility report
    """

    x: np.ndarray
    support: Tuple[int, ...]
    objective: float
    x_b: np.ndarray
    x_s: np.ndarray
    feasibility: FeasibilityReport

    @property
    def z(self) -> np.ndarray:
        """Indicator vector of the support."""
        z = np.zeros(self.x.shape[0])
        z[list(self.support)] = 1.0
        return z

    @property
    def point(self) -> Point:
        """The solution as a stacked-space point."""
        return Point(x=self.x, x_b=self.x_b, x_s=self.x_s, z=self.z)


def rank_indices(z: np.ndarray, x: np.ndarray) -> List[int]:
    """Order assets by larger z, then larger x, then lower index."""
    n = len(z)
    return sorted(range(n), key=lambda j: (-float(z[j]), -float(x[j]), j))


def _exact_trades(held: float, x: float) -> float:
    """Move ``x`` onto a value whose canonical trade reproduces it exactly."""
    for _ in range(SNAP_ROUNDS):
        if x >= held:
            snapped = held + (x - held)
        else:
            snapped = held - (held - x)
        if snapped == x:
            break
        x = snapped
    return x


def snap_holdings(inst: Instance, support: Tuple[int, ...],
                  x: np.ndarray) -> np.ndarray:
    """
    Remove round-off from restricted holdings.

    Clips onto the support bounds, then shifts the budget residual and any
    return shortfall onto assets with room, until the weights sum to one in
    floating point and every balance row holds exactly for canonical trades.

    Args:
        inst: Problem instance
        support: Sorted asset indices
        x: Holdings from the restricted solve

    Returns:
        np.ndarray: Snapped holdings, zero off the support
    """
    idx = list(support)
    a, b, held = inst.a, inst.b, inst.P
    out = np.zeros(inst.n)
    out[idx] = np.clip(x[idx], a[idx], b[idx])

    for _ in range(SNAP_ROUNDS):
        for j in idx:
            out[j] = min(max(_exact_trades(held[j], out[j]), a[j]), b[j])

        shortfall = inst.R - net_return(inst, out,
                                        np.maximum(out - held, 0.0),
                                        np.maximum(held - out, 0.0))
        if shortfall > 0.0:
            gain = [(inst.r[j] + (inst.c_s[j] if out[j] < held[j]
                                  else -inst.c_b[j]), j)
                    for j in idx if out[j] < b[j]]
            loss = [(inst.r[j] + (inst.c_s[j] if out[j] <= held[j]
                                  else -inst.c_b[j]), j)
                    for j in idx if out[j] > a[j]]
            if gain and loss:
                g, up = max(gain)
                l, down = min(loss)
                if up != down and g > l:
                    step = min(2.0 * shortfall / (g - l),
                               b[up] - out[up], out[down] - a[down])
                    out[up] += step
                    out[down] -= step
                    continue

        residual = 1.0 - float(out.sum())
        if residual == 0.0:
            break
        room = (b - out) if residual > 0 else (out - a)
        j = max(idx, key=lambda i: (room[i], -i))
        out[j] = min(max(out[j] + residual, a[j]), b[j])
    return out


def solve_restricted(inst: Instance, support: Iterable[int],
                     settings: Optional[QpSettings] = None,
                     cache: Optional[SupportCache] = None
                     ) -> Optional[Solution]:
    """
    Re-optimize holdings with z fixed to the indicator of ``support``.

    Only the ``3k`` variables of the support enter the QP. A solve that
    stops at the iteration limit is retried once from its best iterate at
    a looser tolerance before giving up.

    Args:
        inst: Problem instance
        support: Asset indices to hold
        settings: QP settings
        cache: Optional memo of earlier restricted solves

    Returns:
        Optional[Solution]: Certified solution, or None if the support
        admits no feasible holdings

    Raises:
        DimensionError: If an index is out of range
        QpError: If the solver neither converges nor proves infeasibility
    """
    key = tuple(sorted(int(j) for j in support))
    if any(j < 0 or j >= inst.n for j in key):
        raise DimensionError(f"support {key} out of range for n={inst.n}")
    if cache is not None and key in cache:
        return cache[key]

    idx = list(key)
    result: Optional[Solution] = None

    if np.sum(inst.a[idx]) <= 1.0 + 1e-12 and \
            np.sum(inst.b[idx]) >= 1.0 - 1e-12:
        settings = settings or QpSettings()
        problem = build_restricted(inst, key)
        sol = solve_qp(problem, settings=settings)
        if sol.status is QpStatus.ITERATION_LIMIT:
            logger.debug(f"Support {key}: retrying from residual "
                         f"{sol.residuals.worst:.3e}")
            sol = solve_qp(problem, tol=RETRY_TOL_FACTOR * settings.tol,
                           settings=settings,
                           warm_start=QpWarmStart.from_solution(sol))
        if sol.status is QpStatus.INFEASIBLE:
            logger.debug(f"Support {key}: {sol.certificate}")
        elif sol.status is not QpStatus.OPTIMAL:
            raise QpError(
                f"restricted solve on support {key} did not converge: "
                f"residual {sol.residuals.worst:.3e}"
            )
        else:
            x = np.zeros(inst.n)
            x[idx] = sol.y[:len(idx)]
            x = snap_holdings(inst, key, x)
            z = np.zeros(inst.n)
            z[idx] = 1.0
            point = Point(x=x, x_b=np.maximum(x - inst.P, 0.0),
                          x_s=np.maximum(inst.P - x, 0.0), z=z)
            report = check_feasibility(inst, point,
                                       tol=BINARY_FEASIBILITY_TOL,
                                       binary_mode=True)
            if not report.feasible:
                raise QpError(
                    f"restricted solution on support {key} misses "
                    f"feasibility by {report.max_violation:.3e}"
                )
            result = Solution(x=point.x, support=key,
                              objective=objective(inst, point.x),
                              x_b=point.x_b, x_s=point.x_s,
                              feasibility=report)

    if cache is not None:
        cache[key] = result
    return result


def candidate_supports(inst: Instance, p: Point) -> List[Tuple[int, ...]]:
    """
    Supports tried by ``repair_and_polish``, best first.

    Attempt ``t`` keeps the ``k - 1`` best-ranked assets and completes
    them with the ``(k - 1 + t)``-th ranked one, where ``k`` is the target
    support size.
    """
    ranked = rank_indices(p.z, p.x)
    if inst.card_mode == 'le':
        k = sum(1 for j in ranked if p.z[j] >= 0.5)
        k = min(max(k, 1), inst.card)
    else:
        k = inst.card
    head = ranked[:k - 1]
    supports = []
    for t in range(inst.n - k + 1):
        supports.append(tuple(sorted(head + [ranked[k - 1 + t]])))
    return supports


def repair_and_polish(inst: Instance, p: Point,
                      settings: Optional[QpSettings] = None,
                      cache: Optional[SupportCache] = None) -> Solution:
    """
    Round a relaxed point to a support and certify it.

    Args:
        inst: Problem instance
        p: Final DCA point (or any relaxed point)
        settings: QP settings
        cache: Optional memo shared across calls

    Returns:
        Solution: The first feasible support in ranking order

    Raises:
        DimensionError: If the point size differs from the instance
        InfeasibleError: If every candidate support is infeasible
    """
    if p.n != inst.n:
        raise DimensionError(
            f"point has {p.n} assets, instance has {inst.n}"
        )
    supports = candidate_supports(inst, p)
    for attempt, support in enumerate(supports):
        solution = solve_restricted(inst, support, settings, cache=cache)
        if solution is not None:
            if attempt:
                logger.info(f"Polish used fallback support {support} "
                            f"after {attempt} infeasible attempt(s)")
            return solution
        logger.debug(f"Support {support} is infeasible, trying the "
                     f"next-ranked asset")
    raise InfeasibleError(
        f"no feasible support among {len(supports)} polishing attempts"
    )
