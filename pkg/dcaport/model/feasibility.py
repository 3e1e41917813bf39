"""
Constraint violation measurement for candidate points.

Evaluates the return, balance, budget, cardinality, bound and sign
constraints of the model and, in binary mode, the integrality of z.
"""

from dataclasses import asdict, dataclass
from typing import Dict

import numpy as np

from dcaport.model.instance import Instance, Point
from dcaport.utils.exceptions import DimensionError


@dataclass(frozen=True)
class FeasibilityReport:
    """
    Absolute constraint violations of one point.

    ``binariness`` is always measured but only counts towards
    ``max_violation`` when the report was produced in binary mode.
    """

    return_violation: float
    balance_violation: float
    budget_violation: float
    cardinality_violation: float
    bound_violation: float
    nonnegativity_violation: float
    binariness: float
    binary_mode: bool
    max_violation: float
    tolerance: float

    @property
    def feasible(self) -> bool:
        """True when the largest violation is within tolerance."""
        return self.max_violation <= self.tolerance

    def as_dict(self) -> Dict[str, float]:
        """Plain dictionary view for reports."""
        data = asdict(self)
        data['feasible'] = self.feasible
        return data


def net_return(inst: Instance, x: np.ndarray, x_b: np.ndarray,
               x_s: np.ndarray) -> float:
    """Left side of the return constraint: benchmark-relative return net of costs."""
    return float((x - inst.x_bar) @ inst.r - (inst.c_b @ x_b + inst.c_s @ x_s))


def check_feasibility(inst: Instance, p: Point, tol: float = 0.0,
                      binary_mode: bool = False) -> FeasibilityReport:
    """
    Measure how far a point is from the feasible set.

    Args:
        inst: Problem instance
        p: Candidate point
        tol: Nonnegative tolerance for the verdict
        binary_mode: Also require z to be binary

    Returns:
        FeasibilityReport: Per-constraint violations and verdict

    Raises:
        DimensionError: If the point size differs from the instance
        ValueError: If tol is negative
    """
    if p.n != inst.n:
        raise DimensionError(
            f"point has {p.n} assets, instance has {inst.n}"
        )
    if tol < 0:
        raise ValueError("tol must be nonnegative")

    x, x_b, x_s, z = p.x, p.x_b, p.x_s, p.z

    return_violation = max(inst.R - net_return(inst, x, x_b, x_s), 0.0)
    balance_violation = float(np.max(np.abs(inst.P + x_b - x_s - x)))
    budget_violation = abs(float(x.sum()) - 1.0)

    z_sum = float(z.sum())
    if inst.card_mode == 'le':
        cardinality_violation = max(z_sum - inst.card, 0.0)
    else:
        cardinality_violation = abs(z_sum - inst.card)

    bound_violation = float(np.max(np.maximum.reduce([
        inst.a * z - x, x - inst.b * z, np.zeros(inst.n)
    ])))
    nonnegativity_violation = float(max(
        0.0, -x.min(), -x_b.min(), -x_s.min(), -z.min(), z.max() - 1.0
    ))
    binariness = float(np.max(np.minimum(z, 1.0 - z)))

    parts = [return_violation, balance_violation, budget_violation,
             cardinality_violation, bound_violation, nonnegativity_violation]
    if binary_mode:
        parts.append(binariness)

    return FeasibilityReport(
        return_violation=return_violation,
        balance_violation=balance_violation,
        budget_violation=budget_violation,
        cardinality_violation=cardinality_violation,
        bound_violation=bound_violation,
        nonnegativity_violation=nonnegativity_violation,
        binariness=binariness,
        binary_mode=binary_mode,
        max_violation=float(max(parts)),
        tolerance=float(tol),
    )
