"""
Exact penalty for the binary constraint on z.

The concave penalty ``sum z_j (1 - z_j)`` vanishes exactly on binary
vectors; with weight ``theta`` it turns the mixed-integer model into a DC
program whose convex part is the tracking risk and whose concave part is
linearized by ``subgradient_h``.
"""

import numpy as np

from dcaport.model.instance import Instance, Point, objective
from dcaport.utils.exceptions import DimensionError, DomainError

DOMAIN_SLACK = 1e-12


def penalty_alpha(z) -> float:
    """
    Binariness penalty ``sum z_j (1 - z_j)``.

    Args:
        z: Vector in [0, 1]^n

    Returns:
        float: Nonnegative penalty, zero iff z is binary

    Raises:
        DomainError: If a component lies outside [0, 1]
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    if not np.all(np.isfinite(z)):
        raise DomainError("z has non-finite components")
    if np.any(z < -DOMAIN_SLACK) or np.any(z > 1.0 + DOMAIN_SLACK):
        raise DomainError(
            f"z must lie in [0, 1], got range "
            f"[{float(z.min()):.6g}, {float(z.max()):.6g}]"
        )
    z = np.clip(z, 0.0, 1.0)
    return float(np.sum(z * (1.0 - z)))


def penalized_objective(inst: Instance, theta: float, p: Point) -> float:
    """
    Penalized objective ``F = risk(x) + theta * alpha(z)``.

    Raises:
        DimensionError: If the point size differs from the instance
    """
    if p.n != inst.n:
        raise DimensionError(
            f"point has {p.n} assets, instance has {inst.n}"
        )
    return objective(inst, p.x) + theta * penalty_alpha(p.z)


def subgradient_h(theta: float, z) -> np.ndarray:
    """
    Gradient of the convex part ``h`` at ``z``: ``theta * (2 z - 1)``.

    The ``x``, ``x_b`` and ``x_s`` components of the gradient are zero and
    are not materialized.
    """
    z = np.asarray(z, dtype=float).reshape(-1)
    return theta * (2.0 * z - 1.0)
