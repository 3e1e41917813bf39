"""
Seeded random instances.

Covariances come from a factor model ``Q = F F^t + D`` with a positive
diagonal D, which is positive semidefinite by construction. Identical
arguments give identical instances.
"""

from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from dcaport.data.builder import InstanceConfig, build_instance
from dcaport.data.prices import MomentEstimate
from dcaport.model.instance import Instance
from dcaport.utils.exceptions import ValidationError
from dcaport.utils.logger import get_logger

logger = get_logger()

DEFAULT_CARD = 5


def random_moments(n: int, seed: int, factors: int = 3,
                   factor_scale: float = 0.02,
                   idiosyncratic: Tuple[float, float] = (1e-4, 1e-3),
                   return_band: Tuple[float, float] = (0.001, 0.01)
                   ) -> MomentEstimate:
    """
    Draw factor-model moments at weekly-return scale.

    Args:
        n: Number of assets
        seed: Random seed
        factors: Number of common factors (capped at n)
        factor_scale: Standard deviation of factor loadings
        idiosyncratic: Range of the diagonal variances
        return_band: Range of the uniform mean returns

    Returns:
        MomentEstimate: Means and covariance

    Raises:
        ValidationError: If n < 1 or a range is inverted
    """
    if n < 1:
        raise ValidationError(f"n must be at least 1, got {n}",
                              ["n < 1"])
    if idiosyncratic[0] <= 0 or idiosyncratic[1] < idiosyncratic[0]:
        raise ValidationError("idiosyncratic variance range is invalid")
    if return_band[1] < return_band[0]:
        raise ValidationError("return band is inverted")

    rng = np.random.default_rng(seed)
    k = max(1, min(factors, n))
    F = rng.normal(0.0, factor_scale, size=(n, k))
    D = rng.uniform(idiosyncratic[0], idiosyncratic[1], size=n)
    Q = F @ F.T + np.diag(D)
    Q = (Q + Q.T) / 2.0
    r = rng.uniform(return_band[0], return_band[1], size=n)
    ids = tuple(f"A{j + 1:03d}" for j in range(n))
    return MomentEstimate(r=r, Q=Q, T_used=0, asset_ids=ids)


def generate_instance(n: int, seed: int, card: Optional[int] = None,
                      cfg: Optional[InstanceConfig] = None,
                      factors: int = 3,
                      return_band: Tuple[float, float] = (0.001, 0.01)
                      ) -> Instance:
    """
    Generate a validated random instance.

    Args:
        n: Number of assets
        seed: Random seed
        card: Cardinality target (default min(n, 5); forced to 1 when n=1)
        cfg: Optional instance settings; ``card`` overrides its card
        factors: Number of common factors
        return_band: Range of the uniform mean returns

    Returns:
        Instance: Instance with experiment defaults and the R-rule
    """
    moments = random_moments(n, seed, factors=factors,
                             return_band=return_band)
    if card is None:
        card = cfg.card if cfg is not None else min(n, DEFAULT_CARD)
    if n == 1:
        card = 1
    if cfg is None:
        cfg = InstanceConfig(card=card)
    else:
        cfg = replace(cfg, card=card)
    inst = build_instance(moments, cfg)
    logger.debug(f"Generated instance n={n} card={card} seed={seed}")
    return inst
