"""
Instance assembly from estimated moments.

Fills unspecified bounds, costs and portfolios with the experiment defaults
(a_j = 0.05, b_j = 1, 0.1% costs, P = 0, equal-weight benchmark) and chooses
the required return by a deterministic rule when none is given.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Union

import numpy as np

from dcaport.data.prices import MomentEstimate
from dcaport.model.instance import CARD_MODES, Instance, validate_instance
from dcaport.utils.config import Config
from dcaport.utils.exceptions import ConfigurationError, ValidationError
from dcaport.utils.logger import get_logger

logger = get_logger()

VectorLike = Union[float, Sequence[float], np.ndarray]

DEFAULT_LOWER = 0.05
DEFAULT_UPPER = 1.0
DEFAULT_COST = 0.001
DEFAULT_R_FRACTION = 0.5


@dataclass
class InstanceConfig:
    """
    Everything besides the moments that defines an instance.

    ``None`` fields take the experiment defaults; ``x_bar=None`` means the
    equal-weight benchmark 1/n. When ``R`` is ``None`` the R-rule with
    ``r_rule_fraction`` applies.
    """

    card: int
    a: Optional[VectorLike] = None
    b: Optional[VectorLike] = None
    c_b: Optional[VectorLike] = None
    c_s: Optional[VectorLike] = None
    P: Optional[VectorLike] = None
    x_bar: Optional[VectorLike] = None
    R: Optional[float] = None
    r_rule_fraction: float = DEFAULT_R_FRACTION
    card_mode: str = 'eq'

    def __post_init__(self):
        if not 0.0 <= self.r_rule_fraction <= 1.0:
            raise ConfigurationError(
                f"r_rule_fraction must lie in [0, 1], "
                f"got {self.r_rule_fraction}"
            )
        if self.card_mode not in CARD_MODES:
            raise ConfigurationError(
                f"card_mode must be one of {CARD_MODES}, "
                f"got {self.card_mode!r}"
            )

    @classmethod
    def from_config(cls, config: Config, card: int,
                    R: Optional[float] = None,
                    r_rule_fraction: Optional[float] = None
                    ) -> 'InstanceConfig':
        """
        Build from the ``instance`` configuration section.

        Args:
            config: Loaded configuration
            card: Cardinality target
            R: Optional explicit required return
            r_rule_fraction: Optional override of the R-rule fraction

        Returns:
            InstanceConfig: Populated settings
        """
        fraction = r_rule_fraction
        if fraction is None:
            fraction = config.get('instance.r_rule_fraction',
                                  DEFAULT_R_FRACTION)
        return cls(
            card=card,
            a=config.get('instance.a', DEFAULT_LOWER),
            b=config.get('instance.b', DEFAULT_UPPER),
            c_b=config.get('instance.c_b', DEFAULT_COST),
            c_s=config.get('instance.c_s', DEFAULT_COST),
            R=R,
            r_rule_fraction=float(fraction),
            card_mode=config.get('instance.card_mode', 'eq'),
        )


def _filled(value: Optional[VectorLike], default: float,
            n: int) -> np.ndarray:
    if value is None:
        return np.full(n, default)
    arr = np.asarray(value, dtype=float)
    return np.full(n, float(arr)) if arr.ndim == 0 else arr.reshape(-1)


def single_asset_net_returns(r: np.ndarray, x_bar: np.ndarray,
                             c_b: np.ndarray, c_s: np.ndarray,
                             P: np.ndarray) -> np.ndarray:
    """
    Return-constraint left side at each single-asset portfolio ``e_j``.

    Moving from P to e_j buys ``max(1 - P_j, 0)`` of asset j and sells every
    other holding (and any excess of j).
    """
    sell_all = float(c_s @ P)
    net = np.empty_like(r)
    for j in range(r.shape[0]):
        buy = c_b[j] * max(1.0 - P[j], 0.0)
        sell = sell_all - c_s[j] * P[j] + c_s[j] * max(P[j] - 1.0, 0.0)
        net[j] = r[j] - float(x_bar @ r) - buy - sell
    return net


def required_return_rule(r: np.ndarray, a: np.ndarray, b: np.ndarray,
                         c_b: np.ndarray, c_s: np.ndarray, P: np.ndarray,
                         x_bar: np.ndarray,
                         fraction: float = DEFAULT_R_FRACTION) -> float:
    """
    Pick R between the worst and best single-asset net return.

    ``R = lo + fraction * (hi - lo)`` where lo/hi are the min/max net return
    over assets that can be held at their lower bound.

    Raises:
        ValidationError: If no asset can be held at its lower bound
    """
    holdable = (a <= b) & (a <= 1.0)
    if not np.any(holdable):
        raise ValidationError(
            "no asset can be held at its lower bound; R-rule undefined",
            ["a_j > min(b_j, 1) for every asset"]
        )
    net = single_asset_net_returns(r, x_bar, c_b, c_s, P)[holdable]
    lo, hi = float(net.min()), float(net.max())
    return lo + fraction * (hi - lo)


def build_instance(m: MomentEstimate, cfg: InstanceConfig) -> Instance:
    """
    Assemble and validate an instance.

    Args:
        m: Estimated moments
        cfg: Bounds, costs, portfolios, cardinality and R or R-rule

    Returns:
        Instance: Validated instance

    Raises:
        ValidationError: If the assembled instance is not usable
    """
    n = m.n
    r = np.asarray(m.r, dtype=float)
    a = _filled(cfg.a, DEFAULT_LOWER, n)
    b = _filled(cfg.b, DEFAULT_UPPER, n)
    c_b = _filled(cfg.c_b, DEFAULT_COST, n)
    c_s = _filled(cfg.c_s, DEFAULT_COST, n)
    P = _filled(cfg.P, 0.0, n)
    x_bar = _filled(cfg.x_bar, 1.0 / n, n)

    if cfg.R is not None:
        R = float(cfg.R)
    else:
        R = required_return_rule(r, a, b, c_b, c_s, P, x_bar,
                                 cfg.r_rule_fraction)
        logger.info(
            f"R-rule (fraction {cfg.r_rule_fraction}) set R={R:.6g}"
        )

    inst = Instance(r=r, Q=m.Q, R=R, card=cfg.card, a=a, b=b, c_b=c_b,
                    c_s=c_s, P=P, x_bar=x_bar, card_mode=cfg.card_mode,
                    asset_ids=m.asset_ids)
    validate_instance(inst).raise_if_invalid()
    return inst
