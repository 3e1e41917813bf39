"""
Exact solver results and limits.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from dcaport.dca.polish import Solution
from dcaport.utils.config import Config
from dcaport.utils.exceptions import ConfigurationError


class ExactStatus(Enum):
    """Outcome of an exact solve."""

    PROVED_OPTIMAL = 'proved-optimal'
    GAP_LIMIT = 'gap-limit'
    NODE_LIMIT = 'node-limit'
    TIME_LIMIT = 'time-limit'
    INFEASIBLE = 'infeasible'


@dataclass(frozen=True)
class BnbLimits:
    """
    Search limits for branch-and-bound.

    Attributes:
        max_nodes: Cap on solved node relaxations
        time_limit: Wall-clock cap in seconds
        gap_tol: Absolute gap at which a node is pruned
        stop_gap: Optional absolute gap at which the search stops early
    """

    max_nodes: int = 1_000_000
    time_limit: float = 1200.0
    gap_tol: float = 1e-9
    stop_gap: Optional[float] = None

    def __post_init__(self):
        if self.max_nodes < 1:
            raise ConfigurationError(
                f"max_nodes must be positive: {self.max_nodes}"
            )
        if self.time_limit <= 0:
            raise ConfigurationError(
                f"time_limit must be positive: {self.time_limit}"
            )
        if self.gap_tol < 0:
            raise ConfigurationError("gap_tol must be nonnegative")
        if self.stop_gap is not None and self.stop_gap < self.gap_tol:
            raise ConfigurationError("stop_gap must be at least gap_tol")

    @classmethod
    def from_config(cls, config: Config) -> 'BnbLimits':
        """Build from the ``exact`` configuration section."""
        return cls(
            max_nodes=int(config.get('exact.max_nodes', 1_000_000)),
            time_limit=float(config.get('exact.time_limit', 1200.0)),
            gap_tol=float(config.get('exact.gap_tol', 1e-9)),
            stop_gap=config.get('exact.stop_gap'),
        )


@dataclass(frozen=True, eq=False)
class ExactResult:
    """
    Best solution with bounds on the optimum.

    Infeasible results carry ``lower_bound = upper_bound = inf``.
    """

    solution: Optional[Solution]
    lower_bound: float
    upper_bound: float
    status: ExactStatus
    nodes: int
    seconds: float = 0.0
    method: str = 'bnb'
    lower_history: Tuple[float, ...] = ()

    @property
    def objective(self) -> float:
        """Upper bound, i.e. the objective of the best solution."""
        return self.upper_bound

    @property
    def gap(self) -> float:
        """Absolute gap between the bounds."""
        return self.upper_bound - self.lower_bound
