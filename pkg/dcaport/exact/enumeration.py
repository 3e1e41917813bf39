"""
Brute-force support enumeration.
"""

import itertools
import math
import time
from typing import Iterator, Optional, Tuple

import numpy as np

from dcaport.dca.polish import Solution, solve_restricted
from dcaport.exact.result import ExactResult, ExactStatus
from dcaport.model.instance import Instance, validate_instance
from dcaport.qp.problem import QpSettings
from dcaport.utils.exceptions import CombinatorialGuardError
from dcaport.utils.logger import get_logger

logger = get_logger()

ENUMERATION_GUARD = 1_000_000


def support_count(inst: Instance) -> int:
    """Number of supports the model admits."""
    if inst.card_mode == 'le':
        return sum(math.comb(inst.n, k) for k in range(1, inst.card + 1))
    return math.comb(inst.n, inst.card)


def _supports(inst: Instance) -> Iterator[Tuple[int, ...]]:
    sizes = range(1, inst.card + 1) if inst.card_mode == 'le' else [inst.card]
    for k in sizes:
        yield from itertools.combinations(range(inst.n), k)


def enumerate_supports(inst: Instance,
                       settings: Optional[QpSettings] = None,
                       guard: int = ENUMERATION_GUARD) -> ExactResult:
    """
    Solve the restricted QP of every admissible support.

    Supports whose bounds cannot meet the budget are skipped without a
    solve. Ties keep the lexicographically first support.

    Args:
        inst: Problem instance
        settings: QP settings
        guard: Largest number of supports allowed

    Returns:
        ExactResult: ``proved-optimal`` or ``infeasible``

    Raises:
        ValidationError: If the instance is not usable
        CombinatorialGuardError: If there are more than ``guard`` supports
    """
    validate_instance(inst).raise_if_invalid()
    count = support_count(inst)
    if count > guard:
        raise CombinatorialGuardError(
            f"{count} supports exceed the enumeration guard of {guard}"
        )

    t0 = time.perf_counter()
    best: Optional[Solution] = None
    solved = 0
    for support in _supports(inst):
        idx = list(support)
        if np.sum(inst.a[idx]) > 1.0 + 1e-12 or \
                np.sum(inst.b[idx]) < 1.0 - 1e-12:
            continue
        solved += 1
        solution = solve_restricted(inst, support, settings)
        if solution is not None and (best is None
                                     or solution.objective < best.objective):
            best = solution

    seconds = time.perf_counter() - t0
    if best is None:
        logger.info(f"Enumeration: no feasible support among {count}")
        return ExactResult(solution=None, lower_bound=float('inf'),
                           upper_bound=float('inf'),
                           status=ExactStatus.INFEASIBLE, nodes=solved,
                           seconds=seconds, method='enumeration')
    logger.info(f"Enumeration: best support {best.support} objective "
                f"{best.objective:.10g} over {solved} solves")
    return ExactResult(solution=best, lower_bound=best.objective,
                       upper_bound=best.objective,
                       status=ExactStatus.PROVED_OPTIMAL, nodes=solved,
                       seconds=seconds, method='enumeration')
