"""
Best-first branch-and-bound on the selection binaries.

Node relaxations are the convex subproblem with some z components fixed;
incumbents come from polishing node relaxation points, so every incumbent
is a restricted solve of the same kind enumeration performs.
"""

import csv
import heapq
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Union

import numpy as np

from dcaport.dca.polish import Solution, SupportCache, repair_and_polish
from dcaport.dca.subproblem import build_subproblem, usable
from dcaport.exact.result import BnbLimits, ExactResult, ExactStatus
from dcaport.model.instance import Instance, Point, objective, validate_instance
from dcaport.qp.admm import solve_qp
from dcaport.qp.problem import QpSettings, QpSolution, QpStatus, QpWarmStart
from dcaport.utils.exceptions import InfeasibleError, QpError
from dcaport.utils.file_utils import ensure_parent_dir
from dcaport.utils.logger import get_logger

logger = get_logger()

NODE_LOG_COLUMNS = ('node', 'depth', 'bound', 'incumbent', 'action')


@dataclass(order=True)
class BnbNode:
    """Open node ordered by its relaxation bound, then creation order."""

    bound: float
    node_id: int
    depth: int = field(compare=False)
    z_lower: np.ndarray = field(compare=False)
    z_upper: np.ndarray = field(compare=False)
    point: Optional[Point] = field(compare=False, default=None)
    relaxation: Optional[QpSolution] = field(compare=False, default=None)


class BranchAndBound:
    """
    Tree search state for one instance.

    Use ``solve_exact_bb`` rather than driving this class directly.
    """

    def __init__(self, inst: Instance, limits: BnbLimits,
                 settings: QpSettings,
                 node_log: Optional[Union[str, Path]] = None):
        self.inst = inst
        self.limits = limits
        self.settings = settings
        self.node_log = node_log
        self.cache: SupportCache = {}
        self.incumbent: Optional[Solution] = None
        self.solved = 0
        self.next_id = 0
        self._writer = None

    @property
    def upper(self) -> float:
        return self.incumbent.objective if self.incumbent else float('inf')

    def _log(self, node: BnbNode, action: str):
        logger.debug(f"B&B node {node.node_id} depth {node.depth} "
                     f"bound {node.bound:.10g} {action}")
        if self._writer is not None:
            self._writer.writerow([node.node_id, node.depth,
                                   '%.17g' % node.bound,
                                   '%.17g' % self.upper, action])

    def _admissible(self, z_lower: np.ndarray, z_upper: np.ndarray) -> bool:
        ones = int(np.sum(z_lower >= 1.0))
        reachable = int(np.sum(z_upper >= 1.0))
        if ones > self.inst.card:
            return False
        if self.inst.card_mode == 'le':
            return reachable >= 1
        return reachable >= self.inst.card

    def _propagate(self, z_lower: np.ndarray, z_upper: np.ndarray):
        """Fix the remaining free z once the cardinality count forces them."""
        card = self.inst.card
        if int(np.sum(z_lower >= 1.0)) == card:
            z_upper[z_lower < 1.0] = 0.0
        elif self.inst.card_mode == 'eq' and \
                int(np.sum(z_upper >= 1.0)) == card:
            z_lower[z_upper >= 1.0] = 1.0

    def _evaluate(self, z_lower: np.ndarray, z_upper: np.ndarray,
                  depth: int, parent: Optional[BnbNode]
                  ) -> Optional[BnbNode]:
        """Solve a node relaxation; None when the node is infeasible."""
        warm = (QpWarmStart.from_solution(parent.relaxation)
                if parent is not None and parent.relaxation is not None
                else None)
        problem = build_subproblem(self.inst, np.zeros(self.inst.n),
                                   z_lower, z_upper)
        sol = solve_qp(problem, settings=self.settings, warm_start=warm)
        self.solved += 1
        node_id = self.next_id
        self.next_id += 1
        parent_bound = parent.bound if parent is not None else -np.inf

        if sol.status is QpStatus.INFEASIBLE:
            node = BnbNode(bound=np.inf, node_id=node_id, depth=depth,
                           z_lower=z_lower, z_upper=z_upper)
            self._log(node, 'infeasible')
            return None
        if not usable(sol, 10.0 * self.settings.tol):
            logger.warning(f"B&B node {node_id} relaxation did not converge;"
                           f" keeping the parent bound")
            return BnbNode(bound=parent_bound, node_id=node_id, depth=depth,
                           z_lower=z_lower, z_upper=z_upper)

        point = Point.from_stacked(sol.y, self.inst.n, holdings=self.inst.P)
        bound = max(objective(self.inst, point.x), parent_bound)
        node = BnbNode(bound=bound, node_id=node_id, depth=depth,
                       z_lower=z_lower, z_upper=z_upper, point=point,
                       relaxation=sol)
        try:
            candidate = repair_and_polish(self.inst, point, self.settings,
                                          cache=self.cache)
        except InfeasibleError:
            candidate = None
        except QpError as e:
            logger.warning(f"B&B node {node_id} polish failed: {e}")
            candidate = None
        if candidate is not None and candidate.objective < self.upper:
            self.incumbent = candidate
            logger.debug(f"B&B incumbent {candidate.objective:.10g} "
                         f"support {candidate.support}")
            self._log(node, 'incumbent')
        return node

    def _branch_index(self, node: BnbNode) -> Optional[int]:
        """Most fractional free z, lowest index on ties."""
        free = np.flatnonzero(node.z_lower < node.z_upper)
        if free.size == 0:
            return None
        if node.point is None:
            return int(free[0])
        z = node.point.z[free]
        frac = np.minimum(z, 1.0 - z)
        return int(free[int(np.argmax(frac))])

    def run(self) -> ExactResult:
        """Search the tree, writing the node log when requested."""
        t0 = time.perf_counter()
        handle = None
        if self.node_log is not None:
            handle = open(ensure_parent_dir(self.node_log), 'w', newline='')
            self._writer = csv.writer(handle)
            self._writer.writerow(NODE_LOG_COLUMNS)
        try:
            return self._search(t0)
        finally:
            if handle is not None:
                handle.close()
                self._writer = None

    def _search(self, t0: float) -> ExactResult:
        inst = self.inst
        limits = self.limits
        z_lower, z_upper = np.zeros(inst.n), np.ones(inst.n)
        self._propagate(z_lower, z_upper)
        root = self._evaluate(z_lower, z_upper, 0, None)
        if root is None:
            return self._finish(ExactStatus.INFEASIBLE, [], [], t0)

        heap: List[BnbNode] = [root]
        history: List[float] = []
        status = None
        while heap:
            if time.perf_counter() - t0 > limits.time_limit:
                status = ExactStatus.TIME_LIMIT
                break
            node = heapq.heappop(heap)
            if node.bound >= self.upper - limits.gap_tol:
                self._log(node, 'prune')
                continue
            history.append(max(node.bound, history[-1]) if history
                           else node.bound)
            if limits.stop_gap is not None and \
                    self.upper - node.bound <= limits.stop_gap:
                heapq.heappush(heap, node)
                status = ExactStatus.GAP_LIMIT
                break
            j = self._branch_index(node)
            if j is None:
                self._log(node, 'leaf')
                continue
            children = []
            for value in (0.0, 1.0):
                z_lower = node.z_lower.copy()
                z_upper = node.z_upper.copy()
                z_lower[j] = z_upper[j] = value
                if self._admissible(z_lower, z_upper):
                    self._propagate(z_lower, z_upper)
                    children.append((z_lower, z_upper))
            if self.solved + len(children) > limits.max_nodes:
                heapq.heappush(heap, node)
                status = ExactStatus.NODE_LIMIT
                break

            self._log(node, f'branch z[{j}]')
            for z_lower, z_upper in children:
                child = self._evaluate(z_lower, z_upper, node.depth + 1,
                                       node)
                if child is not None and \
                        child.bound < self.upper - limits.gap_tol:
                    heapq.heappush(heap, child)

        return self._finish(status, heap, history, t0)

    def _finish(self, status: Optional[ExactStatus], heap: List[BnbNode],
                history: List[float], t0: float) -> ExactResult:
        seconds = time.perf_counter() - t0
        upper = self.upper
        if status is None or status is ExactStatus.INFEASIBLE:
            if self.incumbent is None:
                status, lower = ExactStatus.INFEASIBLE, float('inf')
            else:
                status, lower = ExactStatus.PROVED_OPTIMAL, upper
        else:
            lower = min([n.bound for n in heap] + [upper])
        logger.info(f"B&B {status.value}: lower {lower:.10g} upper "
                    f"{upper:.10g} after {self.solved} nodes, "
                    f"{seconds:.3f}s")
        return ExactResult(solution=self.incumbent, lower_bound=lower,
                           upper_bound=upper, status=status,
                           nodes=self.solved, seconds=seconds, method='bnb',
                           lower_history=tuple(history))


def solve_exact_bb(inst: Instance, limits: Optional[BnbLimits] = None,
                   settings: Optional[QpSettings] = None,
                   node_log: Optional[Union[str, Path]] = None
                   ) -> ExactResult:
    """
    Solve the model to proven optimality by branch-and-bound.

    Args:
        inst: Problem instance
        limits: Node, time and gap limits
        settings: QP settings for node relaxations and restricted solves
        node_log: Optional path of a node log table

    Returns:
        ExactResult: Best solution with its bounds and status

    Raises:
        ValidationError: If the instance is not usable
    """
    validate_instance(inst).raise_if_invalid()
    search = BranchAndBound(inst, limits or BnbLimits(),
                            settings or QpSettings(), node_log)
    return search.run()
