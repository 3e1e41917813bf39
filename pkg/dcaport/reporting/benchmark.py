"""
Cardinality sweeps comparing DCA against the exact solvers.

Rows are independent solves; they may run on a joblib worker pool and are
always reassembled in ascending card order.
"""

import math
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from joblib import Parallel, delayed

from dcaport.dca.solver import SolverConfig, run_dca
from dcaport.exact.bnb import solve_exact_bb
from dcaport.exact.enumeration import enumerate_supports, support_count
from dcaport.exact.result import BnbLimits, ExactResult, ExactStatus
from dcaport.model.instance import Instance
from dcaport.utils.exceptions import DcaportError
from dcaport.utils.logger import get_logger

logger = get_logger()

ENUMERATE_LIMIT = 100_000
GAP_SLACK = 1e-8


@dataclass
class BenchRow:
    """One card of a sweep; ``error`` holds the message of a failed row."""

    card: int
    dca_objective: Optional[float] = None
    dca_seconds: Optional[float] = None
    dca_iterations: Optional[int] = None
    exact_objective: Optional[float] = None
    exact_seconds: Optional[float] = None
    exact_status: Optional[str] = None
    gap: Optional[float] = None
    error: Optional[str] = None

    @property
    def gap_ok(self) -> bool:
        """DCA is an upper bound whenever the exact value is proved."""
        if self.exact_status != ExactStatus.PROVED_OPTIMAL.value \
                or self.gap is None:
            return True
        return self.gap >= -GAP_SLACK


@dataclass
class BenchReport:
    """Rows of a sweep in ascending card order."""

    dataset: str
    n: int
    rows: List[BenchRow] = field(default_factory=list)
    settings: Dict[str, Any] = field(default_factory=dict)

    def as_dict(self) -> Dict[str, Any]:
        """Plain dictionary view for JSON output and storage."""
        return {
            'dataset': self.dataset,
            'n': self.n,
            'settings': self.settings,
            'rows': [asdict(row) for row in self.rows],
        }

    def without_timing(self) -> List[Dict[str, Any]]:
        """Rows with timing columns removed, for determinism checks."""
        rows = []
        for row in self.rows:
            data = asdict(row)
            data.pop('dca_seconds')
            data.pop('exact_seconds')
            rows.append(data)
        return rows


def solve_exact(inst: Instance, cfg: SolverConfig,
                limits: Optional[BnbLimits] = None,
                enumerate_limit: int = ENUMERATE_LIMIT) -> ExactResult:
    """
    Run the exact baseline, enumerating when the support count is small.

    Args:
        inst: Problem instance
        cfg: Solver configuration providing QP settings
        limits: Branch-and-bound limits
        enumerate_limit: Largest support count solved by enumeration

    Returns:
        ExactResult: Result of the chosen method
    """
    if support_count(inst) <= enumerate_limit:
        return enumerate_supports(inst, cfg.qp)
    return solve_exact_bb(inst, limits or BnbLimits(), cfg.qp)


def run_bench_row(inst: Instance, card: int, cfg: SolverConfig,
                  run_exact: bool = True,
                  limits: Optional[BnbLimits] = None,
                  enumerate_limit: int = ENUMERATE_LIMIT) -> BenchRow:
    """
    Solve one card of a sweep; solver errors are recorded in the row.

    Timings cover the solver calls only.
    """
    row = BenchRow(card=card)
    try:
        instance = inst.with_changes(card=card)
        result = run_dca(instance, cfg)
        row.dca_objective = result.objective
        row.dca_seconds = round(result.seconds, 3)
        row.dca_iterations = result.iterations
        if result.solution is None:
            row.error = f"DCA found no feasible support " \
                        f"({result.termination.value})"

        if run_exact:
            exact = solve_exact(instance, cfg, limits, enumerate_limit)
            row.exact_status = exact.status.value
            row.exact_seconds = round(exact.seconds, 3)
            if exact.solution is not None:
                row.exact_objective = exact.objective
            if row.dca_objective is not None and \
                    row.exact_objective is not None and \
                    not math.isnan(row.dca_objective):
                row.gap = row.dca_objective - row.exact_objective
    except DcaportError as e:
        logger.warning(f"Benchmark row card={card} failed: {e}")
        row.error = str(e)
    return row


def run_benchmark(inst: Instance, cards: Sequence[int],
                  cfg: Optional[SolverConfig] = None,
                  run_exact: bool = True,
                  limits: Optional[BnbLimits] = None,
                  n_jobs: int = 1, dataset: str = '',
                  enumerate_limit: int = ENUMERATE_LIMIT) -> BenchReport:
    """
    Sweep card over ``cards`` on one instance.

    Args:
        inst: Base instance; only its card changes between rows
        cards: Cardinalities to solve
        cfg: Solver configuration
        run_exact: Also run the exact baseline and fill gap columns
        limits: Branch-and-bound limits
        n_jobs: joblib worker count
        dataset: Label stored in the report
        enumerate_limit: Largest support count solved by enumeration

    Returns:
        BenchReport: Rows in ascending card order

    Raises:
        ValueError: If ``cards`` is empty
    """
    cards = sorted(set(int(c) for c in cards))
    if not cards:
        raise ValueError("card range is empty")
    cfg = cfg or SolverConfig()
    logger.info(f"Benchmark on {dataset or 'instance'}: n={inst.n}, "
                f"cards {cards[0]}..{cards[-1]}, {n_jobs} worker(s)")

    if n_jobs == 1:
        rows = [run_bench_row(inst, c, cfg, run_exact, limits,
                              enumerate_limit) for c in cards]
    else:
        rows = Parallel(n_jobs=n_jobs)(
            delayed(run_bench_row)(inst, c, cfg, run_exact, limits,
                                   enumerate_limit)
            for c in cards
        )
    rows = sorted(rows, key=lambda row: row.card)

    settings = {
        'theta': cfg.theta,
        'epsilon': cfg.epsilon,
        'max_iter': cfg.max_iter,
        'qp_tol': cfg.qp.tol,
        'run_exact': run_exact,
        'R': inst.R,
        'card_mode': inst.card_mode,
    }
    for row in rows:
        if not row.gap_ok:
            logger.warning(f"card={row.card}: DCA value below the proved "
                           f"optimum by {-row.gap:.3e}")
    return BenchReport(dataset=dataset, n=inst.n, rows=rows,
                       settings=settings)
