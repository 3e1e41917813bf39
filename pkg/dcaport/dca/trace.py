"""
Per-iteration DCA records.
"""

from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

from dcaport.model.instance import Point

TRACE_COLUMNS = ('k', 'theta', 'F', 'objective', 'alpha', 'step_norm',
                 'solve_seconds', 'qp_iterations')


@dataclass(frozen=True, eq=False)
class TraceRecord:
    """State after the k-th subproblem solve."""

    k: int
    point: Point
    theta: float
    F: float
    objective: float
    alpha: float
    step_norm: float
    solve_seconds: float
    qp_iterations: int

    def as_row(self) -> Dict[str, Any]:
        """Scalar columns of the record."""
        return {col: getattr(self, col) for col in TRACE_COLUMNS}


def trace_rows(trace: Sequence[TraceRecord]) -> List[Dict[str, Any]]:
    """Scalar rows for a whole trace."""
    return [record.as_row() for record in trace]


def descent_violations(trace: Sequence[TraceRecord],
                       slack: float = 1e-9) -> List[int]:
    """
    Iterations whose penalized objective rose by more than ``slack``.

    Consecutive records are compared only within one penalty weight;
    escalating theta changes F itself.
    """
    bad = []
    for prev, cur in zip(trace, trace[1:]):
        if cur.theta == prev.theta and cur.F > prev.F + slack:
            bad.append(cur.k)
    return bad
