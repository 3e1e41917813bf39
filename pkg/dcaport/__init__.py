"""
dcaport: cardinality-constrained tracking portfolios with transaction costs.

Solves the mixed-integer mean-variance model by a difference-of-convex
algorithm on an exact-penalty reformulation, and ships exact reference
solvers, benchmark sweeps and instance tooling around it.
"""

__version__ = "0.1.0"
__license__ = "MIT"

from dcaport.dca.solver import SolverConfig, run_dca
from dcaport.exact.bnb import solve_exact_bb
from dcaport.exact.enumeration import enumerate_supports
from dcaport.model.instance import Instance, Point, validate_instance

__all__ = [
    'Instance',
    'Point',
    'SolverConfig',
    'enumerate_supports',
    'run_dca',
    'solve_exact_bb',
    'validate_instance',
]
