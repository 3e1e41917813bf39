"""
Convex QP containers and KKT residual evaluation.

A ``QpProblem`` is

    minimize    1/2 y^t P y + q^t y
    subject to  A_eq y = b_eq,  A_in y <= h_in,  lower <= y <= upper

Duals follow one sign convention throughout: stationarity reads
``P y + q + A_eq^t lam + A_in^t mu + nu = 0`` with ``mu >= 0``; ``nu_i > 0``
means the upper bound of ``y_i`` is active and ``nu_i < 0`` the lower one.
"""

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np
import yaml

from dcaport.model.serialization import (
    format_matrix_lines,
    format_vector,
    parse_float_list,
)
from dcaport.utils.config import Config
from dcaport.utils.exceptions import (
    ConfigurationError,
    DataFormatError,
    DimensionError,
    QpInvariantError,
)
from dcaport.utils.file_utils import ensure_parent_dir, read_text_file
from dcaport.utils.logger import get_logger

logger = get_logger()

SYMMETRY_TOL = 1e-12


def inf_norm(v: np.ndarray) -> float:
    """Max-norm that is 0 for empty arrays."""
    v = np.asarray(v, dtype=float)
    return float(np.max(np.abs(v))) if v.size else 0.0


def _matrix(value, cols: int, name: str) -> np.ndarray:
    if value is None:
        return np.zeros((0, cols))
    mat = np.array(value, dtype=float)
    if mat.ndim == 1 and mat.size == 0:
        mat = mat.reshape(0, cols)
    if mat.ndim == 1:
        mat = mat.reshape(1, -1)
    if mat.ndim != 2 or mat.shape[1] != cols:
        raise QpInvariantError(
            f"{name} must have {cols} columns, got shape {mat.shape}"
        )
    return mat


def _rhs(value, rows: int, name: str) -> np.ndarray:
    if value is None:
        vec = np.zeros(0)
    else:
        vec = np.array(value, dtype=float).reshape(-1)
    if vec.shape[0] != rows:
        raise QpInvariantError(
            f"{name} must have length {rows}, got {vec.shape[0]}"
        )
    return vec


@dataclass(frozen=True, eq=False)
class QpProblem:
    """
    Standard-form convex QP.

    Missing constraint blocks may be passed as ``None``; missing bounds
    default to the whole real line.
    """

    P: np.ndarray
    q: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_in: Optional[np.ndarray] = None
    h_in: Optional[np.ndarray] = None
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(-1)
        m = q.shape[0]
        P = np.array(self.P, dtype=float)
        if P.size == 0 and m == 0:
            P = np.zeros((0, 0))
        if P.shape != (m, m):
            raise QpInvariantError(f"P must be {m}x{m}, got {P.shape}")
        if inf_norm(P - P.T) > SYMMETRY_TOL * max(1.0, inf_norm(P)):
            raise QpInvariantError("P is not symmetric")

        A_eq = _matrix(self.A_eq, m, 'A_eq')
        A_in = _matrix(self.A_in, m, 'A_in')
        b_eq = _rhs(self.b_eq, A_eq.shape[0], 'b_eq')
        h_in = _rhs(self.h_in, A_in.shape[0], 'h_in')
        lower = (np.full(m, -np.inf) if self.lower is None
                 else _rhs(self.lower, m, 'lower'))
        upper = (np.full(m, np.inf) if self.upper is None
                 else _rhs(self.upper, m, 'upper'))

        for name, arr in (('P', P), ('q', q), ('A_eq', A_eq),
                          ('b_eq', b_eq), ('A_in', A_in), ('h_in', h_in)):
            if not np.all(np.isfinite(arr)):
                raise QpInvariantError(f"{name} has non-finite entries")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise QpInvariantError("bounds contain NaN")
        if np.any(lower > upper):
            raise QpInvariantError("lower bound exceeds upper bound")

        for name, arr in (('P', P), ('q', q), ('A_eq', A_eq),
                          ('b_eq', b_eq), ('A_in', A_in), ('h_in', h_in),
                          ('lower', lower), ('upper', upper)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def size(self) -> int:
        """Number of variables."""
        return int(self.q.shape[0])

    @property
    def n_eq(self) -> int:
        """Number of equality rows."""
        return int(self.A_eq.shape[0])

    @property
    def n_in(self) -> int:
        """Number of inequality rows."""
        return int(self.A_in.shape[0])

    def objective(self, y: np.ndarray) -> float:
        """Evaluate ``1/2 y^t P y + q^t y``."""
        y = np.asarray(y, dtype=float)
        return float(0.5 * y @ self.P @ y + self.q @ y)

    def scaled(self, factor: float) -> 'QpProblem':
        """Same feasible set with the objective multiplied by ``factor``."""
        return QpProblem(P=self.P * factor, q=self.q * factor,
                         A_eq=self.A_eq, b_eq=self.b_eq, A_in=self.A_in,
                         h_in=self.h_in, lower=self.lower, upper=self.upper)


class QpStatus(Enum):
    """Outcome of a QP solve."""

    OPTIMAL = 'optimal'
    INFEASIBLE = 'infeasible'
    ITERATION_LIMIT = 'iteration-limit'


@dataclass(frozen=True)
class KktResiduals:
    """Max-norm primal, dual and complementarity residuals."""

    primal: float
    dual: float
    complementarity: float

    @property
    def worst(self) -> float:
        """Largest of the three residuals."""
        return max(self.primal, self.dual, self.complementarity)

    def within(self, tol: float) -> bool:
        """True when every residual is at most ``tol``."""
        return self.worst <= tol


@dataclass(frozen=True, eq=False)
class QpSolution:
    """
    Result of ``solve_qp``.

    ``y`` is the best point found; for ``infeasible`` results it is only
    the last iterate and ``certificate`` describes the evidence.
    """

    y: np.ndarray
    eq_duals: np.ndarray
    in_duals: np.ndarray
    bound_duals: np.ndarray
    status: QpStatus
    residuals: KktResiduals
    iterations: int = 0
    objective: float = float('nan')
    certificate: Optional[str] = None
    polished: bool = False
    seconds: float = 0.0

    @property
    def is_optimal(self) -> bool:
        """True for status ``optimal``."""
        return self.status is QpStatus.OPTIMAL


def kkt_residuals(p: QpProblem, y: np.ndarray,
                  eq_duals: np.ndarray, in_duals: np.ndarray,
                  bound_duals: np.ndarray) -> KktResiduals:
    """
    Evaluate KKT residuals of a primal-dual pair.

    * primal: largest violation of any equality, inequality or bound
    * dual: max-norm of ``P y + q + A_eq^t lam + A_in^t mu + nu`` together
      with sign violations (``mu < 0``, ``nu > 0`` on an infinite upper
      bound, ``nu < 0`` on an infinite lower bound)
    * complementarity: largest ``|multiplier * slack|`` over inequalities
      and finite bounds

    Args:
        p: Problem
        y: Primal point
        eq_duals: Multipliers of the equality rows
        in_duals: Multipliers of the inequality rows
        bound_duals: Signed multipliers of the box bounds

    Returns:
        KktResiduals: The three residuals

    Raises:
        DimensionError: If any array has the wrong length
    """
    y = np.asarray(y, dtype=float).reshape(-1)
    lam = np.asarray(eq_duals, dtype=float).reshape(-1)
    mu = np.asarray(in_duals, dtype=float).reshape(-1)
    nu = np.asarray(bound_duals, dtype=float).reshape(-1)
    for name, arr, expected in (('y', y, p.size), ('eq_duals', lam, p.n_eq),
                                ('in_duals', mu, p.n_in),
                                ('bound_duals', nu, p.size)):
        if arr.shape[0] != expected:
            raise DimensionError(
                f"{name} must have length {expected}, got {arr.shape[0]}"
            )

    slack_in = p.h_in - p.A_in @ y
    finite_lo = np.isfinite(p.lower)
    finite_up = np.isfinite(p.upper)
    gap_lo = np.where(finite_lo, y - np.where(finite_lo, p.lower, 0.0), 0.0)
    gap_up = np.where(finite_up, np.where(finite_up, p.upper, 0.0) - y, 0.0)

    primal = max(
        inf_norm(p.A_eq @ y - p.b_eq),
        float(np.max(np.maximum(-slack_in, 0.0))) if slack_in.size else 0.0,
        float(np.max(np.maximum(-gap_lo, 0.0))) if y.size else 0.0,
        float(np.max(np.maximum(-gap_up, 0.0))) if y.size else 0.0,
    )

    stationarity = p.P @ y + p.q + p.A_eq.T @ lam + p.A_in.T @ mu + nu
    nu_up = np.maximum(nu, 0.0)
    nu_lo = np.maximum(-nu, 0.0)
    dual = max(
        inf_norm(stationarity),
        inf_norm(np.maximum(-mu, 0.0)),
        inf_norm(nu_up[~finite_up]),
        inf_norm(nu_lo[~finite_lo]),
    )

    complementarity = max(
        inf_norm(mu * slack_in),
        inf_norm(nu_up * gap_up),
        inf_norm(nu_lo * gap_lo),
    )
    return KktResiduals(primal=float(primal), dual=float(dual),
                        complementarity=float(complementarity))


@dataclass
class QpSettings:
    """
    Solver settings shared by every QP solve.

    ``tol`` bounds all three KKT residuals of an ``optimal`` result.
    """

    tol: float = 1e-8
    max_iter: int = 50000
    warm_start: bool = True
    rho: float = 0.1
    sigma: float = 1e-6
    alpha: float = 1.6
    scaling_iter: int = 10
    check_interval: int = 25
    adaptive_rho: bool = True
    polish: bool = True
    infeasibility_tol: float = 1e-8
    phase_one_iter: int = 500
    polish_delta: float = 1e-7
    polish_refine_iter: int = 10
    extra: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.tol <= 0:
            raise ConfigurationError(f"qp tol must be positive: {self.tol}")
        if self.max_iter < 1:
            raise ConfigurationError(
                f"qp max_iter must be positive: {self.max_iter}"
            )
        if self.rho <= 0 or self.sigma <= 0:
            raise ConfigurationError("qp rho and sigma must be positive")
        if not 0.0 < self.alpha < 2.0:
            raise ConfigurationError(
                f"qp alpha must lie in (0, 2): {self.alpha}"
            )
        if self.check_interval < 1:
            raise ConfigurationError("qp check_interval must be positive")

    @classmethod
    def from_config(cls, config: Config) -> 'QpSettings':
        """
        Build settings from the ``qp`` configuration section.

        Args:
            config: Loaded configuration

        Returns:
            QpSettings: Settings with configured values
        """
        section = config.get('qp', {}) or {}
        known = {k: v for k, v in section.items()
                 if k in cls.__dataclass_fields__ and k != 'extra'}
        return cls(**known)


def qp_problem_to_text(p: QpProblem) -> str:
    """Serialize a QP in the instance document style."""
    lines = ['# dcaport qp problem dump', 'format: dcaport-qp/1',
             f'size: {p.size}']
    lines.extend(format_matrix_lines('P', p.P))
    lines.append(f'q: {format_vector(p.q)}')
    lines.extend(format_matrix_lines('A_eq', p.A_eq))
    lines.append(f'b_eq: {format_vector(p.b_eq)}')
    lines.extend(format_matrix_lines('A_in', p.A_in))
    lines.append(f'h_in: {format_vector(p.h_in)}')
    lines.append(f'lower: {format_vector(p.lower)}')
    lines.append(f'upper: {format_vector(p.upper)}')
    return '\n'.join(lines) + '\n'


def dump_qp_problem(p: QpProblem, path: Union[str, Path]) -> Path:
    """
    Write a QP to disk for reproducing solver issues.

    Args:
        p: Problem to dump
        path: Output path

    Returns:
        Path: Written path
    """
    out = ensure_parent_dir(path)
    out.write_text(qp_problem_to_text(p))
    logger.debug(f"Dumped QP with {p.size} variables to {out}")
    return out


def load_qp_problem(path: Union[str, Path]) -> QpProblem:
    """
    Read a QP written by ``dump_qp_problem``.

    Raises:
        DataFormatError: If the document is malformed
    """
    try:
        doc = yaml.safe_load(read_text_file(path))
    except yaml.YAMLError as e:
        raise DataFormatError(f"invalid QP document: {e}")
    if not isinstance(doc, dict) or doc.get('format') != 'dcaport-qp/1':
        raise DataFormatError("not a dcaport QP document")
    m = int(doc['size'])

    def matrix(key: str) -> np.ndarray:
        values = parse_float_list(doc.get(key), key)
        return np.array(values).reshape(-1, m) if m else np.zeros((0, 0))

    def vector(key: str) -> np.ndarray:
        return np.array(parse_float_list(doc.get(key), key))

    A_eq, A_in = matrix('A_eq'), matrix('A_in')
    return QpProblem(P=matrix('P').reshape(m, m), q=vector('q'),
                     A_eq=A_eq, b_eq=vector('b_eq'),
                     A_in=A_in, h_in=vector('h_in'),
                     lower=vector('lower'), upper=vector('upper'))


@dataclass(frozen=True, eq=False)
class QpWarmStart:
    """Primal-dual starting point for a QP solve."""

    y: np.ndarray
    eq_duals: Optional[np.ndarray] = None
    in_duals: Optional[np.ndarray] = None
    bound_duals: Optional[np.ndarray] = None

    @classmethod
    def from_solution(cls, sol: QpSolution) -> 'QpWarmStart':
        """Reuse the point and multipliers of an earlier solve."""
        return cls(y=sol.y, eq_duals=sol.eq_duals, in_duals=sol.in_duals,
                   bound_duals=sol.bound_duals)

    def matches(self, p: QpProblem) -> bool:
        """True when every present array fits the dimensions of ``p``."""
        checks = [(self.y, p.size), (self.eq_duals, p.n_eq),
                  (self.in_duals, p.n_in), (self.bound_duals, p.size)]
        return all(arr is None or np.asarray(arr).reshape(-1).shape[0] == k
                   for arr, k in checks) and self.y is not None
