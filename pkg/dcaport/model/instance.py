"""
Problem data for the cardinality-constrained mean-variance model.

An ``Instance`` carries the asset statistics, holding bounds, transaction
cost rates, current and benchmark portfolios and the cardinality target. A
``Point`` is one candidate ``(x, x_b, x_s, z)`` of the relaxed problem. All
portfolio quantities are fractions of wealth.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from dcaport.utils.exceptions import DimensionError, ValidationError

CARD_MODES = ('eq', 'le')

SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
# raw asymmetry above this (relative to max|Q|) is more than rounding noise
ASYMMETRY_FLAG_TOL = 1e-8
# clipping slack for solver output that lands a hair outside its bounds
POINT_CLIP_TOL = 1e-7


def _vector(values, n: int, name: str) -> np.ndarray:
    """Broadcast a scalar or sequence to a read-only float vector of size n."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 0:
        arr = np.full(n, float(arr))
    arr = arr.reshape(-1) if arr.ndim == 1 else arr
    if arr.shape != (n,):
        raise DimensionError(
            f"{name} must have length {n}, got shape {arr.shape}"
        )
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Instance:
    """
    Immutable data of one cardinality-constrained portfolio problem.

    Attributes:
        r: Mean return per asset
        Q: Variance-covariance matrix (symmetrized on construction)
        R: Required expected net return
        card: Number of assets to select
        a: Lower holding fraction per selected asset
        b: Upper holding fraction per selected asset
        c_b: Linear buying cost rates
        c_s: Linear selling cost rates
        P: Current holding portfolio
        x_bar: Benchmark portfolio
        card_mode: ``'eq'`` for exactly ``card`` assets, ``'le'`` for at most
        asset_ids: Optional asset labels
    """

    r: np.ndarray
    Q: np.ndarray
    R: float
    card: int
    a: np.ndarray
    b: np.ndarray
    c_b: np.ndarray
    c_s: np.ndarray
    P: np.ndarray
    x_bar: np.ndarray
    card_mode: str = 'eq'
    asset_ids: Optional[Tuple[str, ...]] = None
    raw_asymmetry: float = field(default=0.0, init=False)

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float).reshape(-1)
        n = r.shape[0]
        if n < 1:
            raise DimensionError("an instance needs at least one asset")

        Q = np.array(self.Q, dtype=float)
        if Q.shape != (n, n):
            raise DimensionError(
                f"Q must be {n}x{n}, got shape {Q.shape}"
            )
        asymmetry = float(np.max(np.abs(Q - Q.T)))
        Q = (Q + Q.T) / 2.0
        Q.setflags(write=False)

        if self.card_mode not in CARD_MODES:
            raise ValidationError(
                f"card_mode must be one of {CARD_MODES}, "
                f"got {self.card_mode!r}"
            )
        if self.asset_ids is not None and len(self.asset_ids) != n:
            raise DimensionError(
                f"asset_ids must have length {n}, "
                f"got {len(self.asset_ids)}"
            )

        set_ = object.__setattr__
        set_(self, 'r', _vector(r, n, 'r'))
        set_(self, 'Q', Q)
        set_(self, 'R', float(self.R))
        set_(self, 'card', int(self.card))
        for name in ('a', 'b', 'c_b', 'c_s', 'P', 'x_bar'):
            set_(self, name, _vector(getattr(self, name), n, name))
        if self.asset_ids is not None:
            set_(self, 'asset_ids', tuple(str(s) for s in self.asset_ids))
        set_(self, 'raw_asymmetry', asymmetry)

    @property
    def n(self) -> int:
        """Number of assets."""
        return int(self.r.shape[0])

    def labels(self) -> Tuple[str, ...]:
        """Asset labels, defaulting to 1-based positions."""
        if self.asset_ids is not None:
            return self.asset_ids
        return tuple(str(j + 1) for j in range(self.n))

    def with_changes(self, **changes) -> 'Instance':
        """Return a copy with some fields replaced."""
        fields = {
            'r': self.r, 'Q': self.Q, 'R': self.R, 'card': self.card,
            'a': self.a, 'b': self.b, 'c_b': self.c_b, 'c_s': self.c_s,
            'P': self.P, 'x_bar': self.x_bar, 'card_mode': self.card_mode,
            'asset_ids': self.asset_ids,
        }
        fields.update(changes)
        return Instance(**fields)

    def permuted(self, order: Sequence[int]) -> 'Instance':
        """Return the instance with assets reordered by ``order``."""
        idx = np.asarray(order, dtype=int)
        if sorted(idx.tolist()) != list(range(self.n)):
            raise DimensionError("order must be a permutation of the assets")
        ids = None
        if self.asset_ids is not None:
            ids = tuple(self.asset_ids[i] for i in idx)
        return self.with_changes(
            r=self.r[idx], Q=self.Q[np.ix_(idx, idx)],
            a=self.a[idx], b=self.b[idx], c_b=self.c_b[idx],
            c_s=self.c_s[idx], P=self.P[idx], x_bar=self.x_bar[idx],
            asset_ids=ids,
        )


@dataclass(frozen=True, eq=False)
class Point:
    """
    One candidate ``(x, x_b, x_s, z)`` in the relaxed feasible space.

    Attributes:
        x: Holdings
        x_b: Purchases
        x_s: Sales
        z: Selection indicators in [0, 1]
    """

    x: np.ndarray
    x_b: np.ndarray
    x_s: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        n = np.asarray(self.x).reshape(-1).shape[0]
        for name in ('x', 'x_b', 'x_s', 'z'):
            vec = _vector(getattr(self, name), n, name)
            if not np.all(np.isfinite(vec)):
                raise ValidationError(f"{name} has non-finite components")
            if np.any(vec < 0.0):
                raise ValidationError(f"{name} has negative components")
            if name == 'z' and np.any(vec > 1.0):
                raise ValidationError("z has components above 1")
            object.__setattr__(self, name, vec)

    @property
    def n(self) -> int:
        """Number of assets."""
        return int(self.x.shape[0])

    def stacked(self) -> np.ndarray:
        """Concatenate into the 4n vector ``(x, x_b, x_s, z)``."""
        return np.concatenate([self.x, self.x_b, self.x_s, self.z])

    @classmethod
    def from_stacked(cls, y: np.ndarray, n: int,
                     holdings: Optional[np.ndarray] = None) -> 'Point':
        """
        Build a point from a stacked solver vector.

        Components within ``POINT_CLIP_TOL`` of their bounds are clipped onto
        them. When ``holdings`` is given, trades are replaced by the
        canonical split ``x_b = max(x - P, 0)``, ``x_s = max(P - x, 0)``,
        which keeps the balance equation and never raises costs.

        Args:
            y: Vector of length 4n
            n: Number of assets
            holdings: Current portfolio P for trade canonicalization

        Returns:
            Point: The clipped point

        Raises:
            DimensionError: If y has the wrong length
            ValidationError: If y is outside its bounds beyond the slack
        """
        y = np.asarray(y, dtype=float).reshape(-1)
        if y.shape[0] != 4 * n:
            raise DimensionError(
                f"stacked vector must have length {4 * n}, got {y.shape[0]}"
            )
        if np.any(y < -POINT_CLIP_TOL):
            raise ValidationError(
                f"solver output is negative beyond tolerance "
                f"(min {float(y.min()):.3e})"
            )
        y = np.maximum(y, 0.0)
        x, x_b, x_s, z = (y[k * n:(k + 1) * n] for k in range(4))
        if np.any(z > 1.0 + POINT_CLIP_TOL):
            raise ValidationError(
                f"solver output z exceeds 1 beyond tolerance "
                f"(max {float(z.max()):.3e})"
            )
        z = np.minimum(z, 1.0)
        if holdings is not None:
            x_b = np.maximum(x - holdings, 0.0)
            x_s = np.maximum(holdings - x, 0.0)
        return cls(x=x, x_b=x_b, x_s=x_s, z=z)


@dataclass(frozen=True)
class ValidationReport:
    """Structural problems found in an instance; empty means usable."""

    violations: Tuple[str, ...] = ()

    @property
    def is_valid(self) -> bool:
        """True when no violation was found."""
        return not self.violations

    def raise_if_invalid(self) -> None:
        """
        Raise when the report lists violations.

        Raises:
            ValidationError: Carrying the violation list
        """
        if self.violations:
            raise ValidationError(
                "instance is not usable: " + "; ".join(self.violations),
                list(self.violations)
            )


def max_gross_return(r: np.ndarray, b: np.ndarray) -> float:
    """
    Largest ``x^t r`` over ``{sum x = 1, 0 <= x <= b}``.

    Greedy fractional knapsack; returns ``-inf`` when the budget cannot be
    filled.
    """
    remaining = 1.0
    total = 0.0
    for j in np.argsort(-r, kind='stable'):
        take = min(float(b[j]), remaining)
        if take <= 0.0:
            continue
        total += take * float(r[j])
        remaining -= take
        if remaining <= 0.0:
            return total
    return -np.inf if remaining > 1e-12 else total


def validate_instance(inst: Instance) -> ValidationReport:
    """
    List every violated structural invariant of an instance.

    Checks asymmetry beyond rounding, negative curvature, bound order, the
    cardinality range, necessary budget feasibility, nonnegativity of cost
    rates and portfolios and reachability of the required return.

    Args:
        inst: Instance to check

    Returns:
        ValidationReport: Empty when the instance is usable
    """
    violations: List[str] = []
    n = inst.n

    arrays = {'r': inst.r, 'Q': inst.Q, 'a': inst.a, 'b': inst.b,
              'c_b': inst.c_b, 'c_s': inst.c_s, 'P': inst.P,
              'x_bar': inst.x_bar}
    for name, arr in arrays.items():
        if not np.all(np.isfinite(arr)):
            violations.append(f"{name} has non-finite entries")
    if not np.isfinite(inst.R):
        violations.append("R is not finite")
    if violations:
        return ValidationReport(tuple(violations))

    scale = max(1.0, float(np.max(np.abs(inst.Q))))
    if inst.raw_asymmetry > ASYMMETRY_FLAG_TOL * scale:
        violations.append(
            f"Q is not symmetric (max asymmetry {inst.raw_asymmetry:.3e})"
        )

    min_eig = float(np.linalg.eigvalsh(inst.Q)[0])
    if min_eig < -PSD_TOL:
        violations.append(
            f"Q is not positive semidefinite "
            f"(smallest eigenvalue {min_eig:.3e})"
        )

    if np.any(inst.a < 0.0):
        violations.append("a_j < 0 for some asset")
    if np.any(inst.b > 1.0):
        violations.append("b_j > 1 for some asset")
    bad = np.flatnonzero(inst.a > inst.b)
    if bad.size:
        violations.append(
            "a_j > b_j for assets "
            + ", ".join(str(j + 1) for j in bad)
        )

    if inst.card < 1:
        violations.append("card < 1")
    elif inst.card > n:
        violations.append("card > n")
    else:
        smallest_a = float(np.sort(inst.a)[:inst.card].sum())
        largest_b = float(np.sort(inst.b)[::-1][:inst.card].sum())
        if inst.card_mode == 'le':
            smallest_a = float(np.min(inst.a))
        if smallest_a > 1.0 + 1e-12:
            violations.append(
                "sum of lower bounds over any support exceeds budget 1"
            )
        if largest_b < 1.0 - 1e-12:
            violations.append(
                "sum of upper bounds over any support cannot reach budget 1"
            )

    for name in ('c_b', 'c_s', 'P', 'x_bar'):
        if np.any(arrays[name] < 0.0):
            violations.append(f"{name} has negative entries")

    # costs are nonnegative, so gross return bounds net return from above
    reachable = max_gross_return(inst.r, np.clip(inst.b, 0.0, 1.0))
    reachable -= float(inst.x_bar @ inst.r)
    if inst.R > reachable + 1e-12:
        violations.append(
            f"return constraint unsatisfiable: R={inst.R:.6g} exceeds the "
            f"largest achievable net return {reachable:.6g}"
        )

    return ValidationReport(tuple(violations))


def objective(inst: Instance, x) -> float:
    """
    Tracking risk ``(x - x_bar)^t Q (x - x_bar)``.

    Args:
        inst: Problem instance
        x: Holdings of length n

    Returns:
        float: Risk value (nonnegative when Q is PSD)

    Raises:
        DimensionError: If x has the wrong length or is not finite
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != inst.n:
        raise DimensionError(
            f"x must have length {inst.n}, got {x.shape[0]}"
        )
    if not np.all(np.isfinite(x)):
        raise DimensionError("x has non-finite components")
    d = x - inst.x_bar
    return float(d @ inst.Q @ d)
