"""
Price series ingestion and moment estimation.

Prices are read from a delimiter-separated table with a header row of asset
identifiers and one period per row. Moments are the mean and the unbiased
sample covariance of simple per-period returns.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple, Union

import numpy as np
import pandas as pd

from dcaport.utils.exceptions import DataFormatError, ValidationError
from dcaport.utils.file_utils import validate_file_path
from dcaport.utils.logger import get_logger

logger = get_logger()

MIN_PERIODS = 3


@dataclass(frozen=True, eq=False)
class PriceSeries:
    """
    Per-period prices of a set of assets.

    Attributes:
        asset_ids: Asset identifiers, one per column
        prices: T x n matrix of positive prices
        period: Free-text period label such as ``"weekly"``
    """

    asset_ids: Tuple[str, ...]
    prices: np.ndarray
    period: str = 'weekly'

    def __post_init__(self):
        prices = np.array(self.prices, dtype=float)
        if prices.ndim != 2 or prices.shape[1] != len(self.asset_ids):
            raise ValidationError(
                f"prices must be T x {len(self.asset_ids)}, "
                f"got shape {prices.shape}"
            )
        if prices.shape[0] < MIN_PERIODS:
            raise ValidationError(
                f"T >= {MIN_PERIODS} required, got {prices.shape[0]} periods"
            )
        if not np.all(np.isfinite(prices)) or np.any(prices <= 0.0):
            raise ValidationError("all prices must be positive and finite")
        prices.setflags(write=False)
        object.__setattr__(self, 'prices', prices)
        object.__setattr__(self, 'asset_ids',
                           tuple(str(s) for s in self.asset_ids))

    @property
    def n(self) -> int:
        """Number of assets."""
        return int(self.prices.shape[1])

    @property
    def T(self) -> int:
        """Number of price periods."""
        return int(self.prices.shape[0])

    def to_frame(self) -> pd.DataFrame:
        """Prices as a DataFrame with asset columns."""
        return pd.DataFrame(self.prices, columns=list(self.asset_ids))


@dataclass(frozen=True, eq=False)
class MomentEstimate:
    """
    Mean returns and covariance of a set of assets.

    Attributes:
        r: Mean simple return per asset
        Q: Sample covariance of returns
        T_used: Number of return observations (0 when unknown)
        asset_ids: Optional asset identifiers
    """

    r: np.ndarray
    Q: np.ndarray
    T_used: int = 0
    asset_ids: Optional[Tuple[str, ...]] = None

    @property
    def n(self) -> int:
        """Number of assets."""
        return int(np.asarray(self.r).shape[0])


def load_prices(path: Union[str, Path], delimiter: str = ',',
                period: str = 'weekly') -> PriceSeries:
    """
    Load a price table.

    Args:
        path: Path to the delimiter-separated price file
        delimiter: Field separator
        period: Period label stored on the series

    Returns:
        PriceSeries: Parsed prices

    Raises:
        FileAccessError: If the file cannot be read
        DataFormatError: On malformed cells, missing or non-positive prices,
            inconsistent column counts or too few rows
    """
    file_path = validate_file_path(path)
    try:
        frame = pd.read_csv(file_path, sep=delimiter, dtype=str,
                            keep_default_na=False, skipinitialspace=True)
    except pd.errors.EmptyDataError:
        raise DataFormatError(f"price file is empty: {path}")
    except pd.errors.ParserError as e:
        # pandas reports "Expected k fields in line L, saw m"
        raise DataFormatError(f"inconsistent column count: {str(e).strip()}")

    asset_ids = [str(c).strip() for c in frame.columns]
    if not asset_ids or any(not c or c.startswith('Unnamed:')
                            for c in asset_ids):
        raise DataFormatError("header row must name every asset", line=1)

    values = np.empty(frame.shape, dtype=float)
    for i, row in enumerate(frame.itertuples(index=False, name=None)):
        line = i + 2
        for j, cell in enumerate(row):
            text = cell.strip() if isinstance(cell, str) else ''
            if not text:
                raise DataFormatError(
                    f"missing price for asset {asset_ids[j]!r}; row {line} "
                    f"rejected", line=line, column=j + 1
                )
            try:
                price = float(text)
            except ValueError:
                raise DataFormatError(
                    f"cannot parse price {text!r}", line=line, column=j + 1
                )
            if not np.isfinite(price) or price <= 0.0:
                raise DataFormatError(
                    f"non-positive price {text!r}; row {line} rejected",
                    line=line, column=j + 1
                )
            values[i, j] = price

    if values.shape[0] < MIN_PERIODS:
        raise DataFormatError(
            f"T >= {MIN_PERIODS} required, found {values.shape[0]} "
            f"price rows in {path}"
        )

    logger.info(
        f"Loaded {values.shape[0]} {period} prices for "
        f"{len(asset_ids)} assets from {file_path.name}"
    )
    return PriceSeries(asset_ids=tuple(asset_ids), prices=values,
                       period=period)


def estimate_moments(ps: PriceSeries) -> MomentEstimate:
    """
    Estimate mean returns and covariance from prices.

    Returns are simple returns ``(p[t+1] - p[t]) / p[t]``; the covariance
    uses divisor ``T_used - 1``.

    Args:
        ps: Price series

    Returns:
        MomentEstimate: Mean returns, covariance and observation count
    """
    returns = ps.to_frame().pct_change().iloc[1:]
    r = returns.mean().to_numpy(dtype=float)
    Q = returns.cov(ddof=1).to_numpy(dtype=float)
    Q = (Q + Q.T) / 2.0
    logger.debug(
        f"Estimated moments from {len(returns)} {ps.period} returns"
    )
    return MomentEstimate(r=r, Q=Q, T_used=int(len(returns)),
                          asset_ids=ps.asset_ids)
