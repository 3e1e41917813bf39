"""
Parser for OR-Library portfolio statistics files.

Layout: line 1 holds the asset count n; the next n lines hold
``mean stddev`` per asset; the remaining n(n+1)/2 lines hold
``i j correlation`` for the upper triangle, 1-based, ``i <= j``.
"""

from pathlib import Path
from typing import List, Tuple, Union

import numpy as np

from dcaport.data.prices import MomentEstimate
from dcaport.utils.exceptions import DataFormatError
from dcaport.utils.file_utils import read_text_file
from dcaport.utils.logger import get_logger

logger = get_logger()


def _numbers(tokens: List[str], line: int, count: int) -> List[float]:
    if len(tokens) != count:
        raise DataFormatError(
            f"expected {count} fields, found {len(tokens)}", line=line
        )
    values = []
    for column, token in enumerate(tokens, start=1):
        try:
            values.append(float(token))
        except ValueError:
            raise DataFormatError(
                f"cannot parse number {token!r}", line=line, column=column
            )
    return values


def parse_orlib(text: str) -> MomentEstimate:
    """
    Parse OR-Library statistics text.

    Args:
        text: File contents

    Returns:
        MomentEstimate: Means and the covariance ``corr_ij * s_i * s_j``

    Raises:
        DataFormatError: On wrong counts, out-of-range correlations,
            lower-triangle or duplicate entries
    """
    lines: List[Tuple[int, List[str]]] = [
        (number, raw.split())
        for number, raw in enumerate(text.splitlines(), start=1)
        if raw.strip()
    ]
    if not lines:
        raise DataFormatError("statistics file is empty")

    first_line, first = lines[0]
    if len(first) != 1:
        raise DataFormatError("first line must hold the asset count",
                              line=first_line)
    try:
        n = int(first[0])
    except ValueError:
        raise DataFormatError(f"cannot parse asset count {first[0]!r}",
                              line=first_line, column=1)
    if n < 1:
        raise DataFormatError(f"asset count must be positive, got {n}",
                              line=first_line)

    if len(lines) < 1 + n:
        raise DataFormatError(
            f"expected {n} mean/stddev lines, found {len(lines) - 1}"
        )
    means = np.empty(n)
    stddevs = np.empty(n)
    for k in range(n):
        number, tokens = lines[1 + k]
        mean, stddev = _numbers(tokens, number, 2)
        if stddev < 0.0:
            raise DataFormatError(f"negative standard deviation {stddev}",
                                  line=number, column=2)
        means[k] = mean
        stddevs[k] = stddev

    expected = n * (n + 1) // 2
    corr_lines = lines[1 + n:]
    if len(corr_lines) != expected:
        raise DataFormatError(
            f"expected {expected} correlation entries, "
            f"found {len(corr_lines)}"
        )

    corr = np.zeros((n, n))
    seen = np.zeros((n, n), dtype=bool)
    for number, tokens in corr_lines:
        i_val, j_val, rho = _numbers(tokens, number, 3)
        i, j = int(i_val), int(j_val)
        if i != i_val or j != j_val or not (1 <= i <= n and 1 <= j <= n):
            raise DataFormatError(
                f"asset indices must be integers in 1..{n}", line=number
            )
        if i > j:
            raise DataFormatError(
                f"entry ({i}, {j}) is below the diagonal", line=number
            )
        if not -1.0 <= rho <= 1.0:
            raise DataFormatError(
                f"correlation {rho} outside [-1, 1]", line=number, column=3
            )
        if seen[i - 1, j - 1]:
            raise DataFormatError(f"duplicate entry ({i}, {j})", line=number)
        seen[i - 1, j - 1] = True
        corr[i - 1, j - 1] = corr[j - 1, i - 1] = rho

    Q = corr * np.outer(stddevs, stddevs)
    return MomentEstimate(r=means, Q=Q, T_used=0)


def load_orlib(path: Union[str, Path]) -> MomentEstimate:
    """
    Load an OR-Library statistics file.

    Args:
        path: Path to the file

    Returns:
        MomentEstimate: Means and covariance

    Raises:
        FileAccessError: If the file cannot be read
        DataFormatError: If the file does not follow the layout
    """
    estimate = parse_orlib(read_text_file(path))
    logger.info(f"Loaded OR-Library statistics for {estimate.n} assets "
                f"from {Path(path).name}")
    return estimate
