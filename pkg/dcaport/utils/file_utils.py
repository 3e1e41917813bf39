"""
File handling utilities for dcaport.

Provides validated file access for the data loaders and the benchmark store.
"""

import hashlib
import os
from pathlib import Path
from typing import Union

from dcaport.utils.exceptions import FileAccessError
from dcaport.utils.logger import get_logger

logger = get_logger()

# Upper bound on accepted input file size
DEFAULT_MAX_SIZE = 256 * 1024 * 1024


def validate_file_path(file_path: Union[str, Path]) -> Path:
    """
    Validate and normalize a file path.

    Args:
        file_path: Path to the file

    Returns:
        Path: Validated Path object

    Raises:
        FileAccessError: If the file doesn't exist, is a directory or is
            not readable
    """
    try:
        path = Path(file_path).resolve()

        if not path.exists():
            raise FileAccessError(f"File does not exist: {file_path}")

        if not path.is_file():
            raise FileAccessError(f"Path is not a file: {file_path}")

        if not os.access(path, os.R_OK):
            raise FileAccessError(f"File is not readable: {file_path}")

        return path

    except OSError as e:
        raise FileAccessError(f"Cannot access file {file_path}: {str(e)}")


def read_text_file(file_path: Union[str, Path],
                   max_size: int = DEFAULT_MAX_SIZE) -> str:
    """
    Read a text file after validating path and size.

    Args:
        file_path: Path to the file
        max_size: Maximum accepted size in bytes

    Returns:
        str: File contents

    Raises:
        FileAccessError: If the file cannot be read or is too large
    """
    path = validate_file_path(file_path)
    size = path.stat().st_size
    if size > max_size:
        raise FileAccessError(
            f"File too large: {size} bytes (max: {max_size})"
        )
    try:
        return path.read_text()
    except (OSError, UnicodeDecodeError) as e:
        raise FileAccessError(f"Cannot read file {file_path}: {str(e)}")


def compute_file_hash(file_path: Union[str, Path],
                      algorithm: str = 'sha256') -> str:
    """
    Compute the hex digest of a file.

    Args:
        file_path: Path to the file
        algorithm: Any algorithm known to ``hashlib``

    Returns:
        str: Hexadecimal digest

    Raises:
        ValueError: If the algorithm is unknown
        FileAccessError: If the file cannot be read
    """
    if algorithm not in hashlib.algorithms_available:
        raise ValueError(f"Unsupported hash algorithm: {algorithm}")

    path = validate_file_path(file_path)
    digest = hashlib.new(algorithm)
    try:
        with open(path, 'rb') as f:
            for chunk in iter(lambda: f.read(65536), b''):
                digest.update(chunk)
    except OSError as e:
        raise FileAccessError(f"Cannot hash file {file_path}: {str(e)}")
    return digest.hexdigest()


def ensure_parent_dir(file_path: Union[str, Path]) -> Path:
    """
    Create the parent directory of an output path if needed.

    Args:
        file_path: Output file path

    Returns:
        Path: The output path
    """
    path = Path(file_path)
    path.parent.mkdir(parents=True, exist_ok=True)
    return path
