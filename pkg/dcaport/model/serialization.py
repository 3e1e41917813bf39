"""
Text documents for instances.

Instances are stored as YAML key/value documents. Floats are written with 17
significant digits and read back with ``float()``, so a write-then-read cycle
reproduces every value bit for bit. Matrices are written row-major, one row
per line.
"""

import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Mapping, Union

import numpy as np
import yaml

from dcaport.model.instance import Instance
from dcaport.utils.exceptions import DataFormatError
from dcaport.utils.file_utils import ensure_parent_dir, read_text_file
from dcaport.utils.logger import get_logger

logger = get_logger()

INSTANCE_FORMAT = 'dcaport-instance/1'

VECTOR_FIELDS = ('r', 'a', 'b', 'c_b', 'c_s', 'P', 'x_bar')


def format_float(value: float) -> str:
    """Render a float so that ``float()`` recovers it exactly."""
    value = float(value)
    if value == 0.0:
        return '-0.0' if np.signbit(value) else '0.0'
    return '%.17g' % value


def format_vector(values: Iterable[float]) -> str:
    """Render a flow-style YAML list of exact floats."""
    return '[' + ', '.join(format_float(v) for v in values) + ']'


def format_matrix_lines(key: str, matrix: np.ndarray) -> List[str]:
    """Render a matrix as a block list of rows under ``key``."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    if matrix.shape[0] == 0:
        return [f'{key}: []']
    lines = [f'{key}:']
    for row in matrix:
        lines.append('  - ' + format_vector(row))
    return lines


def parse_float_list(value: Any, key: str) -> List[float]:
    """
    Convert a parsed YAML list (possibly nested) into floats.

    Raises:
        DataFormatError: If an entry is not numeric
    """
    if value is None:
        return []
    if not isinstance(value, list):
        value = [value]
    out: List[float] = []
    for item in value:
        if isinstance(item, list):
            out.extend(parse_float_list(item, key))
            continue
        try:
            out.append(float(item))
        except (TypeError, ValueError):
            raise DataFormatError(f"non-numeric entry {item!r} in '{key}'")
    return out


def instance_to_text(inst: Instance) -> str:
    """
    Serialize an instance to its text document.

    Args:
        inst: Instance to serialize

    Returns:
        str: YAML document
    """
    lines = [
        '# dcaport instance document',
        f'format: {INSTANCE_FORMAT}',
        f'n: {inst.n}',
        f'card: {inst.card}',
        f'card_mode: {inst.card_mode}',
        f'R: {format_float(inst.R)}',
    ]
    for name in VECTOR_FIELDS:
        lines.append(f'{name}: {format_vector(getattr(inst, name))}')
    lines.extend(format_matrix_lines('Q', inst.Q))
    if inst.asset_ids is not None:
        lines.append(
            'asset_ids: [' + ', '.join(json.dumps(s) for s in inst.asset_ids)
            + ']'
        )
    return '\n'.join(lines) + '\n'


def _require(doc: Mapping[str, Any], key: str) -> Any:
    if key not in doc:
        raise DataFormatError(f"instance document is missing '{key}'")
    return doc[key]


def instance_from_mapping(doc: Mapping[str, Any]) -> Instance:
    """
    Build an instance from a parsed document.

    Args:
        doc: Mapping as produced by ``yaml.safe_load``

    Returns:
        Instance: Parsed instance

    Raises:
        DataFormatError: If keys are missing or malformed
    """
    fmt = doc.get('format', INSTANCE_FORMAT)
    if fmt != INSTANCE_FORMAT:
        raise DataFormatError(f"unsupported instance format {fmt!r}")

    try:
        n = int(_require(doc, 'n'))
        card = int(_require(doc, 'card'))
    except (TypeError, ValueError):
        raise DataFormatError("'n' and 'card' must be integers")
    if n < 1:
        raise DataFormatError(f"'n' must be positive, got {n}")

    fields: Dict[str, Any] = {}
    for name in VECTOR_FIELDS:
        values = parse_float_list(_require(doc, name), name)
        if len(values) != n:
            raise DataFormatError(
                f"'{name}' has {len(values)} entries, expected {n}"
            )
        fields[name] = np.array(values)

    q_values = parse_float_list(_require(doc, 'Q'), 'Q')
    if len(q_values) != n * n:
        raise DataFormatError(
            f"'Q' has {len(q_values)} entries, expected {n * n}"
        )
    R_values = parse_float_list(_require(doc, 'R'), 'R')
    if len(R_values) != 1:
        raise DataFormatError("'R' must be a single number")

    ids = doc.get('asset_ids')
    return Instance(
        Q=np.array(q_values).reshape(n, n),
        R=R_values[0],
        card=card,
        card_mode=str(doc.get('card_mode', 'eq')),
        asset_ids=tuple(str(s) for s in ids) if ids else None,
        **fields,
    )


def instance_from_text(text: str) -> Instance:
    """
    Parse an instance document.

    Raises:
        DataFormatError: If the text is not a valid instance document
    """
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        raise DataFormatError(
            f"invalid instance document: {getattr(e, 'problem', e)}",
            line=mark.line + 1 if mark is not None else None,
            column=mark.column + 1 if mark is not None else None,
        )
    if not isinstance(doc, dict):
        raise DataFormatError("instance document must be a mapping")
    return instance_from_mapping(doc)


def write_instance(inst: Instance, path: Union[str, Path]) -> Path:
    """
    Write an instance document to disk.

    Args:
        inst: Instance to write
        path: Output path

    Returns:
        Path: The written path
    """
    out = ensure_parent_dir(path)
    out.write_text(instance_to_text(inst))
    logger.debug(f"Wrote instance with n={inst.n} to {out}")
    return out


def read_instance(path: Union[str, Path]) -> Instance:
    """
    Read an instance document from disk.

    Args:
        path: Input path

    Returns:
        Instance: Parsed instance
    """
    inst = instance_from_text(read_text_file(path))
    logger.debug(f"Read instance with n={inst.n} from {path}")
    return inst
