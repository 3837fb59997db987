"""JSON state files: ``{"dims": [...], "label": ..., "matrix": [[[re, im], ...], ...]}``.

Floats are written with Python's shortest round-trip repr, so reading a
file back reproduces every entry bit for bit.
"""

from __future__ import annotations

import json
from os import PathLike
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .states import DensityOperator, validate


def matrix_to_json(m: np.ndarray) -> list:
    return [[[z.real, z.imag] for z in row] for row in np.asarray(m, dtype=complex).tolist()]


def matrix_from_json(rows) -> np.ndarray:
    try:
        arr = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"matrix entries must be [re, im] pairs: {exc}") from exc
    if arr.ndim != 3 or arr.shape[-1] != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"matrix must be D x D x 2, got shape {arr.shape}")
    return arr[..., 0] + 1j * arr[..., 1]


def dump_matrix(m: np.ndarray, dims: Sequence[int], label: str | None = None) -> str:
    doc: dict = {"dims": [int(d) for d in dims]}
    if label is not None:
        doc["label"] = label
    doc["matrix"] = matrix_to_json(m)
    return json.dumps(doc)


def write_matrix(path: str | PathLike, m: np.ndarray, dims: Sequence[int], label=None):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(dump_matrix(m, dims, label) + "\n")


def read_matrix(path: str | PathLike) -> tuple[np.ndarray, tuple[int, ...], str | None]:
    """Parse a state file without checking that it holds a density operator
    or that ``dims`` fits the matrix."""
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or "dims" not in doc or "matrix" not in doc:
        raise ValueError("state file needs 'dims' and 'matrix' keys")
    m = matrix_from_json(doc["matrix"])
    try:
        dims = tuple(int(d) for d in doc["dims"])
    except (TypeError, ValueError):
        raise ValueError(f"dims must be a list of integers, got {doc['dims']!r}") from None
    label = doc.get("label")
    return m, dims, None if label is None else str(label)


def write_state(path: str | PathLike, rho: DensityOperator, label: str | None = None):
    write_matrix(path, rho.matrix, rho.dims, label)


def read_state(path: str | PathLike) -> DensityOperator:
    """Load and validate a density operator.

    Raises
    ------
    ValidationError
        If the matrix or its dims fail validation.
    """
    try:
        m, dims, _ = read_matrix(path)
    except ValueError as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError("format", float("nan"), str(exc)) from exc
    return validate(m, dims)
