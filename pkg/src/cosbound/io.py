"""Dataset file parsing.

Dense files: CSV, one vector per line, decimal components. Sparse files:
one vector per line of whitespace-separated ``index:value`` tokens with
strictly ascending indices and no label column. Parse errors cite the file
and 1-based line number. Blank lines are rejected so that the i-th vector
always sits on line i.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Union

from .errors import DataFormatError, NonFinite
from .vectors import DenseVector, SparseVector


def _parse_component(token: str, where: str) -> float:
    try:
        value = float(token)
    except ValueError:
        raise DataFormatError(f"{where}: not a number: {token!r}") from None
    if not math.isfinite(value):
        raise DataFormatError(f"{where}: non-finite component: {token!r}")
    return value


def parse_dense_line(line: str, where: str = "inline vector") -> DenseVector:
    tokens = [t.strip() for t in line.split(",")]
    if any(t == "" for t in tokens):
        raise DataFormatError(f"{where}: empty component")
    return DenseVector([_parse_component(t, where) for t in tokens])


def parse_sparse_line(line: str, where: str = "inline vector") -> SparseVector:
    entries = []
    last_index = -1
    for token in line.split():
        head, sep, tail = token.partition(":")
        if not sep or not head or not tail:
            raise DataFormatError(f"{where}: expected index:value, got {token!r}")
        try:
            index = int(head)
        except ValueError:
            raise DataFormatError(f"{where}: not an integer index: {head!r}") from None
        if index < 0:
            raise DataFormatError(f"{where}: negative index: {index}")
        if index <= last_index:
            raise DataFormatError(f"{where}: indices must be strictly ascending at {token!r}")
        value = _parse_component(tail, where)
        if value == 0.0:
            raise DataFormatError(f"{where}: explicit zero value at {token!r}")
        entries.append((index, value))
        last_index = index
    return SparseVector(entries)


def _load(path: Union[str, Path], parse_line) -> list:
    path = Path(path)
    out = []
    try:
        with open(path, "r", encoding="utf-8") as f:
            for lineno, raw in enumerate(f, start=1):
                line = raw.strip()
                where = f"{path}:{lineno}"
                if not line:
                    raise DataFormatError(f"{where}: blank line")
                try:
                    out.append(parse_line(line, where))
                except NonFinite as e:
                    raise DataFormatError(f"{where}: {e}") from None
    except OSError as e:
        raise DataFormatError(f"{path}: {e.strerror or e}") from None
    if not out:
        raise DataFormatError(f"{path}: file holds no vectors")
    return out


def load_dense(path: Union[str, Path]) -> list[DenseVector]:
    """Read a dense CSV dataset; one vector per line."""
    return _load(path, parse_dense_line)


def load_sparse(path: Union[str, Path]) -> list[SparseVector]:
    """Read a sparse index:value dataset; one vector per line."""
    return _load(path, parse_sparse_line)
