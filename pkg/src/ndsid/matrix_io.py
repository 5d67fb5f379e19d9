"""Plain-text matrix format.

The first line holds ``rows cols``; each following line holds one row of
whitespace-separated decimal floats.  Floats are written with ``repr`` so a
write/read cycle is bit-exact.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import FormatError


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if M.ndim != 2:
        raise FormatError(f"expected a 2-D matrix, got shape {M.shape}")
    lines = [f"{M.shape[0]} {M.shape[1]}"]
    lines += [" ".join(repr(float(v)) for v in row) for row in M]
    Path(path).write_text("\n".join(lines) + "\n")


def read_matrix(path) -> np.ndarray:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise FormatError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError(f"{path}: empty file")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"{path}: header must be 'rows cols'")
    try:
        rows, cols = int(head[0]), int(head[1])
    except ValueError as exc:
        raise FormatError(f"{path}: bad header {lines[0]!r}") from exc
    if len(lines) - 1 != rows:
        raise FormatError(f"{path}: header says {rows} rows, found {len(lines) - 1}")
    out = np.empty((rows, cols))
    for r, ln in enumerate(lines[1:]):
        parts = ln.split()
        if len(parts) != cols:
            raise FormatError(f"{path}: row {r} has {len(parts)} entries, expected {cols}")
        try:
            out[r] = [float(p) for p in parts]
        except ValueError as exc:
            raise FormatError(f"{path}: row {r} is not numeric") from exc
    return out
