"""CSV readers and writers for matrices, kernel triples and trajectories."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, TextIO

import numpy as np


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def write_matrix_block(fh: TextIO, F: np.ndarray) -> None:
    F = np.atleast_2d(F)
    if F.shape[0] != F.shape[1]:
        raise ValueError("only square matrices are serialized")
    fh.write(f"dim={F.shape[0]}\n")
    for row in F:
        fh.write(",".join(_fmt(v) for v in row) + "\n")


def _read_matrix_block(lines: list[str], start: int, source: str) -> tuple[np.ndarray, int]:
    header = lines[start].strip()
    if not header.startswith("dim="):
        raise ValueError(f"{source}: line {start + 1}: expected 'dim=<n>', got {header!r}")
    try:
        n = int(header[4:])
    except ValueError:
        raise ValueError(f"{source}: line {start + 1}: bad dimension {header[4:]!r}") from None
    if n <= 0:
        raise ValueError(f"{source}: dimension must be positive")
    rows = lines[start + 1:start + 1 + n]
    if len(rows) != n:
        raise ValueError(f"{source}: expected {n} rows, found {len(rows)}")
    out = np.empty((n, n))
    for i, row in enumerate(rows):
        parts = row.strip().split(",")
        if len(parts) != n:
            raise ValueError(f"{source}: row {i + 1} has {len(parts)} entries, expected {n}")
        try:
            out[i] = [float(p) for p in parts]
        except ValueError:
            raise ValueError(f"{source}: row {i + 1} is not numeric") from None
    return out, start + 1 + n


def write_matrix(path: Path, F: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        write_matrix_block(fh, F)


def read_matrix(path: Path) -> np.ndarray:
    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty file")
    F, end = _read_matrix_block(lines, 0, str(path))
    if end != len(lines):
        raise ValueError(f"{path}: trailing content after matrix")
    return F


def write_kernel(path: Path, triple) -> None:
    """Kernel bundle: ``t=<horizon>``, ``compositions=<k>``, then B11, B12, B22 blocks."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(f"t={_fmt(triple.t)}\n")
        fh.write(f"compositions={triple.compositions}\n")
        for F in (triple.B11, triple.B12, triple.B22):
            write_matrix_block(fh, F)


def read_kernel(path: Path):
    from .semigroup import KernelTriple

    lines = [ln for ln in Path(path).read_text(encoding="utf-8").splitlines() if ln.strip()]
    if len(lines) < 2 or not lines[0].startswith("t=") or not lines[1].startswith("compositions="):
        raise ValueError(f"{path}: missing kernel header")
    t = float(lines[0][2:])
    count = int(lines[1][len("compositions="):])
    pos = 2
    blocks = []
    for _ in range(3):
        F, pos = _read_matrix_block(lines, pos, str(path))
        blocks.append(F)
    return KernelTriple(*blocks, t=t, compositions=count)


TRAJECTORY_COLUMNS = ["t", "frob_P", "frob_Q", "frob_R", "margin_P_minus_M"]


def write_trajectory(path: Path, rows: Iterable[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRAJECTORY_COLUMNS)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def read_trajectory(path: Path) -> list[dict[str, float]]:
    with open(path, encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != TRAJECTORY_COLUMNS:
            raise ValueError(f"{path}: unexpected trajectory header {reader.fieldnames}")
        try:
            return [{k: float(v) for k, v in row.items()} for row in reader]
        except (TypeError, ValueError):
            raise ValueError(f"{path}: non-numeric trajectory entry") from None
