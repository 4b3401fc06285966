"""Data ingestion, persistence, and synthetic blob generation."""

from __future__ import annotations

import os
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import ConfigurationError, DataValidationError, ParseError, ShapeError

DELIMITERS = {"comma": ",", "tab": "\t", ",": ",", "\t": "\t"}


@dataclass
class DataMatrix:
    """Dense row-major sample x feature matrix with optional class labels."""

    values: np.ndarray
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2 or self.values.shape[0] < 1 or self.values.shape[1] < 1:
            raise ShapeError(
                f"expected an n x d matrix with n,d >= 1, got shape {self.values.shape}"
            )
        if not np.isfinite(self.values).all():
            raise DataValidationError("matrix contains NaN or Inf values")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.values.shape[0],):
                raise ShapeError(
                    f"label vector length {self.labels.shape} does not match "
                    f"{self.values.shape[0]} rows"
                )

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]

    @property
    def n_classes(self) -> int:
        if self.labels is None:
            return 0
        return int(np.unique(self.labels).shape[0])


def _resolve_delimiter(delimiter: str) -> str:
    if delimiter not in DELIMITERS:
        raise ConfigurationError(
            f"unsupported delimiter {delimiter!r}; use 'comma' or 'tab'"
        )
    return DELIMITERS[delimiter]


def _map_labels(raw: list[str]) -> np.ndarray:
    """Distinct label strings become 0,1,2,... in first-appearance order."""
    mapping: dict[str, int] = {}
    out = np.empty(len(raw), dtype=np.int64)
    for i, token in enumerate(raw):
        key = token.strip()
        if key not in mapping:
            mapping[key] = len(mapping)
        out[i] = mapping[key]
    return out


def load_matrix(
    path,
    delimiter: str = "comma",
    header: bool = False,
    label_column: Optional[int] = None,
    label_file=None,
) -> DataMatrix:
    """Parse a delimited numeric file, preserving row order.

    Ragged rows and non-numeric cells raise ParseError carrying 1-based
    coordinates. ``label_column`` extracts one column as class labels
    (strings allowed, mapped in first-appearance order); ``label_file``
    reads labels from a separate one-per-line file instead.
    """
    sep = _resolve_delimiter(delimiter)
    text = Path(path).read_text()
    lines = text.splitlines()
    start = 1 if header else 0
    rows = [
        (i + 1, line.split(sep)) for i, line in enumerate(lines) if i >= start and line.strip()
    ]
    if not rows:
        raise ParseError("file contains no data rows", row=1)
    width = len(rows[0][1])
    if label_column is not None and not 0 <= label_column < width:
        raise ConfigurationError(
            f"label_column {label_column} out of range for {width} columns"
        )
    raw_labels: list[str] = []
    values = np.empty((len(rows), width - (1 if label_column is not None else 0)))
    if values.shape[1] < 1:
        raise ParseError("no feature columns remain after the label column", row=rows[0][0])
    for out_row, (line_no, cells) in enumerate(rows):
        if len(cells) != width:
            raise ParseError(
                f"row {line_no} has {len(cells)} fields, expected {width}",
                row=line_no,
            )
        out_col = 0
        for col, cell in enumerate(cells):
            if label_column is not None and col == label_column:
                raw_labels.append(cell)
                continue
            try:
                values[out_row, out_col] = float(cell)
            except ValueError:
                raise ParseError(
                    f"non-numeric value {cell.strip()!r} at row {line_no}, "
                    f"column {col + 1}",
                    row=line_no,
                    col=col + 1,
                ) from None
            out_col += 1
    labels = _map_labels(raw_labels) if raw_labels else None
    if label_file is not None:
        if labels is not None:
            raise ConfigurationError("pass label_column or label_file, not both")
        label_lines = [l for l in Path(label_file).read_text().splitlines() if l.strip()]
        if len(label_lines) != values.shape[0]:
            raise ShapeError(
                f"label file has {len(label_lines)} entries for {values.shape[0]} rows"
            )
        labels = _map_labels(label_lines)
    return DataMatrix(values=values, labels=labels)


def save_matrix(path, matrix: DataMatrix, delimiter: str = "comma") -> None:
    """Write a DataMatrix as delimited text.

    Values use shortest round-trip decimal rendering, so load_matrix reads
    back bit-identical floats. Labels, when present, are written as the
    first column (reload with ``label_column=0``).
    """
    sep = _resolve_delimiter(delimiter)
    lines = []
    for i in range(matrix.n):
        cells = [repr(float(v)) for v in matrix.values[i]]
        if matrix.labels is not None:
            cells.insert(0, str(int(matrix.labels[i])))
        lines.append(sep.join(cells))
    atomic_write_text(path, "\n".join(lines) + "\n")


def make_blobs(
    n: int,
    d: int,
    k: int,
    separation: float = 10.0,
    spread: float = 1.0,
    seed: int = 0,
) -> DataMatrix:
    """Gaussian blobs around k mutually distant seeded centers.

    Centers sit on random directions scaled so every pairwise distance is at
    least ``separation``; samples are isotropic normal with standard
    deviation ``spread`` and cluster sizes as equal as possible.
    Deterministic per seed.
    """
    if not (1 <= k <= n):
        raise ConfigurationError("need n >= k >= 1")
    if d < 1:
        raise ConfigurationError("need d >= 1")
    if separation <= 0 or spread <= 0:
        raise ConfigurationError("separation and spread must be > 0")
    rng = np.random.Generator(np.random.PCG64(seed))
    if k == 1:
        centers = np.zeros((1, d))
    elif d == 1:
        centers = (np.arange(k, dtype=np.float64) * separation)[:, None]
    else:
        while True:
            dirs = rng.standard_normal((k, d))
            norms = np.linalg.norm(dirs, axis=1, keepdims=True)
            if (norms == 0).any():
                continue
            dirs /= norms
            gram = dirs @ dirs.T
            sq = np.maximum(2.0 - 2.0 * gram, 0.0)
            np.fill_diagonal(sq, np.inf)
            min_dist = float(np.sqrt(sq.min()))
            if min_dist > 1e-6:
                break
        centers = dirs * (separation / min_dist)
    sizes = np.full(k, n // k, dtype=np.int64)
    sizes[: n % k] += 1
    labels = np.repeat(np.arange(k, dtype=np.int64), sizes)
    noise = rng.standard_normal((n, d)) * spread
    return DataMatrix(values=centers[labels] + noise, labels=labels)


def atomic_write_text(path, text: str) -> None:
    """Write via a temp file in the target directory plus rename, so an
    interrupted run never leaves a partial artifact."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_bytes(path, blob: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as handle:
            handle.write(blob)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
