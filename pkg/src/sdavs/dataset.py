"""Labeled data containers, TSV/CSV ingestion and stratified fold splitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .exceptions import DataFormatError, DataValidationError


@dataclass(frozen=True)
class LabeledMatrix:
    """An ``n x d`` feature matrix with class labels ``1..K``.

    Parameters
    ----------
    X : ndarray of shape (n_samples, n_features)
    y : ndarray of shape (n_samples,)
        Integer labels in ``1..K``.
    feature_names : list of str, optional
    label_names : list of str, optional
        Original label of each class, so that ``label_names[k - 1]`` is the
        label that was mapped to ``k``.
    """

    X: np.ndarray
    y: np.ndarray
    feature_names: list[str] | None = None
    label_names: list[str] | None = field(default=None)

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise DataValidationError(f"X must be 2-dimensional, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataValidationError(
                f"y has shape {y.shape}, expected ({X.shape[0]},)"
            )
        if X.shape[1] < 1:
            raise DataValidationError("at least one feature is required")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DataValidationError("labels must be integers 1..K")
            y = y.astype(int)
        bad = np.argwhere(~np.isfinite(X))
        if len(bad):
            i, j = bad[0]
            raise DataValidationError(f"non-finite value {X[i, j]!r} at sample {i}, feature {j}")
        if y.size == 0 or y.min() < 1:
            raise DataValidationError("labels must be integers 1..K")
        K = int(y.max())
        counts = np.bincount(y, minlength=K + 1)[1:]
        if np.any(counts < 2):
            k = int(np.argmax(counts < 2)) + 1
            raise DataValidationError(
                f"class {k} has {counts[k - 1]} sample(s); every class needs at least 2"
            )
        if self.feature_names is not None and len(self.feature_names) != X.shape[1]:
            raise DataValidationError("feature_names length does not match X")
        if self.label_names is not None and len(self.label_names) != K:
            raise DataValidationError("label_names length does not match number of classes")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n_samples(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return int(self.y.max())

    @property
    def counts(self) -> np.ndarray:
        """Per-class sample counts ``n_k``."""
        return np.bincount(self.y, minlength=self.n_classes + 1)[1:]

    @property
    def classes(self) -> list[str]:
        if self.label_names is not None:
            return list(self.label_names)
        return [str(k) for k in range(1, self.n_classes + 1)]

    def subset(self, rows) -> "LabeledMatrix":
        return LabeledMatrix(self.X[rows], self.y[rows], self.feature_names, self.label_names)


def encode_labels(labels: Sequence[str]) -> tuple[np.ndarray, list[str]]:
    """Map arbitrary labels to ``1..K`` in lexicographic order of their string form."""
    names = sorted({str(v) for v in labels})
    lookup = {name: k + 1 for k, name in enumerate(names)}
    return np.array([lookup[str(v)] for v in labels], dtype=int), names


def _sniff_delimiter(path: Path) -> str:
    return "," if path.suffix.lower() == ".csv" else "\t"


def _column_index(header: list[str], column, what: str) -> int:
    if isinstance(column, int) or (isinstance(column, str) and column.lstrip("-").isdigit()
                                   and column not in header):
        idx = int(column)
        if not -len(header) <= idx < len(header):
            raise DataFormatError(f"{what} index {idx} out of range ({len(header)} columns)")
        return idx % len(header)
    if column not in header:
        raise DataFormatError(f"{what} {column!r} not found in header")
    return header.index(column)


@dataclass(frozen=True)
class RawTable:
    """Parsed numeric table: features, optional labels and optional sample ids."""

    X: np.ndarray
    feature_names: list[str]
    labels: list[str] | None
    ids: list[str] | None


def read_table(path, label_column="label", delimiter: str | None = None,
               transpose: bool = False, id_column=None,
               require_label: bool = True) -> RawTable:
    """Parse a delimited file with a header row.

    With ``require_label=False`` a missing label column is allowed and
    ``labels`` is None; this is how unlabeled prediction inputs are read.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"input file not found: {path}")
    delim = delimiter or _sniff_delimiter(path)
    with path.open(newline="") as fh:
        grid = [row for row in csv.reader(fh, delimiter=delim) if row]
    if len(grid) < 2:
        raise DataFormatError(f"{path}: need a header row and at least one data row")
    width = len(grid[0])
    for r, row in enumerate(grid):
        if len(row) != width:
            raise DataFormatError(
                f"{path}: row {r + 1} has {len(row)} fields, header has {width}"
            )
    if transpose:
        grid = [list(col) for col in zip(*grid)]

    header = [h.strip() for h in grid[0]]
    body = grid[1:]
    label_idx = None
    if label_column is not None and (require_label or label_column in header):
        label_idx = _column_index(header, label_column, "label column")
    id_idx = None if id_column is None else _column_index(header, id_column, "id column")
    skip = {label_idx, id_idx}
    feature_idx = [j for j in range(len(header)) if j not in skip]
    if not feature_idx:
        raise DataFormatError(f"{path}: no feature columns")

    X = np.empty((len(body), len(feature_idx)))
    for i, row in enumerate(body):
        for jj, j in enumerate(feature_idx):
            cell = row[j].strip()
            try:
                value = float(cell)
            except ValueError:
                raise DataFormatError(
                    f"{path}: cannot parse {cell!r} at row {i + 2}, column {header[j]!r}"
                ) from None
            if not math.isfinite(value):
                raise DataValidationError(
                    f"{path}: non-finite value {cell!r} at row {i + 2}, column {header[j]!r}"
                )
            X[i, jj] = value
    return RawTable(
        X=X,
        feature_names=[header[j] for j in feature_idx],
        labels=None if label_idx is None else [row[label_idx].strip() for row in body],
        ids=None if id_idx is None else [row[id_idx].strip() for row in body],
    )


def load_tsv(path, label_column="label", delimiter: str | None = None,
             transpose: bool = False, id_column=None) -> LabeledMatrix:
    """Read a delimited file with a header row into a :class:`LabeledMatrix`.

    Rows are samples and columns are features unless ``transpose`` is set, in
    which case the file is read as features x samples (the genomics layout)
    and ``label_column`` names a row.  ``id_column`` marks a column (after any
    transposition) that carries sample identifiers and is not a feature.
    Labels are remapped to ``1..K`` in lexicographic order of the original
    label strings; the mapping is kept in ``label_names``.
    """
    table = read_table(path, label_column, delimiter, transpose, id_column)
    y, names = encode_labels(table.labels)
    return LabeledMatrix(table.X, y, table.feature_names, names)


def write_tsv(path, data: LabeledMatrix, label_column: str = "label") -> None:
    """Write ``data`` as a samples x features TSV with original labels."""
    names = data.feature_names or [f"f{j + 1}" for j in range(data.n_features)]
    labels = data.classes
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh, delimiter="\t", lineterminator="\n")
        writer.writerow([label_column, *names])
        for yi, row in zip(data.y, data.X):
            writer.writerow([labels[yi - 1], *(repr(float(v)) for v in row)])


def stratified_folds(data: LabeledMatrix | np.ndarray, folds: int = 10,
                     repetitions: int = 1, seed: int = 0) -> list[tuple[np.ndarray, np.ndarray]]:
    """Class-balanced K-fold partitions, repeated with reshuffling.

    Within each repetition the test folds partition ``0..n-1`` and the number
    of samples a class contributes to any two folds differs by at most one.
    The fold assignment continues cyclically from one class to the next so
    that total fold sizes are balanced as well.

    Returns
    -------
    list of (train_idx, test_idx), of length ``folds * repetitions``, ordered
    by repetition and then fold.
    """
    y = data.y if isinstance(data, LabeledMatrix) else np.asarray(data)
    if folds < 2:
        raise DataValidationError("folds must be at least 2")
    classes, counts = np.unique(y, return_counts=True)
    if np.any(counts < folds):
        k = classes[np.argmin(counts)]
        raise DataValidationError(
            f"class {k} has {counts.min()} samples, fewer than {folds} folds"
        )
    rng = np.random.default_rng(seed)
    n = len(y)
    out = []
    for _ in range(repetitions):
        assign = np.empty(n, dtype=int)
        offset = 0
        for k in classes:
            members = rng.permutation(np.flatnonzero(y == k))
            assign[members] = (offset + np.arange(len(members))) % folds
            offset += len(members)
        for f in range(folds):
            test = np.flatnonzero(assign == f)
            train = np.flatnonzero(assign != f)
            out.append((train, test))
    return out
