"""Dataset loading, min-max normalization and stratified CV splitting."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from importlib import resources

import numpy as np


class CsvParseError(ValueError):
    """CSV structure or content problem, located by row/column."""


@dataclass
class Dataset:
    X: np.ndarray
    y: np.ndarray
    n_classes: int
    feature_names: list[str] = field(default_factory=list)
    class_names: list[str] = field(default_factory=list)
    normalization: np.ndarray | None = None  # per-feature (min, max) pairs

    def __post_init__(self):
        self.X = np.atleast_2d(np.asarray(self.X, dtype=float))
        self.y = np.asarray(self.y, dtype=int).ravel()
        if self.y.size != self.X.shape[0]:
            raise ValueError("X and y disagree on the sample count")
        if self.y.min() < 0 or self.y.max() >= self.n_classes:
            raise ValueError("class indices must lie in 0..n_classes-1")


def _try_float(cell: str) -> float | None:
    try:
        return float(cell)
    except ValueError:
        return None


def load_csv(path, delimiter: str = ",", header: bool = False,
             label_col: int = -1) -> Dataset:
    """Load a delimited text dataset; the label column defaults to the last.

    Numeric feature columns are parsed as floats; columns containing any
    non-numeric cell are encoded as integers in first-appearance order.
    Numeric labels are mapped to 0..C-1 by sorted value, non-numeric labels
    in first-appearance order. Missing cells and ragged rows are rejected.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh, delimiter=delimiter)
                if row and any(cell.strip() for cell in row)]
    if not rows:
        raise CsvParseError(f"{path}: file contains no data rows")
    names = None
    if header:
        names = [cell.strip() for cell in rows[0]]
        rows = rows[1:]
        if not rows:
            raise CsvParseError(f"{path}: no data rows after the header")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise CsvParseError(f"{path}: row {i + 1} has {len(row)} cells, "
                                f"expected {width}")
        for j, cell in enumerate(row):
            if cell.strip() == "":
                raise CsvParseError(f"{path}: missing value at row {i + 1}, "
                                    f"column {j + 1}")
    label_col = label_col % width
    cols = list(zip(*rows))
    feat_idx = [j for j in range(width) if j != label_col]

    X = np.empty((len(rows), len(feat_idx)))
    for out_j, j in enumerate(feat_idx):
        values = [cell.strip() for cell in cols[j]]
        parsed = [_try_float(v) for v in values]
        if any(p is None for p in parsed):
            codes: dict[str, int] = {}
            parsed = [codes.setdefault(v, len(codes)) for v in values]
        X[:, out_j] = parsed

    labels = [cell.strip() for cell in cols[label_col]]
    numeric = [_try_float(v) for v in labels]
    if all(p is not None for p in numeric):
        uniq = sorted(set(numeric))
        code = {v: i for i, v in enumerate(uniq)}
        y = [code[v] for v in numeric]
        class_names = [f"{v:g}" for v in uniq]
    else:
        code = {}
        y = [code.setdefault(v, len(code)) for v in labels]
        class_names = list(code)

    feature_names = ([names[j] for j in feat_idx] if names
                     else [f"x{j + 1}" for j in range(len(feat_idx))])
    return Dataset(X, np.array(y), len(class_names), feature_names,
                   class_names)


def normalize(train_X: np.ndarray, apply_X: np.ndarray | None = None):
    """Min-max scale to [0, 1], fit on train_X; apply_X is clamped.

    Constant features map to 0. Returns (train_norm, apply_norm, params)
    where params is an m x 2 array of (min, max) pairs.
    """
    train_X = np.atleast_2d(np.asarray(train_X, dtype=float))
    if train_X.shape[0] == 0:
        raise ValueError("cannot fit normalization on an empty matrix")
    lo = train_X.min(axis=0)
    hi = train_X.max(axis=0)
    params = np.column_stack([lo, hi])

    def transform(M):
        span = np.where(hi > lo, hi - lo, 1.0)
        out = (M - lo) / span
        out[:, hi == lo] = 0.0
        return np.clip(out, 0.0, 1.0)

    train_norm = transform(train_X)
    apply_norm = None
    if apply_X is not None:
        apply_X = np.atleast_2d(np.asarray(apply_X, dtype=float))
        if apply_X.shape[1] != train_X.shape[1]:
            raise ValueError("apply_X feature count differs from train_X")
        apply_norm = transform(apply_X)
    return train_norm, apply_norm, params


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignments: np.ndarray
    seed: int | None = None

    def split(self, fold: int) -> tuple[np.ndarray, np.ndarray]:
        """(train indices, test indices) for one fold."""
        test = np.flatnonzero(self.assignments == fold)
        train = np.flatnonzero(self.assignments != fold)
        return train, test


def stratified_folds(y: np.ndarray, k: int,
                     seed: int | None = None) -> FoldPlan:
    """Deterministic stratified fold assignment; per-class counts within 1."""
    if k < 2:
        raise ValueError(f"need at least 2 folds, got {k}")
    y = np.asarray(y, dtype=int).ravel()
    rng = np.random.default_rng(seed)
    assignments = np.empty(y.size, dtype=int)
    offset = 0
    for cls in np.unique(y):
        idx = np.flatnonzero(y == cls)
        rng.shuffle(idx)
        assignments[idx] = (np.arange(idx.size) + offset) % k
        offset += idx.size
    return FoldPlan(k, assignments, seed)


def regroup_cleveland(y: np.ndarray) -> np.ndarray:
    """Collapse the 0..4 heart-disease risk labels to {0, 1, 2}."""
    y = np.asarray(y, dtype=int)
    return np.select([y == 0, y <= 3], [0, 1], default=2)


def bundled_path(name: str):
    """Filesystem path of a dataset shipped with the package."""
    ref = resources.files("fuzzykd.datasets") / f"{name}.csv"
    if not ref.is_file():
        raise ValueError(f"no bundled dataset named {name!r}")
    return ref


def load_bundled(name: str) -> Dataset:
    return load_csv(bundled_path(name))
