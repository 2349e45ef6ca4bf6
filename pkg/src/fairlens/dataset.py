"""Tabular dataset representation: CSV ingestion, typed columns, splitting,
and minority-class oversampling.

Cells are stored in a single float matrix. Continuous columns hold raw values;
categorical columns hold the index of the value in the column's category table
(built in file order of first occurrence). Category tables are frozen at load
time: a file with values outside a known table is rejected rather than
silently remapped.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, DataFormatError

CATEGORICAL = "categorical"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class FeatureSchema:
    """Name, kind and (for categoricals) the ordered category table of one column."""

    name: str
    kind: str
    categories: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind not in (CATEGORICAL, CONTINUOUS):
            raise ValueError(f"unknown feature kind {self.kind!r}")
        if self.kind == CATEGORICAL:
            if not self.categories:
                raise ValueError(f"categorical feature {self.name!r} has no categories")
            if len(set(self.categories)) != len(self.categories):
                raise ValueError(f"duplicate categories in feature {self.name!r}")
        elif self.categories:
            raise ValueError(f"continuous feature {self.name!r} cannot list categories")


@dataclass(frozen=True)
class Dataset:
    """Immutable feature matrix with a binary target (1 = positive outcome).

    `target_levels` records the raw label values mapped to 0 and 1, and
    `target_name` the original target column header, so a dataset can be
    written back to CSV in its canonical form.
    """

    schema: tuple[FeatureSchema, ...]
    rows: np.ndarray
    target: np.ndarray
    sensitive: frozenset[str] = frozenset()
    target_name: str = "target"
    target_levels: tuple[str, str] = ("0", "1")

    def __post_init__(self):
        names = [f.name for f in self.schema]
        if len(set(names)) != len(names):
            raise ValueError("duplicate feature names in schema")
        rows = np.asarray(self.rows, dtype=np.float64)
        target = np.asarray(self.target, dtype=np.int64)
        if rows.ndim != 2 or rows.shape[1] != len(self.schema):
            raise ValueError("row matrix width must equal the number of schema entries")
        if target.shape != (rows.shape[0],):
            raise ValueError("target length must equal the row count")
        if target.size and not np.isin(target, (0, 1)).all():
            raise ValueError("target labels must be 0 or 1")
        unknown = self.sensitive - set(names)
        if unknown:
            raise ValueError(f"sensitive features not in schema: {sorted(unknown)}")
        for j, spec in enumerate(self.schema):
            col = rows[:, j]
            if not np.isfinite(col).all():
                raise ValueError(f"non-finite cell in column {spec.name!r}")
            if spec.kind == CATEGORICAL:
                if col.size and ((col != np.floor(col)).any() or col.min() < 0
                                 or col.max() >= len(spec.categories)):
                    raise ValueError(f"category index out of range in column {spec.name!r}")
        rows.flags.writeable = False
        target.flags.writeable = False
        object.__setattr__(self, "rows", rows)
        object.__setattr__(self, "target", target)
        object.__setattr__(self, "sensitive", frozenset(self.sensitive))

    @property
    def n_rows(self) -> int:
        return self.rows.shape[0]

    @property
    def n_features(self) -> int:
        return len(self.schema)

    @property
    def feature_names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self.schema)

    def feature_index(self, name: str) -> int:
        for i, f in enumerate(self.schema):
            if f.name == name:
                return i
        raise KeyError(f"unknown feature {name!r}")

    def column(self, name: str) -> np.ndarray:
        return self.rows[:, self.feature_index(name)]

    def subset(self, indices: np.ndarray) -> "Dataset":
        """New dataset holding the given rows (schema and metadata shared)."""
        return Dataset(
            schema=self.schema,
            rows=self.rows[indices].copy(),
            target=self.target[indices].copy(),
            sensitive=self.sensitive,
            target_name=self.target_name,
            target_levels=self.target_levels,
        )

    def class_counts(self) -> tuple[int, int]:
        """(count of label 0, count of label 1)."""
        ones = int(self.target.sum())
        return self.n_rows - ones, ones


@dataclass(frozen=True)
class SplitPair:
    """Disjoint train/test partition of one source dataset."""

    train: Dataset
    test: Dataset
    seed: int = field(default=0)

    def __post_init__(self):
        if self.train.schema != self.test.schema:
            raise ValueError("train and test must share a schema")


def _parse_float(text: str) -> float | None:
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def load_csv(path: str | Path, target_column: str,
             schema_hints: dict[str, str] | None = None,
             sensitive: set[str] | frozenset[str] = frozenset()) -> Dataset:
    """Read an RFC-4180-style CSV (UTF-8, header row, comma separator) into a Dataset.

    Columns are auto-typed: fully numeric-parseable columns become continuous,
    everything else categorical. `schema_hints` overrides per column with
    "categorical" or "continuous". The target column must hold exactly two
    distinct values; the lexicographically smaller one maps to 0 and the larger
    to 1, recorded in `target_levels`. Rows with empty cells are rejected.
    """
    path = Path(path)
    if not path.is_file():
        raise DataFormatError(f"no such file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file, header row required") from None
        raw_rows = list(reader)

    if len(set(header)) != len(header):
        raise DataFormatError(f"{path}: duplicate column names in header")
    if target_column not in header:
        raise DataFormatError(f"{path}: target column {target_column!r} not found")
    hints = dict(schema_hints or {})
    for col, kind in hints.items():
        if col == target_column or col not in header:
            raise ConfigError(f"schema hint references unknown or target column {col!r}")
        if kind not in (CATEGORICAL, CONTINUOUS):
            raise ConfigError(f"schema hint for {col!r} must be categorical or continuous")

    ragged = [i for i, row in enumerate(raw_rows) if len(row) != len(header)]
    if ragged:
        raise DataFormatError(f"{path}: ragged row at line {ragged[0] + 2}")
    missing = sum(1 for row in raw_rows for cell in row if cell == "")
    if missing:
        raise DataFormatError(f"{path}: {missing} empty cell(s); missing values are not supported")

    target_pos = header.index(target_column)
    target_raw = [row[target_pos] for row in raw_rows]
    levels = sorted(set(target_raw))
    if len(levels) != 2:
        raise DataFormatError(
            f"{path}: target column {target_column!r} has {len(levels)} distinct value(s), need 2")
    target = np.array([1 if v == levels[1] else 0 for v in target_raw], dtype=np.int64)

    feature_cols = [(j, name) for j, name in enumerate(header) if j != target_pos]
    schema: list[FeatureSchema] = []
    columns: list[np.ndarray] = []
    for j, name in feature_cols:
        cells = [row[j] for row in raw_rows]
        parsed = [_parse_float(c) for c in cells]
        kind = hints.get(name)
        if kind is None:
            kind = CONTINUOUS if all(v is not None for v in parsed) else CATEGORICAL
        if kind == CONTINUOUS:
            bad = next((i for i, v in enumerate(parsed) if v is None), None)
            if bad is not None:
                raise DataFormatError(
                    f"{path}: cell {cells[bad]!r} at row {bad + 2}, column {name!r} "
                    "is not numeric under a continuous hint")
            schema.append(FeatureSchema(name, CONTINUOUS))
            columns.append(np.array(parsed, dtype=np.float64))
        else:
            table: dict[str, int] = {}
            codes = np.empty(len(cells), dtype=np.float64)
            for i, c in enumerate(cells):
                codes[i] = table.setdefault(c, len(table))
            schema.append(FeatureSchema(name, CATEGORICAL, tuple(table)))
            columns.append(codes)

    rows = np.column_stack(columns) if columns else np.empty((len(raw_rows), 0))
    return Dataset(
        schema=tuple(schema),
        rows=rows,
        target=target,
        sensitive=frozenset(sensitive),
        target_name=target_column,
        target_levels=(levels[0], levels[1]),
    )


def _format_cell(value: float, spec: FeatureSchema) -> str:
    if spec.kind == CATEGORICAL:
        return spec.categories[int(value)]
    if float(value).is_integer():
        return str(int(value))
    return repr(float(value))


def write_csv(d: Dataset, path: str | Path) -> None:
    """Canonical CSV emission, the inverse of `load_csv`.

    Category values are written verbatim and floats in their shortest exact
    form, so reloading (with matching kind hints for numeric-looking
    categoricals) reproduces the dataset and a second write is byte-identical.
    """
    path = Path(path)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([f.name for f in d.schema] + [d.target_name])
        for i in range(d.n_rows):
            cells = [_format_cell(d.rows[i, j], spec) for j, spec in enumerate(d.schema)]
            cells.append(d.target_levels[d.target[i]])
            writer.writerow(cells)


def split(d: Dataset, train_fraction: float, seed: int) -> SplitPair:
    """Shuffle rows uniformly under `seed` and cut off the first
    ceil(train_fraction * n) for training. Deterministic for a fixed seed."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must lie in (0, 1), got {train_fraction}")
    zeros, ones = d.class_counts()
    if zeros < 2 or ones < 2:
        raise ValueError("need at least 2 rows of each class to split")
    order = np.random.default_rng(seed).permutation(d.n_rows)
    cut = math.ceil(train_fraction * d.n_rows)
    return SplitPair(train=d.subset(order[:cut]), test=d.subset(order[cut:]), seed=seed)


def continuous_stats(d: Dataset) -> tuple[np.ndarray, np.ndarray]:
    """Mean and standard deviation per column (constants get std 1, categorical
    columns identity), for standardizing distance computations."""
    mean = np.zeros(d.n_features)
    std = np.ones(d.n_features)
    for j, spec in enumerate(d.schema):
        if spec.kind == CONTINUOUS and d.n_rows:
            col = d.rows[:, j]
            mean[j] = col.mean()
            s = col.std()
            std[j] = s if s > 0 else 1.0
    return mean, std


def smote(d: Dataset, k_neighbors: int = 5, seed: int = 0) -> Dataset:
    """Append interpolated minority rows until the class counts are equal.

    Each synthetic row picks a random minority row x and one of its k nearest
    minority neighbours x_nn (Euclidean distance on standardized continuous
    features), then takes x + u * (x_nn - x) with a single u ~ Uniform(0, 1)
    on continuous cells. Categorical cells take the majority vote between the
    two parents, which for a pair means x's value on disagreement. Original
    rows are preserved verbatim; deterministic under `seed`.
    """
    if k_neighbors < 1:
        raise ValueError("k_neighbors must be at least 1")
    zeros, ones = d.class_counts()
    if zeros == 0 or ones == 0:
        raise ValueError("oversampling needs both classes present")
    if zeros == ones:
        return d
    minority_label = 1 if ones < zeros else 0
    minority_idx = np.flatnonzero(d.target == minority_label)
    deficit = abs(zeros - ones)
    if len(minority_idx) <= k_neighbors:
        raise ValueError(
            f"minority class has {len(minority_idx)} rows, need more than k={k_neighbors}")

    synthetic, _ = _synthesize_minority(d, minority_idx, deficit, k_neighbors, seed)
    rows = np.vstack([d.rows, synthetic])
    target = np.concatenate([d.target, np.full(deficit, minority_label, dtype=np.int64)])
    return Dataset(
        schema=d.schema,
        rows=rows,
        target=target,
        sensitive=d.sensitive,
        target_name=d.target_name,
        target_levels=d.target_levels,
    )


def _synthesize_minority(d: Dataset, minority_idx: np.ndarray, count: int,
                         k_neighbors: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Generate `count` synthetic minority rows. Returns (rows, parent pairs),
    where parents are indices into `minority_idx`."""
    mean, std = continuous_stats(d)
    cont = np.array([spec.kind == CONTINUOUS for spec in d.schema])
    minority = d.rows[minority_idx]
    scaled = (minority[:, cont] - mean[cont]) / std[cont] if cont.any() else \
        np.zeros((len(minority_idx), 0))

    # k nearest minority neighbours of each minority row, self excluded;
    # stable ordering makes ties deterministic.
    diffs = scaled[:, None, :] - scaled[None, :, :]
    dist = np.sqrt((diffs ** 2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    knn = np.argsort(dist, axis=1, kind="stable")[:, :k_neighbors]

    rng = np.random.default_rng(seed)
    base = rng.integers(0, len(minority_idx), size=count)
    pick = rng.integers(0, k_neighbors, size=count)
    gap = rng.random(count)
    neighbour = knn[base, pick]

    synthetic = minority[base].copy()
    if cont.any():
        x = minority[base][:, cont]
        x_nn = minority[neighbour][:, cont]
        synthetic[:, cont] = x + gap[:, None] * (x_nn - x)
    parents = np.column_stack([base, neighbour])
    return synthetic, parents
