import numpy as np
import pytest

from fairlens.dataset import CATEGORICAL, CONTINUOUS, Dataset, FeatureSchema


def make_dataset(columns, target, sensitive=(), target_name="target",
                 target_levels=("0", "1")):
    """Build a Dataset from {name: (kind, values, categories)} in given order."""
    schema = tuple(FeatureSchema(name, kind, tuple(categories))
                   for name, (kind, _, categories) in columns.items())
    rows = np.column_stack([np.asarray(values, dtype=np.float64)
                            for (_, values, _) in columns.values()])
    return Dataset(schema=schema, rows=rows, target=np.asarray(target, dtype=np.int64),
                   sensitive=frozenset(sensitive), target_name=target_name,
                   target_levels=tuple(target_levels))


def cont(values):
    return (CONTINUOUS, values, ())


def cat(values, categories):
    return (CATEGORICAL, values, categories)


@pytest.fixture
def separable():
    """Two continuous features, linearly separable by the first."""
    rng = np.random.default_rng(0)
    x0 = np.concatenate([rng.uniform(0, 1, 30), rng.uniform(2, 3, 30)])
    x1 = rng.uniform(0, 1, 60)
    y = np.array([0] * 30 + [1] * 30)
    return make_dataset({"a": cont(x0), "b": cont(x1)}, y)


@pytest.fixture
def mixed_noise():
    """Mixed-kind dataset where the label follows one continuous and one
    categorical feature with some noise; includes an inert extra column."""
    rng = np.random.default_rng(1)
    n = 200
    x = rng.normal(0, 1, n)
    g = (rng.random(n) < 0.6).astype(float)
    inert = rng.normal(0, 1, n)
    logit = 1.8 * x + 1.2 * g - 0.6
    y = (rng.random(n) < 1 / (1 + np.exp(-logit))).astype(int)
    return make_dataset(
        {"x": cont(x), "group": cat(g, ("u", "v")), "inert": cont(inert)}, y,
        sensitive=("group",))
