"""Binary classifier zoo behind a single probability interface.

Five families are available: logistic regression ("lr"), a single CART tree
("tree"), bagged trees ("bagging"), a random forest ("rf") and boosted stumps
("ada"). Hyperparameter defaults follow the widely documented defaults of the
mainstream toolkit versions of these estimators and are recorded in run
artifacts. All models support feature dropout: columns listed in `drop` are
removed before training and provably ignored at prediction time.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np

from ..dataset import CATEGORICAL, CONTINUOUS, Dataset, FeatureSchema
from ..seeding import derived_rng
from . import _logistic, _tree

FAMILIES = ("lr", "tree", "bagging", "rf", "ada")

_DEFAULTS: dict[str, dict[str, Any]] = {
    "lr": {"l2_penalty": 1.0, "max_iter": 1000, "tol": 1e-6},
    "tree": {"max_depth": None, "min_samples_split": 2},
    "bagging": {"n_estimators": 10, "max_depth": None, "min_samples_split": 2},
    "rf": {"n_estimators": 100, "max_features": "sqrt", "max_depth": None,
           "min_samples_split": 2},
    "ada": {"n_estimators": 50, "learning_rate": 1.0},
}


@dataclass(frozen=True)
class ModelSpec:
    """Family name, hyperparameter overrides and the training seed."""

    family: str
    hyperparameters: Mapping[str, Any] = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown model family {self.family!r}; choose from {FAMILIES}")
        resolve_hyperparameters(self)  # validates ranges eagerly

    def with_seed(self, seed: int) -> "ModelSpec":
        return replace(self, seed=seed)


def resolve_hyperparameters(spec: ModelSpec) -> dict[str, Any]:
    """Family defaults merged with the given overrides, range-checked."""
    params = dict(_DEFAULTS[spec.family])
    unknown = set(spec.hyperparameters) - set(params)
    if unknown:
        raise ValueError(f"unknown hyperparameters for {spec.family}: {sorted(unknown)}")
    params.update(spec.hyperparameters)
    if params.get("n_estimators", 1) < 1:
        raise ValueError("n_estimators must be at least 1")
    if params.get("learning_rate", 1.0) <= 0:
        raise ValueError("learning_rate must be positive")
    if params.get("l2_penalty", 0.0) < 0:
        raise ValueError("l2_penalty must be non-negative")
    if params.get("min_samples_split", 2) < 2:
        raise ValueError("min_samples_split must be at least 2")
    md = params.get("max_depth")
    if md is not None and md < 1:
        raise ValueError("max_depth must be at least 1 when set")
    return params


class TrainedModel:
    """A fitted classifier bound to the schema it was trained on.

    Prediction always takes full-width rows; columns in `dropped_features`
    are discarded before the family-specific code ever sees them.
    """

    def __init__(self, spec: ModelSpec, schema: tuple[FeatureSchema, ...],
                 dropped_features: frozenset[str]):
        self.spec = spec
        self.schema = schema
        self.dropped_features = dropped_features
        self.kept_idx = np.array(
            [j for j, f in enumerate(schema) if f.name not in dropped_features],
            dtype=np.int64)

    @property
    def family(self) -> str:
        return self.spec.family

    def _validate(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != len(self.schema):
            raise ValueError(
                f"row width {X.shape[1]} does not match schema width {len(self.schema)}")
        if not np.isfinite(X).all():
            raise ValueError("non-finite cell in prediction input")
        for j, spec in enumerate(self.schema):
            if spec.kind == CATEGORICAL:
                col = X[:, j]
                if (col != np.floor(col)).any() or col.min() < 0 \
                        or col.max() >= len(spec.categories):
                    raise ValueError(f"unseen category index in column {spec.name!r}")
        return X

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        """Class-1 probability for each row of a full-width matrix."""
        X = self._validate(X)
        p = self._proba_kept(X[:, self.kept_idx])
        return np.clip(p, 0.0, 1.0)

    def predict_proba(self, x: np.ndarray) -> float:
        """Class-1 probability for one row; the label is 1 iff p >= 0.5."""
        return float(self.predict_proba_batch(np.asarray(x, dtype=np.float64))[0])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba_batch(X) >= 0.5).astype(np.int64)

    def _proba_kept(self, Xk: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _params_jsonable(self) -> dict:
        raise NotImplementedError


class LogisticModel(TrainedModel):
    def __init__(self, spec, schema, dropped_features, params, mean, std):
        super().__init__(spec, schema, dropped_features)
        self.params = params
        self.mean = mean
        self.std = std
        kept = [schema[j] for j in self.kept_idx]
        self._is_cat = np.array([f.kind == CATEGORICAL for f in kept])
        self._n_categories = np.array(
            [len(f.categories) if f.kind == CATEGORICAL else 0 for f in kept])

    def _proba_kept(self, Xk):
        design = _logistic.encode_design(Xk, self._is_cat, self._n_categories,
                                         self.mean, self.std)
        return _logistic.predict_logistic(self.params, design)

    def _params_jsonable(self):
        return {"params": self.params.tolist(), "mean": self.mean.tolist(),
                "std": self.std.tolist()}


class TreeEnsembleModel(TrainedModel):
    """Plain average of per-tree leaf probabilities (tree, bagging, rf)."""

    def __init__(self, spec, schema, dropped_features, trees):
        super().__init__(spec, schema, dropped_features)
        self.trees = trees

    def _proba_kept(self, Xk):
        acc = np.zeros(Xk.shape[0])
        for t in self.trees:
            acc += _tree.tree_proba(t, Xk)
        return acc / len(self.trees)

    def _params_jsonable(self):
        return {"trees": [_tree.tree_to_jsonable(t) for t in self.trees]}


class BoostedStumpsModel(TrainedModel):
    """SAMME-boosted depth-1 stumps; probability is the logistic transform of
    the signed weighted vote margin."""

    def __init__(self, spec, schema, dropped_features, stumps, alphas):
        super().__init__(spec, schema, dropped_features)
        self.stumps = stumps
        self.alphas = alphas

    def margin(self, Xk: np.ndarray) -> np.ndarray:
        m = np.zeros(Xk.shape[0])
        for alpha, stump in zip(self.alphas, self.stumps):
            votes = np.where(_tree.tree_proba(stump, Xk) >= 0.5, 1.0, -1.0)
            m += alpha * votes
        return m

    def _proba_kept(self, Xk):
        return _logistic._sigmoid(self.margin(Xk))

    def _params_jsonable(self):
        return {"stumps": [_tree.tree_to_jsonable(t) for t in self.stumps],
                "alphas": list(self.alphas)}


def train(spec: ModelSpec, d: Dataset, drop: frozenset[str] | set[str] = frozenset()) \
        -> TrainedModel:
    """Fit one classifier on `d` with the columns in `drop` removed.

    Deterministic under (spec.seed, d, drop). Raises if `drop` covers every
    feature or the training data holds a single class.
    """
    drop = frozenset(drop)
    names = set(f.name for f in d.schema)
    unknown = drop - names
    if unknown:
        raise ValueError(f"drop references unknown feature(s): {sorted(unknown)}")
    if drop == names:
        raise ValueError("cannot drop every feature")
    zeros, ones = d.class_counts()
    if zeros == 0 or ones == 0:
        raise ValueError("training data must contain both classes")

    params = resolve_hyperparameters(spec)
    kept_idx = [j for j, f in enumerate(d.schema) if f.name not in drop]
    kept = [d.schema[j] for j in kept_idx]
    Xk = d.rows[:, kept_idx]
    y = d.target
    is_cat = np.array([f.kind == CATEGORICAL for f in kept])

    if spec.family == "lr":
        mean = np.zeros(len(kept))
        std = np.ones(len(kept))
        for i, f in enumerate(kept):
            if f.kind == CONTINUOUS:
                mean[i] = Xk[:, i].mean()
                s = Xk[:, i].std()
                std[i] = s if s > 0 else 1.0
        n_categories = np.array([len(f.categories) if f.kind == CATEGORICAL else 0
                                 for f in kept])
        design = _logistic.encode_design(Xk, is_cat, n_categories, mean, std)
        fitted = _logistic.fit_logistic(design, y.astype(np.float64),
                                        params["l2_penalty"], params["max_iter"],
                                        params["tol"])
        return LogisticModel(spec, d.schema, drop, fitted, mean, std)

    if spec.family in ("tree", "bagging", "rf"):
        if spec.family == "tree":
            tree = _tree.grow_tree(Xk, y, None, is_cat, params["max_depth"],
                                   params["min_samples_split"], None, None)
            return TreeEnsembleModel(spec, d.schema, drop, [tree])
        n_estimators = params["n_estimators"]
        max_features = None
        if spec.family == "rf":
            max_features = max(1, round(np.sqrt(len(kept))))
        trees = []
        for t in range(n_estimators):
            rng = derived_rng(spec.seed, t)
            boot = rng.integers(0, d.n_rows, size=d.n_rows)
            trees.append(_tree.grow_tree(Xk[boot], y[boot], None, is_cat,
                                         params["max_depth"],
                                         params["min_samples_split"],
                                         max_features, rng))
        return TreeEnsembleModel(spec, d.schema, drop, trees)

    return _train_boosted(spec, d, drop, Xk, y, is_cat, params)


def _train_boosted(spec, d, drop, Xk, y, is_cat, params):
    n = Xk.shape[0]
    w = np.full(n, 1.0 / n)
    stumps, alphas = [], []
    for _ in range(params["n_estimators"]):
        stump = _tree.grow_tree(Xk, y, w, is_cat, 1, 2, None, None)
        pred = (_tree.tree_proba(stump, Xk) >= 0.5).astype(np.int64)
        miss = pred != y
        err = w[miss].sum() / w.sum()
        if err >= 0.5 - 1e-12:
            break
        err = max(err, 1e-10)
        alpha = params["learning_rate"] * np.log((1.0 - err) / err)
        stumps.append(stump)
        alphas.append(float(alpha))
        if err <= 1e-10:
            break
        w = w * np.exp(alpha * miss)
        w /= w.sum()
    return BoostedStumpsModel(spec, d.schema, drop, stumps, alphas)


def accuracy(model, d: Dataset) -> float:
    """Fraction of rows whose thresholded prediction matches the label.
    Works for any object exposing predict_proba_batch."""
    if d.n_rows == 0:
        raise ValueError("cannot score an empty dataset")
    labels = (model.predict_proba_batch(d.rows) >= 0.5).astype(np.int64)
    return float((labels == d.target).mean())


_MODEL_FORMAT = "fairlens-model"
_MODEL_VERSION = 1


def to_jsonable(model: TrainedModel) -> dict:
    """Versioned JSON-ready form; `from_jsonable` restores predictions bit-exactly."""
    return {
        "format": _MODEL_FORMAT,
        "version": _MODEL_VERSION,
        "family": model.spec.family,
        "hyperparameters": dict(model.spec.hyperparameters),
        "seed": model.spec.seed,
        "schema": [{"name": f.name, "kind": f.kind, "categories": list(f.categories)}
                   for f in model.schema],
        "dropped_features": sorted(model.dropped_features),
        "params": model._params_jsonable(),
    }


def from_jsonable(blob: dict) -> TrainedModel:
    if blob.get("format") != _MODEL_FORMAT or blob.get("version") != _MODEL_VERSION:
        raise ValueError("not a recognized serialized model")
    spec = ModelSpec(blob["family"], blob["hyperparameters"], blob["seed"])
    schema = tuple(FeatureSchema(f["name"], f["kind"], tuple(f["categories"]))
                   for f in blob["schema"])
    drop = frozenset(blob["dropped_features"])
    p = blob["params"]
    if spec.family == "lr":
        return LogisticModel(spec, schema, drop, np.array(p["params"]),
                             np.array(p["mean"]), np.array(p["std"]))
    if spec.family in ("tree", "bagging", "rf"):
        trees = [_tree.tree_from_jsonable(t) for t in p["trees"]]
        return TreeEnsembleModel(spec, schema, drop, trees)
    stumps = [_tree.tree_from_jsonable(t) for t in p["stumps"]]
    return BoostedStumpsModel(spec, schema, drop, stumps, list(p["alphas"]))
