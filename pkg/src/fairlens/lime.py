"""Local surrogate explanations for single predictions.

A perturbed neighbourhood is drawn around the instance, every sample is
weighted by an exponential kernel on its distance to the instance in a binary
"agreement" space (one slot per feature: 1 when the sample matches the
instance's category, or its quartile bin for continuous features), and a
weighted ridge model is fit to the black box's class-1 probabilities. The
fitted coefficients are the per-feature contributions.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .dataset import CATEGORICAL, Dataset
from .errors import FairlensError


@dataclass(frozen=True)
class LimeConfig:
    """Knobs for one explanation. `kernel_width` of None resolves to
    0.75 * sqrt(number of features); defaults are conventions, not fitted."""

    n_samples: int = 5000
    kernel_width: float | None = None
    ridge_lambda: float = 1.0
    seed: int = 0


@dataclass(frozen=True)
class Explanation:
    """Surrogate intercept plus per-feature signed contributions, sorted by
    absolute value (ties keep schema order). `feature_order` preserves the
    schema ordering so downstream aggregation can break ties the same way."""

    intercept: float
    contributions: tuple[tuple[str, float], ...]
    kernel_width: float
    n_samples: int
    local_fidelity: float
    feature_order: tuple[str, ...] = ()

    def contribution(self, feature: str) -> float:
        for name, value in self.contributions:
            if name == feature:
                return value
        raise KeyError(f"no contribution recorded for {feature!r}")

    def to_jsonable(self) -> dict:
        return {
            "intercept": self.intercept,
            "contributions": [{"feature": n, "value": v} for n, v in self.contributions],
            "sigma": self.kernel_width,
            "n_samples": self.n_samples,
            "fidelity": self.local_fidelity,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_jsonable(), indent=2, sort_keys=True)


class SurrogateFitError(FairlensError):
    """Raised when the weighted least-squares system is degenerate."""


class NeighbourhoodSampler:
    """Per-feature perturbation distributions estimated from training data.

    Categorical slots resample from the empirical category frequencies;
    continuous slots pick one of the four training quartile bins uniformly and
    then a uniform value inside that bin's observed range.
    """

    def __init__(self, dataset: Dataset):
        self.schema = dataset.schema
        self._cat_cumprobs: dict[int, np.ndarray] = {}
        self._bin_edges: dict[int, np.ndarray] = {}
        for j, spec in enumerate(dataset.schema):
            col = dataset.rows[:, j]
            if spec.kind == CATEGORICAL:
                counts = np.bincount(col.astype(np.int64), minlength=len(spec.categories))
                self._cat_cumprobs[j] = np.cumsum(counts / counts.sum())
            else:
                q = np.quantile(col, [0.0, 0.25, 0.5, 0.75, 1.0])
                self._bin_edges[j] = q

    def bin_of(self, j: int, values: np.ndarray) -> np.ndarray:
        """Quartile bin index (0..3) of continuous values, clamped to the
        training range."""
        inner = self._bin_edges[j][1:4]
        return np.clip(np.searchsorted(inner, values, side="right"), 0, 3)

    def n_features(self) -> int:
        return len(self.schema)


def kernel_weight(x: np.ndarray, z: np.ndarray, kernel_width: float) -> float:
    """Exponential proximity kernel exp(-D(x, z)^2 / width^2) with D the
    Euclidean distance between the two interpretable vectors."""
    if kernel_width <= 0:
        raise ValueError("kernel width must be positive")
    x = np.asarray(x, dtype=np.float64)
    z = np.asarray(z, dtype=np.float64)
    if x.shape != z.shape:
        raise ValueError("points must live in the same interpretable space")
    d_sq = float(((x - z) ** 2).sum())
    return math.exp(-d_sq / (kernel_width ** 2))


def sample_neighbors(x: np.ndarray, train: Dataset | NeighbourhoodSampler,
                     n: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Draw `n` perturbed rows around `x`.

    Returns (raw rows, binary agreement matrix). Sample 0 is `x` itself with
    an all-ones agreement vector. Every other sample independently resamples
    a uniformly chosen subset of features from the training distributions.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    sampler = train if isinstance(train, NeighbourhoodSampler) else NeighbourhoodSampler(train)
    d = sampler.n_features()
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (d,):
        raise ValueError(f"instance width {x.shape} does not match schema width {d}")

    raw = np.tile(x, (n, 1))
    agree = np.ones((n, d))
    if n == 1:
        return raw, agree

    rng = np.random.default_rng(seed)
    m = n - 1
    resample = rng.random((m, d)) < 0.5
    for j, spec in enumerate(sampler.schema):
        if spec.kind == CATEGORICAL:
            draws = np.searchsorted(sampler._cat_cumprobs[j], rng.random(m),
                                    side="right").astype(np.float64)
            col = np.where(resample[:, j], draws, x[j])
            raw[1:, j] = col
            agree[1:, j] = (col == x[j]).astype(np.float64)
        else:
            edges = sampler._bin_edges[j]
            bins = rng.integers(0, 4, size=m)
            lo, hi = edges[bins], edges[bins + 1]
            draws = lo + rng.random(m) * (hi - lo)
            col = np.where(resample[:, j], draws, x[j])
            raw[1:, j] = col
            agree[1:, j] = (sampler.bin_of(j, col) ==
                            sampler.bin_of(j, np.array([x[j]]))[0]).astype(np.float64)
    return raw, agree


def fit_surrogate(agreements: np.ndarray, outputs: np.ndarray, weights: np.ndarray,
                  ridge_lambda: float, feature_names: tuple[str, ...],
                  kernel_width: float = float("nan")) -> Explanation:
    """Weighted least squares with an L2 penalty on the coefficients (the
    intercept is unpenalized), solved in closed form via the normal equations.
    """
    Z = np.asarray(agreements, dtype=np.float64)
    y = np.asarray(outputs, dtype=np.float64)
    w = np.asarray(weights, dtype=np.float64)
    n, d = Z.shape
    if len(feature_names) != d:
        raise ValueError("one name per interpretable slot required")
    if n < d + 1:
        raise ValueError(f"need at least {d + 1} samples to fit {d} coefficients")
    if (w < 0).any() or w.sum() <= 0:
        raise ValueError("weights must be non-negative and not all zero")
    if ridge_lambda < 0:
        raise ValueError("ridge_lambda must be non-negative")

    design = np.hstack([np.ones((n, 1)), Z])
    wd = design * w[:, None]
    normal = design.T @ wd
    normal[1:, 1:] += ridge_lambda * np.eye(d)
    rhs = wd.T @ y
    if np.linalg.cond(normal) > 1e12:
        raise SurrogateFitError(
            "degenerate surrogate system; the design is rank-deficient "
            "(increase ridge_lambda or the sample count)")
    solution = np.linalg.solve(normal, rhs)
    intercept, coef = float(solution[0]), solution[1:]

    fitted = design @ solution
    y_bar = (w * y).sum() / w.sum()
    ss_res = (w * (y - fitted) ** 2).sum()
    ss_tot = (w * (y - y_bar) ** 2).sum()
    if ss_tot < 1e-15:
        fidelity = 1.0 if ss_res < 1e-12 else 0.0
    else:
        fidelity = float(1.0 - ss_res / ss_tot)

    order = sorted(range(d), key=lambda i: (-abs(coef[i]), i))
    contributions = tuple((feature_names[i], float(coef[i])) for i in order)
    return Explanation(intercept=intercept, contributions=contributions,
                       kernel_width=float(kernel_width), n_samples=n,
                       local_fidelity=fidelity, feature_order=tuple(feature_names))


def default_kernel_width(n_features: int) -> float:
    return 0.75 * math.sqrt(n_features)


def explain(model, x: np.ndarray, train: Dataset | NeighbourhoodSampler,
            cfg: LimeConfig = LimeConfig()) -> Explanation:
    """Sample a neighbourhood around `x`, query the model on the raw rows,
    kernel-weight by agreement distance and fit the ridge surrogate to the
    class-1 probabilities. Deterministic under cfg.seed."""
    sampler = train if isinstance(train, NeighbourhoodSampler) else NeighbourhoodSampler(train)
    width = cfg.kernel_width if cfg.kernel_width is not None \
        else default_kernel_width(sampler.n_features())
    if width <= 0:
        raise ValueError("kernel width must be positive")
    raw, agree = sample_neighbors(x, sampler, cfg.n_samples, cfg.seed)
    outputs = model.predict_proba_batch(raw)
    d_sq = (1.0 - agree).sum(axis=1)  # squared distance to the all-ones vector
    weights = np.exp(-d_sq / width ** 2)
    names = tuple(f.name for f in sampler.schema)
    return fit_surrogate(agree, outputs, weights, cfg.ridge_lambda, names,
                         kernel_width=width)
