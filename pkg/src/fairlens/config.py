"""Run configuration shared by the pipeline, the report writer and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from .dataset import CATEGORICAL, Dataset
from .errors import ConfigError
from .metrics import PE_MODES, GroupSpec
from .models import FAMILIES


@dataclass(frozen=True)
class RunConfig:
    """Everything needed to reproduce an audit byte for byte.

    `sensitive` maps each sensitive feature to its privileged category values.
    The LIME knobs (`lime_n_samples`, `lime_kernel_width`, `lime_ridge_lambda`)
    and the pick budget default to fixed conventions recorded in the config
    snapshot; `candidate_cap` bounds how many test instances are explained per
    pass (a uniform subsample under the run seed when the test split is
    larger).
    """

    data_path: str = ""
    target_column: str = ""
    sensitive: dict[str, tuple[str, ...]] = field(default_factory=dict)
    family: str = "rf"
    hyperparameters: dict[str, Any] = field(default_factory=dict)
    k: int = 10
    repetitions: int = 10
    base_seed: int = 0
    pe_mode: str = "paper"
    out_dir: str = "audit-out"
    lime_n_samples: int = 5000
    lime_kernel_width: float | None = None
    lime_ridge_lambda: float = 1.0
    pool_budget: int = 25
    candidate_cap: int = 500
    train_fraction: float = 0.7
    smote: bool = True
    smote_k: int = 5
    figures: bool = True
    schema_hints: dict[str, str] = field(default_factory=dict)

    def group_specs(self) -> tuple[GroupSpec, ...]:
        return tuple(GroupSpec(feature, frozenset(values))
                     for feature, values in self.sensitive.items())

    def to_jsonable(self) -> dict:
        defaults = RunConfig()
        lime_defaults = [name for name in
                         ("lime_n_samples", "lime_kernel_width", "lime_ridge_lambda",
                          "pool_budget", "candidate_cap")
                         if getattr(self, name) == getattr(defaults, name)]
        return {
            "data_path": self.data_path,
            "target_column": self.target_column,
            "sensitive": {f: list(v) for f, v in self.sensitive.items()},
            "family": self.family,
            "hyperparameters": dict(self.hyperparameters),
            "k": self.k,
            "repetitions": self.repetitions,
            "base_seed": self.base_seed,
            "pe_mode": self.pe_mode,
            "lime": {
                "n_samples": self.lime_n_samples,
                "kernel_width": self.lime_kernel_width,
                "ridge_lambda": self.lime_ridge_lambda,
                "pool_budget": self.pool_budget,
                "candidate_cap": self.candidate_cap,
                "settings_from_defaults": lime_defaults,
            },
            "train_fraction": self.train_fraction,
            "smote": self.smote,
            "smote_k": self.smote_k,
            "figures": self.figures,
            "schema_hints": dict(self.schema_hints),
        }


def validate_config(cfg: RunConfig, d: Dataset) -> None:
    """Raise ConfigError for anything a run could not recover from."""
    if cfg.family not in FAMILIES:
        raise ConfigError(f"unknown model family {cfg.family!r}")
    if cfg.k < 2:
        raise ConfigError("k must be at least 2")
    if cfg.repetitions < 1:
        raise ConfigError("repetitions must be at least 1")
    if not 0.0 < cfg.train_fraction < 1.0:
        raise ConfigError("train fraction must lie strictly between 0 and 1")
    if cfg.pe_mode not in PE_MODES:
        raise ConfigError(f"pe mode must be one of {PE_MODES}")
    if cfg.lime_n_samples < d.n_features + 1:
        raise ConfigError("lime n_samples must exceed the feature count")
    if cfg.pool_budget < 1 or cfg.candidate_cap < 1:
        raise ConfigError("pool budget and candidate cap must be positive")
    if not cfg.sensitive:
        raise ConfigError("at least one sensitive feature must be declared")
    names = set(d.feature_names)
    for feature, values in cfg.sensitive.items():
        if feature not in names:
            raise ConfigError(f"sensitive feature {feature!r} not in the data")
        spec = d.schema[d.feature_index(feature)]
        if spec.kind != CATEGORICAL:
            raise ConfigError(f"sensitive feature {feature!r} must be categorical")
        if not values:
            raise ConfigError(f"no privileged values given for {feature!r}")
        unknown = set(values) - set(spec.categories)
        if unknown:
            raise ConfigError(
                f"privileged values {sorted(unknown)} not observed in {feature!r}")
        if set(values) == set(spec.categories):
            raise ConfigError(
                f"privileged values for {feature!r} cover every category")
