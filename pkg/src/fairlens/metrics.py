"""Outcome-fairness metrics over predictions grouped by a sensitive feature.

Five metrics are computed from a two-group confusion table: disparate impact
(ratio of predicted-positive rates, optimal 1), equal opportunity (recall
difference), demographic parity (predicted-positive rate difference), equal
accuracy (accuracy difference) and predictive equality (false-positive-share
difference). All differences are unprivileged minus privileged with optimum 0.

Predictive equality supports two denominators: the default "paper" mode uses
FP / (FP + TP); "conventional" uses the standard false positive rate
FP / (FP + TN). The chosen mode is recorded alongside the values.

Undefined cases (empty group, zero denominator) never propagate NaN: the
metric returns None and the vector records an explanatory flag.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CATEGORICAL, Dataset

PE_MODES = ("paper", "conventional")


@dataclass(frozen=True)
class GroupSpec:
    """A sensitive feature plus the category values forming the privileged
    group; everything else is unprivileged."""

    feature: str
    privileged_values: frozenset[str]

    def __post_init__(self):
        if not self.privileged_values:
            raise ValueError("privileged_values must be non-empty")
        object.__setattr__(self, "privileged_values", frozenset(self.privileged_values))


@dataclass(frozen=True)
class GroupConfusion:
    """Per-group prediction tallies. The two groups partition the scored set."""

    tp_priv: int
    fp_priv: int
    tn_priv: int
    fn_priv: int
    tp_unp: int
    fp_unp: int
    tn_unp: int
    fn_unp: int

    def __post_init__(self):
        for name in self.__dataclass_fields__:
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def n_priv(self) -> int:
        return self.tp_priv + self.fp_priv + self.tn_priv + self.fn_priv

    @property
    def n_unp(self) -> int:
        return self.tp_unp + self.fp_unp + self.tn_unp + self.fn_unp

    def swapped(self) -> "GroupConfusion":
        """The same table with the privileged / unprivileged roles exchanged."""
        return GroupConfusion(self.tp_unp, self.fp_unp, self.tn_unp, self.fn_unp,
                              self.tp_priv, self.fp_priv, self.tn_priv, self.fn_priv)


@dataclass(frozen=True)
class MetricVector:
    """The five metric values (None where undefined) plus the flags explaining
    any undefined entries and the predictive-equality mode used."""

    di: float | None
    eo: float | None
    dp: float | None
    ea: float | None
    pe: float | None
    pe_mode: str
    flags: tuple[str, ...] = ()

    def to_jsonable(self, feature: str) -> dict:
        return {"feature": feature, "mode": self.pe_mode, "di": self.di, "eo": self.eo,
                "dp": self.dp, "ea": self.ea, "pe": self.pe, "flags": list(self.flags)}


def group_confusion(model, d: Dataset, g: GroupSpec) -> GroupConfusion:
    """Tally thresholded predictions against labels per group."""
    idx = d.feature_index(g.feature)
    spec = d.schema[idx]
    if spec.kind != CATEGORICAL:
        raise ValueError(f"sensitive feature {g.feature!r} must be categorical")
    unknown = g.privileged_values - set(spec.categories)
    if unknown:
        raise ValueError(f"privileged values not among categories: {sorted(unknown)}")
    if g.privileged_values == set(spec.categories):
        raise ValueError("privileged values must be a strict subset of the categories")

    priv_codes = np.array([i for i, c in enumerate(spec.categories)
                           if c in g.privileged_values])
    priv = np.isin(d.rows[:, idx].astype(np.int64), priv_codes)
    if not priv.any() or priv.all():
        raise ValueError(f"one of the groups for {g.feature!r} is empty")

    pred = (model.predict_proba_batch(d.rows) >= 0.5).astype(np.int64)
    counts = {}
    for tag, mask in (("priv", priv), ("unp", ~priv)):
        y, p = d.target[mask], pred[mask]
        counts[f"tp_{tag}"] = int(((y == 1) & (p == 1)).sum())
        counts[f"fp_{tag}"] = int(((y == 0) & (p == 1)).sum())
        counts[f"tn_{tag}"] = int(((y == 0) & (p == 0)).sum())
        counts[f"fn_{tag}"] = int(((y == 1) & (p == 0)).sum())
    return GroupConfusion(**counts)


def _rate(num: int, den: int) -> float | None:
    return num / den if den > 0 else None


def disparate_impact(c: GroupConfusion) -> float | None:
    """Ratio of predicted-positive rates, unprivileged over privileged."""
    r_unp = _rate(c.tp_unp + c.fp_unp, c.n_unp)
    r_priv = _rate(c.tp_priv + c.fp_priv, c.n_priv)
    if r_unp is None or r_priv is None or r_priv == 0:
        return None
    return r_unp / r_priv


def equal_opportunity(c: GroupConfusion) -> float | None:
    """Recall difference between the groups."""
    r_unp = _rate(c.tp_unp, c.tp_unp + c.fn_unp)
    r_priv = _rate(c.tp_priv, c.tp_priv + c.fn_priv)
    if r_unp is None or r_priv is None:
        return None
    return r_unp - r_priv


def demographic_parity(c: GroupConfusion) -> float | None:
    """Predicted-positive rate difference between the groups."""
    r_unp = _rate(c.tp_unp + c.fp_unp, c.n_unp)
    r_priv = _rate(c.tp_priv + c.fp_priv, c.n_priv)
    if r_unp is None or r_priv is None:
        return None
    return r_unp - r_priv


def equal_accuracy(c: GroupConfusion) -> float | None:
    """Accuracy difference between the groups."""
    a_unp = _rate(c.tp_unp + c.tn_unp, c.n_unp)
    a_priv = _rate(c.tp_priv + c.tn_priv, c.n_priv)
    if a_unp is None or a_priv is None:
        return None
    return a_unp - a_priv


def predictive_equality(c: GroupConfusion, mode: str = "paper") -> float | None:
    """False-positive share difference. Mode "paper" divides FP by FP + TP;
    mode "conventional" divides by FP + TN (the standard false positive rate)."""
    if mode not in PE_MODES:
        raise ValueError(f"pe mode must be one of {PE_MODES}")
    if mode == "paper":
        r_unp = _rate(c.fp_unp, c.fp_unp + c.tp_unp)
        r_priv = _rate(c.fp_priv, c.fp_priv + c.tp_priv)
    else:
        r_unp = _rate(c.fp_unp, c.fp_unp + c.tn_unp)
        r_priv = _rate(c.fp_priv, c.fp_priv + c.tn_priv)
    if r_unp is None or r_priv is None:
        return None
    return r_unp - r_priv


def compute_metrics(c: GroupConfusion, pe_mode: str = "paper") -> MetricVector:
    """All five metrics with undefined entries flagged."""
    values = {
        "di": disparate_impact(c),
        "eo": equal_opportunity(c),
        "dp": demographic_parity(c),
        "ea": equal_accuracy(c),
        "pe": predictive_equality(c, pe_mode),
    }
    flags = tuple(f"{name}: undefined (zero denominator)"
                  for name, v in values.items() if v is None)
    return MetricVector(pe_mode=pe_mode, flags=flags, **values)


def counterfactual_flip_rate(model, d: Dataset, feature: str) -> float:
    """Auxiliary individual-treatment probe: the fraction of rows whose
    predicted label changes when the sensitive feature is set to any other
    category. Not one of the five metric values."""
    idx = d.feature_index(feature)
    spec = d.schema[idx]
    if spec.kind != CATEGORICAL:
        raise ValueError(f"flip probe needs a categorical feature, got {feature!r}")
    base = (model.predict_proba_batch(d.rows) >= 0.5)
    flipped = np.zeros(d.n_rows, dtype=bool)
    for code in range(len(spec.categories)):
        rows = d.rows.copy()
        mask = rows[:, idx] != code
        if not mask.any():
            continue
        rows[:, idx] = code
        alt = (model.predict_proba_batch(rows) >= 0.5)
        flipped |= mask & (alt != base)
    return float(flipped.mean())
