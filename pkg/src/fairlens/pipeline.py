"""The audit workflow: explain globally, gate on sensitive reliance, and if
the gate fires build the feature-dropout ensemble and re-audit it.

A model is deemed unfair when at least two declared sensitive features appear
among the k most important features of its global explanation. The remedy
trains one classifier per offending feature (that feature removed) plus one
with all offending features removed, and averages their probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import RunConfig
from .dataset import Dataset, smote, split
from .global_explain import GlobalExplanation, aggregate, submodular_pick, top_k
from .lime import LimeConfig, NeighbourhoodSampler, explain
from .metrics import MetricVector, compute_metrics, counterfactual_flip_rate, group_confusion
from .models import ModelSpec, TrainedModel, accuracy, train
from .seeding import LIME, SMOTE, SPLIT, SUBSAMPLE, TRAIN, derived_rng, derived_seed


@dataclass(frozen=True)
class FairnessGateResult:
    """Outcome of the top-k scan: the sensitive features found, in rank order,
    and whether that count reaches the unfairness threshold of two."""

    deemed_unfair: bool
    sensitive_in_topk: tuple[str, ...]
    k: int

    def __post_init__(self):
        if self.deemed_unfair != (len(self.sensitive_in_topk) >= 2):
            raise ValueError("gate flag inconsistent with the sensitive feature count")

    def to_jsonable(self) -> dict:
        return {"deemed_unfair": self.deemed_unfair,
                "sensitive_in_topk": list(self.sensitive_in_topk), "k": self.k}


class EnsembleModel:
    """Unweighted probability average of the dropout-retrained members.

    The mean is anchored on the first member (p0 + sum(pi - p0) / n) so an
    ensemble of identical members reproduces the single model bit for bit.
    """

    def __init__(self, members: tuple[TrainedModel, ...],
                 provenance: tuple[frozenset[str], ...]):
        if len(members) < 2:
            raise ValueError("an ensemble needs at least two members")
        if len(members) != len(provenance):
            raise ValueError("one dropped-feature set per member required")
        self.members = members
        self.provenance = provenance
        self.schema = members[0].schema

    def predict_proba_batch(self, X: np.ndarray) -> np.ndarray:
        probs = [m.predict_proba_batch(X) for m in self.members]
        deltas = sum(p - probs[0] for p in probs[1:])
        return probs[0] + deltas / len(probs)

    def predict_proba(self, x: np.ndarray) -> float:
        return float(self.predict_proba_batch(np.asarray(x, dtype=np.float64))[0])

    def predict_batch(self, X: np.ndarray) -> np.ndarray:
        return (self.predict_proba_batch(X) >= 0.5).astype(np.int64)


def gate(g: GlobalExplanation, sensitive: frozenset[str] | set[str], k: int) \
        -> FairnessGateResult:
    """Scan the top-k entries in rank order and collect the sensitive ones."""
    found = tuple(name for name, _ in top_k(g, k) if name in set(sensitive))
    return FairnessGateResult(deemed_unfair=len(found) >= 2,
                              sensitive_in_topk=found, k=k)


def build_pool(spec: ModelSpec, train_data: Dataset,
               gate_result: FairnessGateResult) -> EnsembleModel:
    """Train one member per offending sensitive feature (that feature dropped)
    plus a final member with all of them dropped; each member's seed is the
    model spec's seed plus its position, so retraining stays reproducible."""
    if not gate_result.deemed_unfair:
        raise ValueError("the gate passed; there is no pool to build")
    singles = [frozenset([name]) for name in gate_result.sensitive_in_topk]
    drops = singles + [frozenset(gate_result.sensitive_in_topk)]
    deduped: list[frozenset[str]] = []
    for ds in drops:
        if ds not in deduped:
            deduped.append(ds)
    members = tuple(train(spec.with_seed(spec.seed + t + 1), train_data, ds)
                    for t, ds in enumerate(deduped))
    return EnsembleModel(members=members, provenance=tuple(deduped))


def ensemble_predict_proba(e: EnsembleModel, x: np.ndarray) -> float:
    """Mean member probability for one row (label 1 iff the mean >= 0.5)."""
    return e.predict_proba(x)


def lime_global(model, test: Dataset, sampler: NeighbourhoodSampler,
                cfg: RunConfig, seed: int, pass_id: int) -> GlobalExplanation:
    """Explain a (possibly subsampled) set of test instances and aggregate.

    When the test split exceeds the candidate cap, a uniform subsample under
    the run seed is used. The pick budget is clamped to the candidate count.
    """
    if test.n_rows == 0:
        raise ValueError("cannot build a global explanation from an empty test split")
    if test.n_rows <= cfg.candidate_cap:
        candidates = np.arange(test.n_rows)
    else:
        rng = derived_rng(seed, SUBSAMPLE, pass_id)
        candidates = np.sort(rng.choice(test.n_rows, size=cfg.candidate_cap,
                                        replace=False))
    explanations = []
    for i, row_idx in enumerate(candidates):
        lime_cfg = LimeConfig(n_samples=cfg.lime_n_samples,
                              kernel_width=cfg.lime_kernel_width,
                              ridge_lambda=cfg.lime_ridge_lambda,
                              seed=derived_seed(seed, LIME, pass_id, i))
        explanations.append(explain(model, test.rows[row_idx], sampler, lime_cfg))
    budget = min(cfg.pool_budget, len(explanations))
    picked = submodular_pick(explanations, budget)
    g = aggregate(explanations, picked, k=min(cfg.k, test.n_features))
    return GlobalExplanation(entries=g.entries,
                             picked_instances=tuple(int(candidates[i]) for i in picked),
                             budget=g.budget, k=g.k)


@dataclass(frozen=True)
class RunRecord:
    """Everything measured in one repetition of the audit."""

    seed: int
    original_accuracy: float
    gate: FairnessGateResult
    original_global: GlobalExplanation
    ensemble_accuracy: float | None = None
    ensemble_global: GlobalExplanation | None = None
    member_drops: tuple[tuple[str, ...], ...] | None = None
    metrics: dict[str, dict] = field(default_factory=dict)

    def to_jsonable(self, sensitive: frozenset[str]) -> dict:
        blob = {
            "seed": self.seed,
            "original_accuracy": self.original_accuracy,
            "gate": self.gate.to_jsonable(),
            "original_global": self.original_global.to_jsonable(sensitive),
            "ensemble_accuracy": self.ensemble_accuracy,
            "ensemble_global": (self.ensemble_global.to_jsonable(sensitive)
                                if self.ensemble_global else None),
            "member_drops": ([list(ds) for ds in self.member_drops]
                             if self.member_drops else None),
            "metrics": self.metrics,
        }
        return blob


def _metric_block(model, test: Dataset, cfg: RunConfig) -> dict[str, dict]:
    out: dict[str, dict] = {}
    for g in cfg.group_specs():
        confusion = group_confusion(model, test, g)
        vector = compute_metrics(confusion, cfg.pe_mode)
        out[g.feature] = {
            "values": vector.to_jsonable(g.feature),
            "counterfactual_flip_rate": counterfactual_flip_rate(model, test, g.feature),
        }
    return out


def run_single_audit(spec: ModelSpec, d: Dataset, cfg: RunConfig, seed: int) -> RunRecord:
    """One full repetition: split, balance, train, explain, gate, and when the
    gate fires, build the dropout ensemble and score both models."""
    pair = split(d, cfg.train_fraction, derived_seed(seed, SPLIT))
    train_data = pair.train
    if cfg.smote:
        train_data = smote(train_data, cfg.smote_k, derived_seed(seed, SMOTE))

    trained_spec = spec.with_seed(derived_seed(seed, TRAIN))
    original = train(trained_spec, train_data, frozenset())
    sampler = NeighbourhoodSampler(train_data)

    original_global = lime_global(original, pair.test, sampler, cfg, seed, pass_id=0)
    sensitive = frozenset(cfg.sensitive)
    gate_result = gate(original_global, sensitive, original_global.k)

    original_metrics = _metric_block(original, pair.test, cfg)
    metrics_blob = {feature: {"original": block, "ensemble": None}
                    for feature, block in original_metrics.items()}
    record = RunRecord(
        seed=seed,
        original_accuracy=accuracy(original, pair.test),
        gate=gate_result,
        original_global=original_global,
        metrics=metrics_blob,
    )
    if not gate_result.deemed_unfair:
        return record

    pool = build_pool(trained_spec, train_data, gate_result)
    ensemble_global = lime_global(pool, pair.test, sampler, cfg, seed, pass_id=1)
    ensemble_metrics = _metric_block(pool, pair.test, cfg)
    for feature, block in ensemble_metrics.items():
        metrics_blob[feature]["ensemble"] = block
    return RunRecord(
        seed=seed,
        original_accuracy=record.original_accuracy,
        gate=gate_result,
        original_global=original_global,
        ensemble_accuracy=accuracy(pool, pair.test),
        ensemble_global=ensemble_global,
        member_drops=tuple(tuple(sorted(ds)) for ds in pool.provenance),
        metrics=metrics_blob,
    )
