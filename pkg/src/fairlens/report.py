"""Audit driver and artifact emission.

`run_audit` executes the pipeline once per repetition seed, aggregates the
records, and writes a stable artifact tree:

    out/
      config.json             resolved configuration snapshot
      runs/<seed>/record.json one file per repetition
      tables/accuracy.csv     original vs ensemble accuracy, "mean (std)" cells
      tables/explanations.csv per-seed top-k lists for both models
      plotdata/metric_points.csv  per-seed and mean metric values
      figures/*.png           rendered views of the plot data

Identical configurations produce byte-identical trees. Repetitions may run in
parallel processes (capped by the FAIRLENS_THREADS environment variable,
0 = one worker per CPU); results are ordered by seed before writing so
parallelism never changes the output.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .config import RunConfig, validate_config
from .dataset import Dataset, load_csv, write_csv  # noqa: F401  (write_csv is part of this surface)
from .errors import ConfigError, PipelineError
from .models import ModelSpec, resolve_hyperparameters
from .pipeline import RunRecord, run_single_audit

_METRICS = ("di", "eo", "dp", "ea", "pe")
_OPTIMAL = {"di": 1.0, "eo": 0.0, "dp": 0.0, "ea": 0.0, "pe": 0.0}
_PNG_METADATA = {"Software": "fairlens"}


@dataclass
class AuditRun:
    """Config snapshot, per-repetition records and their summary statistics."""

    config: dict
    records: list[RunRecord]
    summary: dict = field(default_factory=dict)

    @property
    def family(self) -> str:
        return self.config["family"]

    @property
    def sensitive_features(self) -> tuple[str, ...]:
        return tuple(self.config["sensitive"])

    def fired_records(self) -> list[RunRecord]:
        return [r for r in self.records if r.gate.deemed_unfair]


def _mean_std(values: list[float]) -> dict:
    arr = np.asarray(values, dtype=np.float64)
    return {"mean": float(arr.mean()), "std": float(arr.std()), "n": int(arr.size)}


def summarize(records: list[RunRecord], sensitive: tuple[str, ...]) -> dict:
    """Means and population standard deviations over the repetition records."""
    fired = [r for r in records if r.gate.deemed_unfair]
    summary = {
        "original_accuracy": _mean_std([r.original_accuracy for r in records]),
        "ensemble_accuracy": (_mean_std([r.ensemble_accuracy for r in fired])
                              if fired else None),
        "gate_fired": len(fired),
        "repetitions": len(records),
        "metrics": {},
    }
    for feature in sensitive:
        block: dict = {}
        for side, pool in (("original", records), ("ensemble", fired)):
            for name in _METRICS:
                values = [r.metrics[feature][side]["values"][name] for r in pool
                          if r.metrics[feature][side] is not None
                          and r.metrics[feature][side]["values"][name] is not None]
                block[f"{side}_{name}"] = _mean_std(values) if values else None
        summary["metrics"][feature] = block
    return summary


def _run_one(args) -> RunRecord:
    cfg, dataset, seed = args
    spec = ModelSpec(cfg.family, cfg.hyperparameters, seed=0)
    try:
        return run_single_audit(spec, dataset, cfg, seed)
    except Exception as exc:
        raise PipelineError(f"repetition with seed {seed} failed: {exc}") from exc


def _worker_count() -> int:
    raw = os.environ.get("FAIRLENS_THREADS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"FAIRLENS_THREADS must be an integer, got {raw!r}") from None
    if n == 0:
        return os.cpu_count() or 1
    return max(1, n)


def run_audit(cfg: RunConfig, dataset: Dataset | None = None) -> AuditRun:
    """Execute every repetition, summarize, and write the artifact tree."""
    if dataset is None:
        dataset = load_csv(cfg.data_path, cfg.target_column,
                           schema_hints=cfg.schema_hints or None)
    validate_config(cfg, dataset)
    resolved = resolve_hyperparameters(ModelSpec(cfg.family, cfg.hyperparameters))

    seeds = list(range(cfg.base_seed, cfg.base_seed + cfg.repetitions))
    workers = _worker_count()
    jobs = [(cfg, dataset, seed) for seed in seeds]
    if workers > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(max_workers=min(workers, len(seeds))) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(job) for job in jobs]
    records.sort(key=lambda r: r.seed)

    config_snapshot = cfg.to_jsonable()
    config_snapshot["resolved_hyperparameters"] = resolved
    run = AuditRun(config=config_snapshot, records=records)
    run.summary = summarize(records, run.sensitive_features)
    write_artifacts(run, Path(cfg.out_dir), figures=cfg.figures)
    return run


def _fmt(value: float) -> str:
    return f"{value:.3f}"


def emit_accuracy_table(run: AuditRun) -> str:
    """CSV with "mean (std)" cells; a dash marks a model whose gate never
    fired (no ensemble was built)."""
    orig = run.summary["original_accuracy"]
    ens = run.summary["ensemble_accuracy"]
    lines = [f"variant,{run.family}"]
    lines.append(f"original,{_fmt(orig['mean'])} ({_fmt(orig['std'])})")
    if ens is None:
        lines.append("ensemble,-")
    else:
        lines.append(f"ensemble,{_fmt(ens['mean'])} ({_fmt(ens['std'])})")
    return "\n".join(lines) + "\n"


def emit_explanation_tables(run: AuditRun) -> str:
    """Long-form CSV of the per-seed top-k lists for both models, sensitive
    features flagged."""
    sensitive = set(run.sensitive_features)
    lines = ["seed,side,rank,feature,contribution,sensitive"]
    for record in run.records:
        sides = [("original", record.original_global)]
        if record.ensemble_global is not None:
            sides.append(("ensemble", record.ensemble_global))
        for side, g in sides:
            for rank, (name, value) in enumerate(g.entries[:g.k], start=1):
                flag = "yes" if name in sensitive else "no"
                lines.append(f"{record.seed},{side},{rank},{name},{value:.6f},{flag}")
    return "\n".join(lines) + "\n"


def emit_metric_points(run: AuditRun) -> str:
    """Per (sensitive feature, metric): original and ensemble values per seed
    plus their means, with the optimal reference (1 for di, 0 otherwise).
    Repetitions whose gate passed are omitted, matching the dash convention."""
    lines = ["family,feature,metric,seed,original,ensemble,optimal"]

    def cell(v):
        return "" if v is None else repr(float(v))

    for feature in run.sensitive_features:
        for metric in _METRICS:
            pairs = []
            for r in run.fired_records():
                orig = r.metrics[feature]["original"]["values"][metric]
                ens = r.metrics[feature]["ensemble"]["values"][metric]
                lines.append(f"{run.family},{feature},{metric},{r.seed},"
                             f"{cell(orig)},{cell(ens)},{_OPTIMAL[metric]}")
                if orig is not None and ens is not None:
                    pairs.append((orig, ens))
            if pairs:
                o = float(np.mean([p[0] for p in pairs]))
                e = float(np.mean([p[1] for p in pairs]))
                lines.append(f"{run.family},{feature},{metric},mean,"
                             f"{cell(o)},{cell(e)},{_OPTIMAL[metric]}")
    return "\n".join(lines) + "\n"


def render_metric_figure(run: AuditRun, path: Path) -> bool:
    """One panel per metric: per-seed original (blue) and ensemble (red)
    points over the sensitive features, dashed line at the optimum. Returns
    False when no repetition fired (nothing to compare)."""
    fired = run.fired_records()
    if not fired:
        return False
    features = list(run.sensitive_features)
    fig, axes = plt.subplots(1, len(_METRICS), figsize=(3.2 * len(_METRICS), 3.2))
    for ax, metric in zip(np.atleast_1d(axes), _METRICS):
        for xi, feature in enumerate(features):
            for r in fired:
                orig = r.metrics[feature]["original"]["values"][metric]
                ens = r.metrics[feature]["ensemble"]["values"][metric]
                if orig is not None:
                    ax.plot(xi - 0.08, orig, "o", color="tab:blue", ms=3.5, alpha=0.75)
                if ens is not None:
                    ax.plot(xi + 0.08, ens, "o", color="tab:red", ms=3.5, alpha=0.75)
        ax.axhline(_OPTIMAL[metric], ls="--", lw=0.8, color="black")
        ax.set_title(metric.upper(), fontsize=10)
        ax.set_xticks(range(len(features)))
        ax.set_xticklabels(features, rotation=45, ha="right", fontsize=7)
        ax.tick_params(labelsize=7)
    handles = [plt.Line2D([], [], marker="o", ls="", color="tab:blue", label="original"),
               plt.Line2D([], [], marker="o", ls="", color="tab:red", label="ensemble")]
    fig.legend(handles=handles, loc="upper center", ncol=2, fontsize=8, frameon=False)
    fig.tight_layout(rect=(0, 0, 1, 0.93))
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
    return True


def render_explanation_figure(record: RunRecord, sensitive: tuple[str, ...],
                              path: Path) -> bool:
    """Side-by-side horizontal bars of the top-k contributions for the
    original model and (when present) the ensemble; sensitive bars in red."""
    sides = [("original", record.original_global)]
    if record.ensemble_global is not None:
        sides.append(("ensemble", record.ensemble_global))
    fig, axes = plt.subplots(1, len(sides), figsize=(5.2 * len(sides), 4.2))
    for ax, (title, g) in zip(np.atleast_1d(axes), sides):
        top = list(g.entries[:g.k])[::-1]
        names = [n for n, _ in top]
        values = [v for _, v in top]
        colors = ["tab:red" if n in set(sensitive) else "tab:blue" for n in names]
        ax.barh(range(len(top)), values, color=colors)
        ax.set_yticks(range(len(top)))
        ax.set_yticklabels(names, fontsize=7)
        ax.axvline(0.0, lw=0.8, color="black")
        ax.set_title(f"{title} (seed {record.seed})", fontsize=10)
        ax.tick_params(labelsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata=_PNG_METADATA)
    plt.close(fig)
    return True


def _dump_json(blob: dict, path: Path) -> None:
    path.write_text(json.dumps(blob, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def write_artifacts(run: AuditRun, out_dir: Path, figures: bool = True) -> None:
    out_dir = Path(out_dir)
    (out_dir / "runs").mkdir(parents=True, exist_ok=True)
    (out_dir / "tables").mkdir(exist_ok=True)
    (out_dir / "plotdata").mkdir(exist_ok=True)
    _dump_json(run.config, out_dir / "config.json")
    _dump_json({"summary": run.summary}, out_dir / "summary.json")
    sensitive = frozenset(run.sensitive_features)
    for record in run.records:
        rec_dir = out_dir / "runs" / str(record.seed)
        rec_dir.mkdir(exist_ok=True)
        _dump_json(record.to_jsonable(sensitive), rec_dir / "record.json")
    (out_dir / "tables" / "accuracy.csv").write_text(emit_accuracy_table(run),
                                                     encoding="utf-8")
    (out_dir / "tables" / "explanations.csv").write_text(emit_explanation_tables(run),
                                                         encoding="utf-8")
    (out_dir / "plotdata" / "metric_points.csv").write_text(emit_metric_points(run),
                                                            encoding="utf-8")
    if figures:
        fig_dir = out_dir / "figures"
        fig_dir.mkdir(exist_ok=True)
        render_metric_figure(run, fig_dir / "fairness_metrics.png")
        shown = run.fired_records() or run.records
        render_explanation_figure(shown[0], run.sensitive_features,
                                  fig_dir / "explanations.png")
