"""Command-line interface.

    fairlens audit    full audit: split, balance, train, explain, gate,
                      dropout ensemble, metrics, artifact tree
    fairlens explain  one local explanation for a single row
    fairlens metrics  the five fairness metrics from a predictions file

Exit codes: 0 success, 1 configuration error, 2 pipeline error.
"""

from __future__ import annotations

import csv
import json
import sys
from pathlib import Path

import click

from .config import RunConfig, validate_config
from .dataset import load_csv
from .errors import ConfigError, DataFormatError
from .lime import LimeConfig, explain as lime_explain
from .metrics import GroupConfusion, GroupSpec, compute_metrics
from .models import FAMILIES, ModelSpec, train
from .report import run_audit

CONFIG_EXIT = 1
PIPELINE_EXIT = 2


def _fail(code: int, message: str) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _parse_sensitive(entries: tuple[str, ...]) -> dict[str, tuple[str, ...]]:
    sensitive: dict[str, tuple[str, ...]] = {}
    for entry in entries:
        if "=" not in entry:
            raise ConfigError(
                f"--sensitive expects feature=value1|value2,..., got {entry!r}")
        feature, _, values = entry.partition("=")
        privileged = tuple(v for v in values.split("|") if v)
        if not feature or not privileged:
            raise ConfigError(f"--sensitive entry {entry!r} names no privileged values")
        sensitive[feature] = privileged
    return sensitive


def _load_hints(path: str | None) -> dict[str, str]:
    if not path:
        return {}
    try:
        blob = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read schema hints {path!r}: {exc}") from exc
    if not isinstance(blob, dict) or not all(isinstance(v, str) for v in blob.values()):
        raise ConfigError("schema hints must be a JSON object of column -> kind")
    return blob


def _parse_hyper(entries: tuple[str, ...]) -> dict:
    out = {}
    for entry in entries:
        if "=" not in entry:
            raise ConfigError(f"--hyper expects name=value, got {entry!r}")
        name, _, raw = entry.partition("=")
        try:
            out[name] = json.loads(raw)
        except json.JSONDecodeError:
            out[name] = raw
    return out


@click.group()
def main() -> None:
    """Audit binary classifiers for reliance on sensitive features and build
    feature-dropout ensembles when they fail the check."""


@main.command()
@click.option("--data", required=True, help="CSV file with a header row.")
@click.option("--target", required=True, help="Binary target column name.")
@click.option("--sensitive", "sensitive_entries", multiple=True, required=True,
              help="feature=privileged1|privileged2 (repeatable).")
@click.option("--model", "family", default="rf",
              type=click.Choice(list(FAMILIES)), show_default=True)
@click.option("--hyper", "hyper_entries", multiple=True,
              help="Hyperparameter override name=value (repeatable).")
@click.option("--k", default=10, show_default=True, help="Top-k gate length.")
@click.option("--reps", default=10, show_default=True, help="Repetitions.")
@click.option("--seed", default=0, show_default=True, help="Base seed.")
@click.option("--pe-mode", default="paper", type=click.Choice(["paper", "conventional"]),
              show_default=True, help="Predictive-equality denominator.")
@click.option("--out", default="audit-out", show_default=True, help="Artifact directory.")
@click.option("--n-samples", default=5000, show_default=True,
              help="Perturbation samples per explanation.")
@click.option("--kernel-width", default=None, type=float,
              help="Proximity kernel width (default 0.75*sqrt(features)).")
@click.option("--ridge-lambda", default=1.0, show_default=True,
              help="Surrogate L2 penalty.")
@click.option("--budget", default=25, show_default=True, help="Instance pick budget.")
@click.option("--candidate-cap", default=500, show_default=True,
              help="Max test instances explained per pass.")
@click.option("--train-fraction", default=0.7, show_default=True)
@click.option("--smote/--no-smote", default=True, show_default=True,
              help="Balance the training split by synthetic oversampling.")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render PNG figures alongside the CSV artifacts.")
@click.option("--schema-hints", default=None,
              help="JSON file of column -> categorical|continuous overrides.")
def audit(data, target, sensitive_entries, family, hyper_entries, k, reps, seed,
          pe_mode, out, n_samples, kernel_width, ridge_lambda, budget,
          candidate_cap, train_fraction, smote, figures, schema_hints) -> None:
    """Run the full audit and write the artifact tree."""
    try:
        cfg = RunConfig(
            data_path=data, target_column=target,
            sensitive=_parse_sensitive(sensitive_entries),
            family=family, hyperparameters=_parse_hyper(hyper_entries),
            k=k, repetitions=reps, base_seed=seed, pe_mode=pe_mode, out_dir=out,
            lime_n_samples=n_samples, lime_kernel_width=kernel_width,
            lime_ridge_lambda=ridge_lambda, pool_budget=budget,
            candidate_cap=candidate_cap, train_fraction=train_fraction,
            smote=smote, figures=figures, schema_hints=_load_hints(schema_hints),
        )
        dataset = load_csv(cfg.data_path, cfg.target_column,
                           schema_hints=cfg.schema_hints or None)
        validate_config(cfg, dataset)
        ModelSpec(cfg.family, cfg.hyperparameters)
    except (ConfigError, DataFormatError, ValueError) as exc:
        _fail(CONFIG_EXIT, str(exc))
    try:
        run = run_audit(cfg, dataset)
    except Exception as exc:  # anything past validation is a pipeline failure
        _fail(PIPELINE_EXIT, str(exc))
    fired = run.summary["gate_fired"]
    click.echo(f"audit complete: {fired}/{run.summary['repetitions']} repetitions "
               f"deemed the model unfair; artifacts in {out}")


@main.command(name="explain")
@click.option("--data", required=True, help="CSV file with a header row.")
@click.option("--target", required=True, help="Binary target column name.")
@click.option("--row", required=True, type=int, help="Row index to explain.")
@click.option("--model", "family", default="rf",
              type=click.Choice(list(FAMILIES)), show_default=True)
@click.option("--hyper", "hyper_entries", multiple=True,
              help="Hyperparameter override name=value (repeatable).")
@click.option("--drop", default="", help="Comma-separated features to drop at training.")
@click.option("--n-samples", default=5000, show_default=True)
@click.option("--kernel-width", default=None, type=float)
@click.option("--ridge-lambda", default=1.0, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--schema-hints", default=None)
def explain_command(data, target, row, family, hyper_entries, drop, n_samples,
                    kernel_width, ridge_lambda, seed, schema_hints) -> None:
    """Train on the full file and print one local explanation as JSON."""
    try:
        dataset = load_csv(data, target, schema_hints=_load_hints(schema_hints) or None)
        if not 0 <= row < dataset.n_rows:
            raise ConfigError(f"row {row} out of range (file has {dataset.n_rows} rows)")
        dropped = frozenset(f for f in drop.split(",") if f)
        spec = ModelSpec(family, _parse_hyper(hyper_entries), seed=seed)
    except (ConfigError, DataFormatError, ValueError) as exc:
        _fail(CONFIG_EXIT, str(exc))
    try:
        model = train(spec, dataset, dropped)
        cfg = LimeConfig(n_samples=n_samples, kernel_width=kernel_width,
                         ridge_lambda=ridge_lambda, seed=seed)
        result = lime_explain(model, dataset.rows[row], dataset, cfg)
    except Exception as exc:
        _fail(PIPELINE_EXIT, str(exc))
    click.echo(result.to_json())


@main.command(name="metrics")
@click.option("--predictions", required=True,
              help="CSV with columns y_true, y_pred, group.")
@click.option("--feature", required=True, help="Name reported in the output JSON.")
@click.option("--privileged", required=True,
              help="Privileged group values, pipe-separated.")
@click.option("--pe-mode", default="paper", type=click.Choice(["paper", "conventional"]),
              show_default=True)
def metrics_command(predictions, feature, privileged, pe_mode) -> None:
    """Compute the five fairness metrics from labelled predictions."""
    try:
        rows = _read_predictions(predictions)
        privileged_values = frozenset(v for v in privileged.split("|") if v)
        GroupSpec(feature, privileged_values)  # validates non-emptiness
        groups = {g for _, _, g in rows}
        if not privileged_values < groups:
            raise ConfigError(
                "privileged values must be a strict, observed subset of the groups")
    except (ConfigError, DataFormatError) as exc:
        _fail(CONFIG_EXIT, str(exc))
    try:
        counts = {}
        for tag, in_group in (("priv", True), ("unp", False)):
            members = [(y, p) for y, p, g in rows if (g in privileged_values) == in_group]
            counts[f"tp_{tag}"] = sum(1 for y, p in members if y == 1 and p == 1)
            counts[f"fp_{tag}"] = sum(1 for y, p in members if y == 0 and p == 1)
            counts[f"tn_{tag}"] = sum(1 for y, p in members if y == 0 and p == 0)
            counts[f"fn_{tag}"] = sum(1 for y, p in members if y == 1 and p == 0)
        vector = compute_metrics(GroupConfusion(**counts), pe_mode)
    except Exception as exc:
        _fail(PIPELINE_EXIT, str(exc))
    click.echo(json.dumps(vector.to_jsonable(feature), indent=2, sort_keys=True))


def _read_predictions(path: str) -> list[tuple[int, int, str]]:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"no such file: {path}")
    with open(p, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        required = {"y_true", "y_pred", "group"}
        if reader.fieldnames is None or not required <= set(reader.fieldnames):
            raise DataFormatError(
                "predictions file needs columns y_true, y_pred, group")
        rows = []
        for i, line in enumerate(reader, start=2):
            try:
                y, pred = int(line["y_true"]), int(line["y_pred"])
            except ValueError:
                raise DataFormatError(f"non-integer label at line {i}") from None
            if y not in (0, 1) or pred not in (0, 1):
                raise DataFormatError(f"labels must be 0/1, offending line {i}")
            rows.append((y, pred, line["group"]))
    if not rows:
        raise DataFormatError("predictions file has no data rows")
    return rows


if __name__ == "__main__":
    main()
