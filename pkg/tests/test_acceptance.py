"""Acceptance suite: one test per shipping criterion, each printing a
PASS/FAIL line. Run with `pytest tests/test_acceptance.py -v -s`.

The two audit-scale criteria (1 and 2) run the real pipeline on the bundled
desk-scale fixtures with documented hyperparameter overrides and reduced
explanation sampling so the whole suite stays within a laptop-minutes budget.
"""

import itertools
import math
import time
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from fairlens import fixtures
from fairlens.cli import main as cli_main
from fairlens.config import RunConfig
from fairlens.dataset import _synthesize_minority, load_csv, smote
from fairlens.global_explain import GlobalExplanation
from fairlens.lime import fit_surrogate, kernel_weight
from fairlens.metrics import compute_metrics, demographic_parity, disparate_impact
from fairlens.models import ModelSpec, train
from fairlens.models._logistic import loss_and_grad
from fairlens.pipeline import (EnsembleModel, FairnessGateResult, build_pool, gate,
                               run_single_audit)

from conftest import cat, cont, make_dataset
from test_global_explain import brute_force_best, greedy_coverage, make_explanation
from test_metrics import oracle as metrics_oracle
from test_metrics import random_rows

DATA = Path(__file__).resolve().parent.parent / "data"


def report(criterion, message):
    print(f"[acceptance] criterion {criterion}: PASS - {message}")


def audit_rows(dataset, sensitive, family, hyper, seeds, **cfg_overrides):
    base = dict(sensitive=sensitive, family=family, hyperparameters=hyper,
                k=10, lime_n_samples=300, pool_budget=15, candidate_cap=35)
    base.update(cfg_overrides)
    cfg = RunConfig(**base)
    spec = ModelSpec(family, hyper)
    return [run_single_audit(spec, dataset, cfg, seed) for seed in seeds]


def test_criterion_01_accuracy_preserved_under_dropout():
    """Ensemble accuracy within 0.03 of the original whenever the gate fires,
    across both bundled datasets and all four model families, 10 seeds."""
    german = load_csv(DATA / "german_synthetic.csv", "creditrisk")
    adult = load_csv(DATA / "adult_synthetic.csv", "income")
    jobs = [
        ("german", german,
         {"statussex": ("A91", "A93", "A94"), "telephone": ("A192",),
          "foreignworker": ("A201",)},
         {"lr": {}, "ada": {}, "bagging": {}, "rf": {"n_estimators": 25}},
         {}),
        ("adult", adult,
         {"MaritalStatus": ("Married",), "Race": ("White",), "Sex": ("Male",)},
         {"lr": {}, "ada": {},
          "bagging": {"max_depth": 12},
          "rf": {"n_estimators": 20, "max_depth": 12}},
         {"candidate_cap": 30}),
    ]
    started = time.time()
    gaps = []
    for name, dataset, sensitive, families, extra in jobs:
        fired_total = 0
        for family, hyper in families.items():
            records = audit_rows(dataset, sensitive, family, hyper,
                                 seeds=range(10), **extra)
            fired = [r for r in records if r.gate.deemed_unfair]
            fired_total += len(fired)
            if not fired:
                continue
            gap = abs(np.mean([r.ensemble_accuracy for r in fired])
                      - np.mean([r.original_accuracy for r in fired]))
            gaps.append((name, family, len(fired), gap))
            assert gap <= 0.03, (name, family, gap)
        assert fired_total > 0, f"gate never fired on {name}"
    minutes = (time.time() - started) / 60
    detail = "; ".join(f"{d}/{f} fired {n}/10 gap {g:.4f}" for d, f, n, g in gaps)
    report(1, f"{detail} ({minutes:.1f} min)")


def test_criterion_02_ensemble_reduces_sensitive_reliance():
    """On the two-sensitive-driver generator the ensemble's top-10 holds
    strictly fewer sensitive features (median over 10 seeds) and no sensitive
    feature's mean |contribution| grows."""
    d = fixtures.two_sensitive_driver()
    started = time.time()
    records = audit_rows(d, {"s1": ("yes",), "s2": ("yes",)}, "lr", {},
                         seeds=range(10), lime_n_samples=500, pool_budget=25,
                         candidate_cap=60)
    fired = [r for r in records if r.gate.deemed_unfair]
    assert len(fired) >= 8, f"gate fired only {len(fired)}/10 times"

    def count(g):
        return sum(1 for n, _ in g.entries[:10] if n in ("s1", "s2"))

    orig_counts = [count(r.original_global) for r in fired]
    ens_counts = [count(r.ensemble_global) for r in fired]
    assert np.median(ens_counts) < np.median(orig_counts), (orig_counts, ens_counts)
    for s in ("s1", "s2"):
        orig_mean = np.mean([abs(r.original_global.contribution(s)) for r in fired])
        ens_mean = np.mean([abs(r.ensemble_global.contribution(s)) for r in fired])
        assert ens_mean <= orig_mean, (s, orig_mean, ens_mean)
    minutes = (time.time() - started) / 60
    report(2, f"median sensitive-in-top10 {np.median(orig_counts)} -> "
              f"{np.median(ens_counts)} over {len(fired)} fired seeds "
              f"({minutes:.1f} min)")


def test_criterion_03_metric_oracle_suite():
    """All five metrics in both predictive-equality modes match a brute-force
    row tally exactly on 50 randomized fixtures, plus the swap and DI/DP
    identities."""
    rng = np.random.default_rng(0)
    checked = 0
    for _ in range(50):
        rows = random_rows(rng, int(rng.integers(4, 21)))
        for mode in ("paper", "conventional"):
            confusion, expected = metrics_oracle(rows, mode)
            got = compute_metrics(confusion, mode)
            for name in ("di", "eo", "dp", "ea", "pe"):
                assert getattr(got, name) == expected[name], (name, rows)
        swapped = confusion.swapped()
        for fn in ("eo", "dp", "ea", "pe"):
            a = getattr(compute_metrics(confusion), fn)
            b = getattr(compute_metrics(swapped), fn)
            if a is not None and b is not None:
                assert b == -a
        di, di_sw = disparate_impact(confusion), disparate_impact(swapped)
        if di not in (None, 0.0) and di_sw is not None:
            assert di_sw == pytest.approx(1.0 / di, rel=1e-12)
        dp = demographic_parity(confusion)
        if di is not None and dp is not None:
            assert (di == 1.0) == (dp == 0.0)
        checked += 1
    report(3, f"{checked} fixtures, both modes exact, identities hold")


def test_criterion_04_linear_recovery_and_kernel():
    """Unregularized surrogates recover random linear black boxes over six
    binary slots within 1e-6; kernel spot values exact to 1e-12."""
    rng = np.random.default_rng(1)
    names = tuple(f"b{j}" for j in range(6))
    worst = 0.0
    for _ in range(20):
        Z = (rng.random((80, 6)) < 0.5).astype(float)
        beta0 = rng.normal()
        beta = rng.normal(size=6)
        y = beta0 + Z @ beta
        e = fit_surrogate(Z, y, np.ones(80), 0.0, names)
        err = max(abs(e.intercept - beta0),
                  max(abs(e.contribution(n) - b) for n, b in zip(names, beta)))
        worst = max(worst, err)
        assert err < 1e-6
    x = np.ones(5)
    assert kernel_weight(x, x, 1.3) == 1.0
    z = x.copy()
    z[0] = 0.0  # D = 1 = sigma
    assert abs(kernel_weight(x, z, 1.0) - math.exp(-1)) <= 1e-12
    report(4, f"20 linear boxes recovered (worst error {worst:.2e}), kernel exact")


def test_criterion_05_submodular_pick_matches_exhaustive():
    """Greedy pick equals the exhaustive-best coverage on 100 random
    instances (<= 8 candidates, budget <= 3) and never breaks the 1 - 1/e
    bound."""
    rng = np.random.default_rng(0)
    floor = 1 - 1 / math.e
    for trial in range(100):
        n_cand = int(rng.integers(3, 9))
        budget = int(rng.integers(1, min(3, n_cand) + 1))
        n_feat = int(rng.integers(3, 8))
        names = tuple(f"f{j}" for j in range(n_feat))
        exps = []
        for _ in range(n_cand):
            mask = rng.random(n_feat) < 0.7
            vals = {nm: rng.normal() if m else 0.0 for nm, m in zip(names, mask)}
            exps.append(make_explanation(vals, names))
        greedy = greedy_coverage(exps, budget)
        optimal = brute_force_best(exps, budget)
        assert greedy >= floor * optimal - 1e-12, trial
        assert greedy == pytest.approx(optimal, abs=1e-12), trial
    report(5, "greedy == exhaustive optimum on all 100 instances")


def test_criterion_06_ensemble_identities():
    """An n-copy ensemble reproduces the single model exactly on 1000 fuzzed
    inputs, and fuzzing dropped columns never changes a member's output."""
    rng = np.random.default_rng(2)
    n = 200
    g1 = (rng.random(n) < 0.6).astype(float)
    g2 = (rng.random(n) < 0.5).astype(float)
    x = rng.normal(0, 1, n)
    y = ((1.1 * g1 + 0.9 * g2 + x) > 1.0).astype(int)
    d = make_dataset({"g1": cat(g1, ("n", "y")), "g2": cat(g2, ("n", "y")),
                      "x": cont(x)}, y.tolist())
    model = train(ModelSpec("rf", {"n_estimators": 7}), d)
    copies = EnsembleModel((model, model, model), (frozenset({"g1"}),) * 3)
    fuzz = np.column_stack([
        rng.integers(0, 2, 1000).astype(float),
        rng.integers(0, 2, 1000).astype(float),
        rng.uniform(-3, 3, 1000),
    ])
    assert np.array_equal(copies.predict_proba_batch(fuzz),
                          model.predict_proba_batch(fuzz))

    pool = build_pool(ModelSpec("rf", {"n_estimators": 7}), d,
                      FairnessGateResult(True, ("g1", "g2"), k=3))
    changes = 0
    for member, drops in zip(pool.members, pool.provenance):
        base = member.predict_proba_batch(fuzz)
        mutated = fuzz.copy()
        for name in drops:
            j = d.feature_index(name)
            mutated[:, j] = rng.integers(0, 2, 1000).astype(float)
        changes += int((member.predict_proba_batch(mutated) != base).sum())
    assert changes == 0
    report(6, "n-copy identity exact on 1000 inputs; 0 prediction changes "
              "under dropped-column fuzzing")


def test_criterion_07_gate_rule_and_pool_sizes():
    """0/1/2/3 sensitive features in the top-k gate to fair/fair/unfair/unfair
    with pool sizes -, -, 3, 4."""
    rng = np.random.default_rng(3)
    n = 150
    cols = {f"s{i}": cat((rng.random(n) < 0.6).astype(float), ("n", "y"))
            for i in range(1, 4)}
    cols["x"] = cont(rng.normal(0, 1, n))
    y = ((cols["s1"][1] + cols["s2"][1] + cols["x"][1]) > 1.0).astype(int)
    train_data = make_dataset(cols, y.tolist())

    def ranked(names):
        entries = tuple((nm, float(len(names) - i)) for i, nm in enumerate(names))
        return GlobalExplanation(entries=entries, picked_instances=(0,),
                                 budget=1, k=len(names))

    sensitive = {"s1", "s2", "s3"}
    cases = [
        (ranked(["a", "b", "c", "d"]), False, None),
        (ranked(["s1", "b", "c", "d"]), False, None),
        (ranked(["s1", "b", "s2", "d"]), True, 3),
        (ranked(["s1", "s2", "s3", "d"]), True, 4),
    ]
    sizes = []
    for g, unfair, pool_size in cases:
        res = gate(g, sensitive, k=4)
        assert res.deemed_unfair == unfair
        if unfair:
            pool = build_pool(ModelSpec("lr"), train_data, res)
            assert len(pool.members) == pool_size
            sizes.append(len(pool.members))
        else:
            with pytest.raises(ValueError):
                build_pool(ModelSpec("lr"), train_data, res)
            sizes.append(None)
    report(7, f"gate fair/fair/unfair/unfair with pool sizes {sizes}")


def test_criterion_08_byte_identical_artifacts(tmp_path):
    """Two audits with identical configuration write byte-identical trees."""
    csv_path = DATA / "two_driver_synthetic.csv"
    runner = CliRunner()
    outs = [tmp_path / "first", tmp_path / "second"]
    for out in outs:
        result = runner.invoke(cli_main, [
            "audit", "--data", str(csv_path), "--target", "outcome",
            "--sensitive", "s1=yes", "--sensitive", "s2=yes",
            "--model", "lr", "--reps", "2", "--seed", "17",
            "--n-samples", "200", "--budget", "8", "--candidate-cap", "15",
            "--out", str(out)])
        assert result.exit_code == 0, result.output
    first = sorted(p.relative_to(outs[0]) for p in outs[0].rglob("*") if p.is_file())
    second = sorted(p.relative_to(outs[1]) for p in outs[1].rglob("*") if p.is_file())
    assert first == second and first
    for rel in first:
        assert (outs[0] / rel).read_bytes() == (outs[1] / rel).read_bytes(), rel
    report(8, f"{len(first)} artifact files identical, figures included")


def test_criterion_09_logistic_gradient_check():
    """Analytic penalized log-loss gradient vs central differences, relative
    error at most 1e-4 at 20 random parameter points."""
    rng = np.random.default_rng(4)
    X = rng.normal(size=(50, 8))
    y = (rng.random(50) < 0.5).astype(float)
    h = 1e-5
    worst = 0.0
    for _ in range(20):
        params = rng.normal(size=9)
        _, grad = loss_and_grad(params, X, y, 1.0)
        numeric = np.empty_like(params)
        for j in range(params.size):
            up, down = params.copy(), params.copy()
            up[j] += h
            down[j] -= h
            numeric[j] = (loss_and_grad(up, X, y, 1.0)[0]
                          - loss_and_grad(down, X, y, 1.0)[0]) / (2 * h)
        rel = np.linalg.norm(grad - numeric) / max(np.linalg.norm(numeric), 1e-12)
        worst = max(worst, rel)
        assert rel <= 1e-4
    report(9, f"worst relative error {worst:.2e} over 20 points")


def test_criterion_10_smote_balance_and_geometry():
    """Oversampling equalizes the class counts and every synthetic continuous
    cell lies between its parent pair, over 100 randomized runs."""
    rng = np.random.default_rng(5)
    for trial in range(100):
        n_features = int(rng.integers(1, 4))
        n_major = int(rng.integers(12, 30))
        n_minor = int(rng.integers(5, n_major))
        k = int(rng.integers(1, min(4, n_minor)))
        X = rng.normal(0, 1, (n_major + n_minor, n_features))
        y = [0] * n_major + [1] * n_minor
        d = make_dataset({f"x{j}": cont(X[:, j]) for j in range(n_features)}, y)
        seed = int(rng.integers(0, 10_000))

        balanced = smote(d, k_neighbors=k, seed=seed)
        assert balanced.class_counts() == (n_major, n_major), trial
        assert np.array_equal(balanced.rows[: d.n_rows], d.rows)

        minority_idx = np.flatnonzero(d.target == 1)
        synth, parents = _synthesize_minority(d, minority_idx, n_major - n_minor,
                                              k, seed)
        assert np.array_equal(balanced.rows[d.n_rows:], synth)
        for row, (a, b) in zip(synth, parents):
            pa, pb = d.rows[minority_idx[a]], d.rows[minority_idx[b]]
            lo, hi = np.minimum(pa, pb), np.maximum(pa, pb)
            assert (row >= lo - 1e-12).all() and (row <= hi + 1e-12).all(), trial
    report(10, "100 runs: counts equalized, synthetic cells between parents")
