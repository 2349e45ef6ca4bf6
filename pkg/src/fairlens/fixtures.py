"""Deterministic synthetic datasets for demos and the test suite.

Two desk-scale credit/census-style generators mirror the schemas of the
classic public benchmarks (20-feature credit scoring, 14-feature census
income) without shipping the real data: labels are drawn from a logistic
model over a handful of features, including the declared sensitive ones, so
an audit has genuine reliance to detect. Two smaller generators produce
controlled ground truth: one where two sensitive columns drive the label next
to three clean signal factors (each factor observed through several
correlated columns), and one with a single sensitive driver.
"""

from __future__ import annotations

import numpy as np

from .dataset import CATEGORICAL, CONTINUOUS, Dataset, FeatureSchema


def _draw_cat(rng: np.random.Generator, probs: list[float], n: int) -> np.ndarray:
    cum = np.cumsum(np.asarray(probs) / np.sum(probs))
    return np.searchsorted(cum, rng.random(n), side="right").astype(np.float64)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-z))


def german_like(n: int = 1000, seed: int = 7) -> Dataset:
    """Credit-scoring table: 20 features, three sensitive (statussex,
    telephone, foreignworker), roughly 70/30 good/bad outcomes."""
    rng = np.random.default_rng(seed)
    cols: dict[str, tuple[str, np.ndarray, tuple[str, ...]]] = {}

    def cat(name, categories, probs):
        cols[name] = (CATEGORICAL, _draw_cat(rng, probs, n), tuple(categories))

    def cont(name, values):
        cols[name] = (CONTINUOUS, np.asarray(values, dtype=np.float64), ())

    cat("existingchecking", ["A11", "A12", "A13", "A14"], [.27, .27, .06, .40])
    cont("duration", np.round(np.clip(rng.lognormal(3.0, 0.45, n), 4, 72)))
    cat("credithistory", ["A30", "A31", "A32", "A33", "A34"], [.04, .05, .53, .09, .29])
    cat("purpose", ["A40", "A41", "A42", "A43", "A46", "A49"], [.24, .11, .18, .30, .06, .11])
    cont("creditamount", np.round(np.clip(rng.lognormal(7.9, 0.75, n), 250, 18500)))
    cat("savings", ["A61", "A62", "A63", "A64", "A65"], [.60, .10, .06, .05, .19])
    cat("employmentsince", ["A71", "A72", "A73", "A74", "A75"], [.06, .17, .34, .17, .26])
    cont("installmentrate", np.round(rng.uniform(1, 4, n)))
    cat("statussex", ["A91", "A92", "A93", "A94"], [.04, .25, .62, .09])
    cat("otherdebtors", ["A101", "A102", "A103"], [.91, .04, .05])
    cont("residencesince", np.round(rng.uniform(1, 4, n)))
    cat("property", ["A121", "A122", "A123", "A124"], [.28, .23, .33, .16])
    cont("age", np.round(np.clip(rng.normal(36, 11, n), 19, 75)))
    cat("otherinstallmentplans", ["A141", "A142", "A143"], [.14, .05, .81])
    cat("housing", ["A151", "A152", "A153"], [.18, .71, .11])
    cont("existingcredits", np.round(rng.uniform(1, 4, n)))
    cat("job", ["A171", "A172", "A173", "A174"], [.02, .20, .63, .15])
    cont("peopleliable", np.round(rng.uniform(1, 2, n)))
    cat("telephone", ["A191", "A192"], [.72, .28])
    cat("foreignworker", ["A201", "A202"], [.96, .04])

    c = {name: values for name, (_, values, _) in cols.items()}
    logit = (
        0.1
        + np.select([c["existingchecking"] == 3, c["existingchecking"] == 2,
                     c["existingchecking"] == 0], [1.1, 0.5, -0.7], 0.0)
        - 0.035 * (c["duration"] - 21)
        + np.select([c["credithistory"] == 4, c["credithistory"] <= 1], [0.6, -0.6], 0.1)
        - 0.00012 * (c["creditamount"] - 3300)
        + np.select([c["savings"] >= 3, c["savings"] == 2], [0.7, 0.3], 0.0)
        + np.select([c["employmentsince"] == 4, c["employmentsince"] == 0],
                    [0.3, -0.4], 0.0)
        - 0.1 * (c["installmentrate"] - 2.5)
        + np.select([c["statussex"] == 2, c["statussex"] == 0], [0.95, -0.5], -0.15)
        + 0.015 * (c["age"] - 35)
        + np.where(c["otherinstallmentplans"] == 2, 0.35, 0.0)
        + np.where(c["housing"] == 1, 0.3, 0.0)
        + np.where(c["telephone"] == 1, 0.85, 0.0)
        + np.where(c["foreignworker"] == 0, -1.15, 0.0)
    )
    target = (rng.random(n) < _sigmoid(logit)).astype(np.int64)
    return _assemble(cols, target, sensitive={"statussex", "telephone", "foreignworker"},
                     target_name="creditrisk", target_levels=("bad", "good"))


def adult_like(n: int = 5000, seed: int = 11) -> Dataset:
    """Census-income table: 14 features, three sensitive (MaritalStatus, Race,
    Sex), roughly one quarter positive labels."""
    rng = np.random.default_rng(seed)
    cols: dict[str, tuple[str, np.ndarray, tuple[str, ...]]] = {}

    def cat(name, categories, probs=None, values=None):
        data = values if values is not None else _draw_cat(rng, probs, n)
        cols[name] = (CATEGORICAL, data, tuple(categories))

    def cont(name, values):
        cols[name] = (CONTINUOUS, np.asarray(values, dtype=np.float64), ())

    age = np.round(np.clip(rng.normal(38.5, 13, n), 17, 90))
    cont("Age", age)
    cat("Workclass", ["Private", "Self-emp", "Gov", "Other"], [.70, .11, .14, .05])
    cont("fnlwgt", np.round(rng.lognormal(11.7, 0.6, n)))
    ednum = np.round(np.clip(rng.normal(10.1, 2.5, n), 1, 16))
    cat("Education", ["HS-grad", "Some-college", "Bachelors", "Masters", "Other"],
        values=np.select([ednum <= 9, ednum <= 11, ednum <= 13, ednum <= 14],
                         [0.0, 1.0, 2.0, 3.0], 4.0))
    cont("Education-Num", ednum)
    married = (rng.random(n) < 0.62).astype(np.float64)
    cat("MaritalStatus", ["Married", "Never-married", "Divorced"],
        values=np.where(married == 1, 0.0,
                        np.where(rng.random(n) < 0.65, 1.0, 2.0)))
    cat("Occupation", ["Craft", "Prof", "Exec", "Service", "Sales", "Other"],
        [.21, .19, .16, .17, .15, .12])
    male = (rng.random(n) < 0.68).astype(np.float64)
    husband_mask = (married == 1) & (male == 1) & (rng.random(n) < 0.9)
    wife_mask = (married == 1) & (male == 0) & (rng.random(n) < 0.85)
    relationship = np.select([husband_mask, wife_mask, married == 1],
                             [0.0, 1.0, 2.0], 3.0)
    cat("Relationship", ["Husband", "Wife", "Other-relative", "Not-in-family"],
        values=relationship)
    cat("Race", ["White", "Black", "Asian", "Other"], [.85, .09, .04, .02])
    cat("Sex", ["Male", "Female"], values=np.where(male == 1, 0.0, 1.0))
    gain = np.where(rng.random(n) < 0.11, np.round(rng.lognormal(8.4, 1.0, n)), 0.0)
    cont("CapitalGain", gain)
    cont("CapitalLoss", np.where(rng.random(n) < 0.05,
                                 np.round(rng.lognormal(7.4, 0.4, n)), 0.0))
    hours = np.round(np.clip(rng.normal(40.5, 11, n), 1, 99))
    cont("Hoursperweek", hours)
    cat("Country", ["United-States", "Mexico", "Other"], [.90, .03, .07])

    c = {name: values for name, (_, values, _) in cols.items()}
    logit = (
        -3.45
        + 0.33 * (ednum - 10)
        + 1.5 * (gain > 0)
        + 0.035 * (hours - 40)
        + 0.025 * (age - 38)
        + 0.95 * married
        + 0.8 * male
        + 0.3 * (c["Race"] == 0)
        + 0.25 * (c["Occupation"] == 2)
    )
    target = (rng.random(n) < _sigmoid(logit)).astype(np.int64)
    return _assemble(cols, target, sensitive={"MaritalStatus", "Race", "Sex"},
                     target_name="income", target_levels=("<=50K", ">50K"))


def two_sensitive_driver(n: int = 1000, seed: int = 3) -> Dataset:
    """Controlled audit target: the label depends on two sensitive columns and
    three clean signal factors; each factor is observed through several
    correlated columns (ten in total), plus two pure-noise columns.

    A model trained here must rely on both sensitive columns, while the
    dropout members can fall back on the factor observations, so the ensemble
    ranking demotes the sensitive columns.
    """
    rng = np.random.default_rng(seed)
    skew = 0.78

    def latent():
        return (rng.random(n) < skew).astype(np.float64)

    def observe(z, flip=0.12):
        noise = rng.random(n) < flip
        return np.where(noise, 1.0 - z, z)

    s1, s2 = latent(), latent()
    z1, z2, z3 = latent(), latent(), latent()
    columns = {
        "s1": s1,
        "s2": s2,
        "f1_a": observe(z1), "f1_b": observe(z1), "f1_c": observe(z1),
        "f1_d": observe(z1),
        "f2_a": observe(z2), "f2_b": observe(z2), "f2_c": observe(z2),
        "f3_a": observe(z3), "f3_b": observe(z3), "f3_c": observe(z3),
        "noise_a": latent(),
        "noise_b": latent(),
    }
    logit = (1.25 * s1 + 1.05 * s2 + 3.0 * z1 + 2.5 * z2 + 2.1 * z3
             - (1.25 + 1.05 + 3.0 + 2.5 + 2.1) * skew)
    target = (rng.random(n) < _sigmoid(logit)).astype(np.int64)
    cols = {name: (CATEGORICAL, values, ("no", "yes")) for name, values in columns.items()}
    return _assemble(cols, target, sensitive={"s1", "s2"},
                     target_name="outcome", target_levels=("neg", "pos"))


def single_sensitive_driver(n: int = 500, seed: int = 5) -> Dataset:
    """Only one of the two declared sensitive columns carries signal, so a
    top-k scan finds at most one and the audit gate passes."""
    rng = np.random.default_rng(seed)
    skew = 0.7
    s1 = (rng.random(n) < skew).astype(np.float64)
    s2 = (rng.random(n) < skew).astype(np.float64)  # declared sensitive, pure noise
    clean = {f"c{i}": (rng.random(n) < skew).astype(np.float64) for i in range(1, 5)}
    noise = {f"noise_{i}": (rng.random(n) < skew).astype(np.float64) for i in range(1, 3)}
    logit = (2.4 * s1 + 2.0 * clean["c1"] + 1.7 * clean["c2"] + 1.4 * clean["c3"]
             + 1.1 * clean["c4"] - (2.4 + 2.0 + 1.7 + 1.4 + 1.1) * skew)
    target = (rng.random(n) < _sigmoid(logit)).astype(np.int64)
    columns = {"s1": s1, "s2": s2, **clean, **noise}
    cols = {name: (CATEGORICAL, values, ("no", "yes")) for name, values in columns.items()}
    return _assemble(cols, target, sensitive={"s1", "s2"},
                     target_name="outcome", target_levels=("neg", "pos"))


def _assemble(cols: dict, target: np.ndarray, sensitive: set[str],
              target_name: str, target_levels: tuple[str, str]) -> Dataset:
    schema = tuple(FeatureSchema(name, kind, categories)
                   for name, (kind, _, categories) in cols.items())
    rows = np.column_stack([values for (_, values, _) in cols.values()])
    return Dataset(schema=schema, rows=rows, target=target,
                   sensitive=frozenset(sensitive), target_name=target_name,
                   target_levels=target_levels)
