from pathlib import Path

import numpy as np
import pytest

from fairlens import fixtures
from fairlens.dataset import CATEGORICAL, load_csv, write_csv

DATA = Path(__file__).resolve().parent.parent / "data"


class TestGenerators:
    def test_credit_fixture_shape(self):
        d = fixtures.german_like()
        assert d.n_rows == 1000 and d.n_features == 20
        assert d.sensitive == {"statussex", "telephone", "foreignworker"}
        zeros, ones = d.class_counts()
        assert 0.55 < ones / d.n_rows < 0.8  # imbalanced, oversampling active

    def test_census_fixture_shape(self):
        d = fixtures.adult_like(n=5000)
        assert d.n_rows == 5000 and d.n_features == 14
        assert d.sensitive == {"MaritalStatus", "Race", "Sex"}
        zeros, ones = d.class_counts()
        assert 0.15 < ones / d.n_rows < 0.35

    def test_sensitive_features_are_categorical(self):
        for d in (fixtures.german_like(), fixtures.adult_like(n=500),
                  fixtures.two_sensitive_driver(), fixtures.single_sensitive_driver()):
            for name in d.sensitive:
                assert d.schema[d.feature_index(name)].kind == CATEGORICAL

    def test_generators_deterministic(self):
        a = fixtures.two_sensitive_driver(seed=3)
        b = fixtures.two_sensitive_driver(seed=3)
        assert np.array_equal(a.rows, b.rows)
        assert np.array_equal(a.target, b.target)


class TestBundledCsvs:
    @pytest.mark.parametrize("name,target,features,rows", [
        ("german_synthetic.csv", "creditrisk", 20, 1000),
        ("adult_synthetic.csv", "income", 14, 5000),
        ("two_driver_synthetic.csv", "outcome", 14, 1000),
    ])
    def test_load_shapes(self, name, target, features, rows):
        d = load_csv(DATA / name, target)
        assert d.n_features == features and d.n_rows == rows

    def test_bundled_bytes_match_generators(self, tmp_path):
        pairs = [
            (fixtures.german_like(), "german_synthetic.csv"),
            (fixtures.adult_like(n=5000), "adult_synthetic.csv"),
            (fixtures.two_sensitive_driver(), "two_driver_synthetic.csv"),
        ]
        for dataset, name in pairs:
            regenerated = tmp_path / name
            write_csv(dataset, regenerated)
            assert regenerated.read_bytes() == (DATA / name).read_bytes(), name
