from __future__ import annotations

import pytest

from algorithms.algorithms_clustering import run_clustering
from models.models import ClusterConfig
from normalizers.normalize_minmax import normalize_min_max
from providers.providers_csv import IRIS_CSV, load_iris


@pytest.fixture(scope="session")
def iris_path():
    return IRIS_CSV


@pytest.fixture(scope="session")
def iris_raw():
    return load_iris()


@pytest.fixture(scope="session")
def iris(iris_raw):
    return normalize_min_max(iris_raw)


@pytest.fixture(scope="session")
def iris_bfpm(iris):
    return run_clustering(iris, ClusterConfig(algorithm="bfpm", c=3, m=2.0, seed=42))


@pytest.fixture
def write_csv(tmp_path):
    def _write(text: str, name: str = "data.csv"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
