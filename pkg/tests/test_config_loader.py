import pytest
from pydantic import ValidationError

from helpers.config_loader import SEED_ENV, build_run_config, load_config_file, normalize_keys
from models.errors import ConfigError

BASE = {"command": "cluster", "dataset": "data/iris.csv"}


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


@pytest.fixture
def config_file(tmp_path):
    def _write(text):
        path = tmp_path / "run.yaml"
        path.write_text(text, encoding="utf-8")
        return str(path)
    return _write


def test_flags_override_file(config_file):
    path = config_file("c: 2\nm: 3\nalgo: fpm\n")
    cfg = build_run_config({**BASE, "c": 3}, path)
    assert (cfg.c, cfg.m, cfg.algorithm) == (3, 3.0, "fpm")


def test_defaults_without_file():
    cfg = build_run_config({**BASE, "c": 3})
    assert cfg.seed == 42 and cfg.m == 2.0 and cfg.output_format == "json"


def test_seed_precedence(monkeypatch, config_file):
    monkeypatch.setenv(SEED_ENV, "7")
    assert build_run_config({**BASE, "c": 3}).seed == 7
    path = config_file("seed: 9\n")
    assert build_run_config({**BASE, "c": 3}, path).seed == 9
    assert build_run_config({**BASE, "c": 3, "seed": 11}, path).seed == 11


def test_bad_seed_env(monkeypatch):
    monkeypatch.setenv(SEED_ENV, "abc")
    with pytest.raises(ConfigError, match=SEED_ENV):
        build_run_config({**BASE, "c": 3})


def test_dashed_keys_and_aliases(config_file):
    path = config_file("max-iter: 50\nlambda: 1.5\nsplit: subsampling\nformat: csv\n")
    cfg = build_run_config({**BASE, "c": 3}, path)
    assert cfg.max_iter == 50
    assert cfg.lambda_ == 1.5
    assert cfg.split == "random_subsampling"
    assert cfg.output_format == "csv"


def test_space_separated_lists(config_file):
    path = config_file('m-values: "1.2 2.0"\nweight-specs: [uniform:1, uniform:0.5]\n')
    cfg = build_run_config({**BASE, "command": "sweep", "c": 3, "label_column": "class"}, path)
    assert cfg.m_values == (1.2, 2.0)
    assert cfg.weight_specs == ("uniform:1", "uniform:0.5")


def test_algorithm_axis_from_file(config_file):
    path = config_file("algorithms: fpm1 bfpm_wfd\nexact-critical: true\n")
    cfg = build_run_config({**BASE, "command": "sweep", "c": 3, "label_column": "class"}, path)
    assert cfg.algorithms == ("fpm1", "bfpm_wfd")
    assert cfg.exact_critical


@pytest.mark.parametrize("text, message", [
    ("colour: red\n", "unknown setting"),
    ("distance:\n  family: wfd\n", "flat"),
    ("- c\n- 3\n", "flat mapping"),
    ("c: [3\n", "not valid YAML"),
])
def test_rejected_files(config_file, text, message):
    with pytest.raises(ConfigError, match=message):
        load_config_file(config_file(text))


def test_missing_file():
    with pytest.raises(ConfigError, match="not found"):
        load_config_file("/nonexistent/run.yaml")


def test_empty_file(config_file):
    assert load_config_file(config_file("")) == {}


def test_unknown_flag_key():
    with pytest.raises(ConfigError):
        normalize_keys({"colour": 1}, "command line")


def test_validation_errors_surface():
    with pytest.raises(ValidationError, match="requires --c"):
        build_run_config(BASE)
    with pytest.raises(ValidationError, match="requires --label-column"):
        build_run_config({**BASE, "command": "classify"})
