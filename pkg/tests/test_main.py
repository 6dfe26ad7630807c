import json

import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_array_equal

from algorithms.algorithms_clustering import run_clustering
from helpers.config_loader import SEED_ENV
from helpers.distance import build_spec
from main import _normalized_split, main
from models.models import ClusterConfig
from oracles import make_dataset


@pytest.fixture(autouse=True)
def no_seed_env(monkeypatch):
    monkeypatch.delenv(SEED_ENV, raising=False)


@pytest.fixture
def run(capsys):
    def _run(*argv):
        code = main([str(a) for a in argv])
        captured = capsys.readouterr()
        return code, captured.out, captured.err
    return _run


def read_json(path):
    return json.loads(path.read_text(encoding="utf-8"))


# ---- cluster ----
def test_cluster_writes_json(run, iris_path, tmp_path):
    target = tmp_path / "run.json"
    code, stdout, _ = run("cluster", iris_path, "--label-column", "class", "--algo", "bfpm",
                          "--c", 3, "--m", 2, "--seed", 42, "--output", target)
    assert code == 0
    assert stdout.startswith("cluster: algorithm=bfpm")
    doc = read_json(target)
    assert doc["converged"] and doc["accuracy"] >= 0.85
    assert np.asarray(doc["memberships"]).shape == (3, 150)


def test_cluster_rejects_too_many_clusters(run, iris_path):
    code, _, stderr = run("cluster", iris_path, "--label-column", "class", "--c", 200)
    assert code == 2
    assert "c exceeds n" in stderr


def test_missing_required_setting(run, iris_path):
    code, _, stderr = run("cluster", iris_path, "--label-column", "class")
    assert code == 2
    assert "requires --c" in stderr


def test_unknown_flag_exits_with_usage_error(iris_path):
    with pytest.raises(SystemExit) as exit_info:
        main(["cluster", str(iris_path), "--colour", "red"])
    assert exit_info.value.code == 2


def test_missing_dataset_is_runtime_error(run, tmp_path):
    code, _, stderr = run("cluster", tmp_path / "absent.csv", "--c", 2)
    assert code == 1
    assert "error:" in stderr


def test_cli_matches_library_call(run, iris_path, iris, tmp_path):
    target = tmp_path / "wfd.json"
    code, _, _ = run("cluster", iris_path, "--label-column", "class", "--algo", "bfpm_wfd",
                     "--weights", "uniform:0.5", "--c", 3, "--seed", 42, "--output", target)
    assert code == 0
    spec = build_spec("wfd", 4, weights="uniform:0.5")
    expected = run_clustering(iris, ClusterConfig(algorithm="bfpm_wfd", c=3, seed=42, distance=spec))
    doc = read_json(target)
    assert doc["iterations"] == expected.iterations
    assert np.array_equal(np.asarray(doc["memberships"]), expected.pm.u)
    assert np.array_equal(np.asarray(doc["centroids"]), expected.cents.v)


def test_reruns_are_byte_identical(run, iris_path, tmp_path):
    outputs = []
    for name in ("a.csv", "b.csv"):
        target = tmp_path / name
        assert run("cluster", iris_path, "--label-column", "class", "--c", 3,
                   "--format", "csv", "--output", target)[0] == 0
        outputs.append(target.read_bytes())
    assert outputs[0] == outputs[1]


def test_config_file_supplies_settings(run, iris_path, tmp_path):
    config = tmp_path / "run.yaml"
    config.write_text("c: 2\nlabel-column: class\nformat: csv\n", encoding="utf-8")
    target = tmp_path / "run.csv"
    code, _, _ = run("cluster", iris_path, "--config", config, "--output", target)
    assert code == 0
    assert list(pd.read_csv(target).columns) == ["object", "u_0", "u_1", "cluster"]


def test_cluster_reports_majority_labels(run, iris_path, tmp_path):
    target = tmp_path / "run.json"
    run("cluster", iris_path, "--label-column", "class", "--c", 3, "--output", target)
    assert sorted(read_json(target)["majority_labels"]) == [0, 1, 2]


def test_cluster_without_labels_has_no_mapping(run, tmp_path):
    data = tmp_path / "points.csv"
    data.write_text("x,y\n0,0\n0,1\n5,5\n5,6\n", encoding="utf-8")
    target = tmp_path / "run.json"
    assert run("cluster", data, "--c", 2, "--output", target)[0] == 0
    assert read_json(target)["majority_labels"] is None


# ---- sweep ----
def test_sweep_grid(run, iris_path, tmp_path):
    target = tmp_path / "sweep.csv"
    code, stdout, _ = run("sweep", iris_path, "--label-column", "class", "--c", 3,
                          "--m-values", 1.2, 2.0, "--weight-specs", "uniform:1", "uniform:0.5",
                          "--format", "csv", "--output", target)
    assert code == 0 and "0 failed" in stdout
    text = target.read_text()
    assert "# Iris, m=2, Euclidean: 97.33" in text
    frame = pd.read_csv(target, comment="#")
    assert frame.shape == (2, 3)
    cells = frame[["m=1.2", "m=2"]].to_numpy(dtype=float)
    assert ((cells >= 0) & (cells <= 1)).all()


def test_single_cell_sweep_equals_cluster(run, iris_path, tmp_path):
    sweep, cluster = tmp_path / "sweep.json", tmp_path / "cluster.json"
    run("sweep", iris_path, "--label-column", "class", "--c", 3, "--m-values", 2,
        "--weight-specs", "euclidean", "--output", sweep)
    run("cluster", iris_path, "--label-column", "class", "--c", 3, "--output", cluster)
    assert read_json(sweep)["accuracy"] == [[read_json(cluster)["accuracy"]]]


def test_sweep_reports_failed_cells(run, iris_path, tmp_path):
    target = tmp_path / "sweep.json"
    code, stdout, _ = run("sweep", iris_path, "--label-column", "class", "--c", 3,
                          "--weight-specs", "uniform:0", "uniform:1", "--output", target)
    assert code == 0 and "1 failed" in stdout
    doc = read_json(target)
    assert doc["accuracy"][0] == [None]
    assert doc["accuracy"][1][0] >= 0.85


def test_sweep_fuzzifier_grid_against_euclidean(run, iris_path, tmp_path):
    target = tmp_path / "sweep.json"
    code, stdout, _ = run("sweep", iris_path, "--label-column", "class", "--c", 3,
                          "--m-values", 1.2, 1.6, 1.8, 2.0,
                          "--weight-specs", "euclidean", "uniform:1/d", "--output", target)
    assert code == 0 and "0 failed" in stdout
    doc = read_json(target)
    assert all(all(row) for row in doc["converged"])
    euclidean, weighted = doc["accuracy"]
    assert sum(w >= e for w, e in zip(weighted, euclidean)) >= 3
    # uniform weights rescale every distance, which leaves the memberships unchanged
    assert weighted == euclidean


def test_sweep_over_algorithms(run, iris_path, tmp_path):
    target = tmp_path / "algorithms.csv"
    code, stdout, _ = run("sweep", iris_path, "--label-column", "class", "--c", 3,
                          "--algorithms", "fpm1", "fpm2", "bfpm", "bfpm_wfd",
                          "--format", "csv", "--output", target)
    assert code == 0 and "4 cells, 0 failed" in stdout
    frame = pd.read_csv(target, comment="#")
    assert list(frame.columns) == ["algorithm", "m=2"]
    assert frame["algorithm"].tolist() == ["fpm1", "fpm2", "bfpm", "bfpm_wfd"]
    acc = dict(zip(frame["algorithm"], frame["m=2"].astype(float)))
    assert acc["bfpm_wfd"] == acc["bfpm"]
    assert acc["fpm1"] < acc["bfpm"]


# ---- mutation ----
def test_mutation_csv_and_companion(run, iris_path, tmp_path):
    target = tmp_path / "mutation.csv"
    code, _, _ = run("mutation", iris_path, "--label-column", "class", "--c", 3,
                     "--format", "csv", "--output", target)
    assert code == 0
    frame = pd.read_csv(target)
    assert len(frame) == 150
    series = frame[["own_membership", "runner_up_membership"]].to_numpy()
    assert ((series >= 0) & (series <= 1)).all()
    counts = read_json(tmp_path / "mutation.json")["threshold_counts"]
    assert counts["0.85"] <= counts["0.75"] <= counts["0.7"]


def test_mutation_after_hardening(run, iris_path, tmp_path):
    target = tmp_path / "mutation.json"
    code, _, _ = run("mutation", iris_path, "--label-column", "class", "--c", 3, "--harden-first",
                     "--output", target)
    assert code == 0
    doc = read_json(target)
    assert all(e["runner_up_membership"] == 0.0 for e in doc["per_object"])
    assert doc["taxonomy"]["critical"] == 0


def test_mutation_exact_critical(run, iris_path, tmp_path):
    loose, exact = tmp_path / "loose.json", tmp_path / "exact.json"
    run("mutation", iris_path, "--label-column", "class", "--c", 3, "--output", loose)
    code, _, _ = run("mutation", iris_path, "--label-column", "class", "--c", 3,
                     "--exact-critical", "--output", exact)
    assert code == 0
    doc = read_json(exact)
    assert doc["exact_critical"] is True
    assert all(flag["epsilon"] == 0.0 for flag in doc["critical"])
    assert len(doc["critical"]) <= len(read_json(loose)["critical"])


# ---- validate ----
@pytest.fixture
def tiny(tmp_path):
    path = tmp_path / "tiny.csv"
    path.write_text("x,y\n0.0,0.0\n0.5,0.5\n1.0,1.0\n", encoding="utf-8")
    return path


def _partition(tmp_path, memberships, centroids):
    path = tmp_path / "partition.json"
    path.write_text(json.dumps({"memberships": memberships, "centroids": centroids}), encoding="utf-8")
    return path


def test_validate_hard_partition(run, tiny, tmp_path):
    part = _partition(tmp_path, [[1, 1, 0], [0, 0, 1]], [[0.25, 0.25], [1.0, 1.0]])
    target = tmp_path / "indices.json"
    code, _, _ = run("validate", tiny, "--partition", part, "--indices", "v_pc", "v_pe", "db",
                     "--output", target)
    assert code == 0
    values = {c["index"]: c["value"] for c in read_json(target)["indices"]}
    assert values["v_pc"] == 1.0 and values["v_pe"] == 0.0
    assert values["db"] > 0
    assert read_json(target)["regimes"][0] == "crisp"


def test_validate_reports_failed_cell(run, tiny, tmp_path):
    part = _partition(tmp_path, [[1, 0.5, 0.2], [0.3, 0.5, 1]], [[0.5, 0.5], [0.5, 0.5]])
    target = tmp_path / "indices.json"
    code, stdout, _ = run("validate", tiny, "--partition", part, "--output", target)
    assert code == 0
    cells = {c["index"]: c for c in read_json(target)["indices"]}
    assert cells["v_xb"]["value"] is None and "coincide" in cells["v_xb"]["error"]
    assert cells["v_pc"]["value"] is not None and cells["v_pe"]["value"] is not None
    assert "v_xb=ERR" in stdout


def test_validate_iris_run(run, iris_path, tmp_path):
    target = tmp_path / "indices.json"
    code, _, _ = run("validate", iris_path, "--label-column", "class", "--c", 3, "--m", 2.5,
                     "--indices", "v_pc", "g", "ig", "--output", target)
    assert code == 0
    values = {c["index"]: c["value"] for c in read_json(target)["indices"]}
    assert values["v_pc"] > 1.0
    assert values["g"] > 0 and values["ig"] > 0


def test_validate_unknown_index(run, tiny):
    code, _, stderr = run("validate", tiny, "--c", 2, "--indices", "silhouette")
    assert code == 2 and "silhouette" in stderr


# ---- classify ----
def test_classify_kfold(run, iris_path, tmp_path):
    target = tmp_path / "classify.json"
    code, stdout, _ = run("classify", iris_path, "--label-column", "class", "--split", "kfold",
                          "--k", 5, "--output", target)
    assert code == 0 and stdout.startswith("classify: 5 splits")
    doc = read_json(target)
    accuracies = [s["accuracy"] for s in doc["splits"]]
    assert len(accuracies) == 5
    assert all(0.0 <= a <= 1.0 for a in accuracies)
    assert doc["mean_accuracy"] == pytest.approx(np.mean(accuracies))
    assert doc["mean_accuracy"] >= 0.85
    assert sorted(j for s in doc["splits"] for j in s["objects"]) == list(range(150))


def test_classify_csv_rows(run, iris_path, tmp_path):
    target = tmp_path / "classify.csv"
    code, _, _ = run("classify", iris_path, "--label-column", "class", "--split", "holdout",
                     "--format", "csv", "--output", target)
    assert code == 0
    frame = pd.read_csv(target)
    assert len(frame) == 50
    assert {"split", "object", "predicted", "truth"} <= set(frame.columns)


def test_classify_without_test_objects(run, tmp_path):
    data = tmp_path / "one.csv"
    data.write_text("x,class\n0.5,a\n", encoding="utf-8")
    target = tmp_path / "classify.json"
    code, stdout, _ = run("classify", data, "--label-column", "class", "--split", "bootstrap",
                          "--output", target)
    assert code == 0
    assert stdout.strip() == "classify: no test objects"
    assert read_json(target)["splits"][0]["note"] == "no test objects"


def test_classify_positive_class_out_of_range(run, iris_path):
    code, _, _ = run("classify", iris_path, "--label-column", "class", "--positive-class", 5)
    assert code == 2


def test_split_normalization_uses_training_range():
    ds = make_dataset([[0.0, 3.0], [10.0, 3.0], [20.0, 7.0], [-5.0, 3.0]], labels=[0, 1, 1, 0],
                      normalized=False)
    train, test = _normalized_split(ds, [0, 1], [2, 3, 1])
    assert_array_equal(train.objects, [[0.0, 0.0], [1.0, 0.0]])
    assert_array_equal(test.objects[:, 0], [1.0, 0.0, 1.0])
    assert_array_equal(test.objects[:, 1], [0.0, 0.0, 0.0])
    assert test.normalized and test.labels.tolist() == [1, 0, 1]


# ---- split and dominant ----
def test_split_command(run, iris_path, tmp_path):
    target = tmp_path / "splits.json"
    code, _, _ = run("split", iris_path, "--label-column", "class", "--split", "subsampling",
                     "--t", 3, "--output", target)
    assert code == 0
    doc = read_json(target)
    assert doc["kind"] == "random_subsampling" and len(doc["splits"]) == 3
    assert all(len(s["train"]) == 100 and len(s["test"]) == 50 for s in doc["splits"])


def test_dominant_command(run, tmp_path):
    data = tmp_path / "points.csv"
    data.write_text("a,b,c,d,e\n2,2,2,2,11\n2,2,2,2,2\n", encoding="utf-8")
    target = tmp_path / "dominant.json"
    code, stdout, _ = run("dominant", data, "--lambda", 2, "--output", target)
    assert code == 0 and stdout.startswith("dominant: 1 of 2")
    doc = read_json(target)
    assert doc["feature_counts"] == [0, 0, 0, 0, 1]
    assert doc["reports"][0]["lambda"] == 2.0
