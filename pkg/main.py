from __future__ import annotations

import argparse
import asyncio
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from pydantic import ValidationError

# ---- Schema ----
from models.errors import BfpmError, ConfigError, UndefinedMeasureError
from models.models import ClusterConfig, ClusterResult, Dataset, RunConfig, SplitPlan

# ---- Providers / normalizers ----
from providers.providers_csv import load_csv
from normalizers.normalize_minmax import fit_min_max, normalize_min_max

# ---- Core ----
from algorithms.algorithms_clustering import run_clustering
from algorithms.algorithms_bfpcm import bfpcm_classify, build_model
from helpers.classifier_metrics import confusion, error_measures, metrics
from helpers.config_loader import build_run_config
from helpers.distance import build_spec, parse_weight_spec, scan_dominant
from helpers.membership import harden, regime_subset_check, update_centroids
from helpers.mutation import detect_critical, mutation_report, object_taxonomy
from helpers.splitter import plan_indices
from helpers import report_writer as out
from helpers import validity

log = logging.getLogger("bfpm")

INDEX_NAMES = ("v_pc", "v_pe", "v_xb", "db", "cs", "g", "ig")
EUCLIDEAN_SPECS = ("euclidean", "lp")

SweepCell = Tuple[str, float, ClusterConfig]


# -----------------------------------------------------------------------------
# Logging
# -----------------------------------------------------------------------------
def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    logging.basicConfig(
        level=level,
        format="%(levelname)s:%(name)s:%(message)s",
        stream=sys.stderr,
        force=True,
    )


# -----------------------------------------------------------------------------
# Shared pipeline steps
# -----------------------------------------------------------------------------
def load_dataset(cfg: RunConfig, normalize: bool = True) -> Dataset:
    ds = load_csv(cfg.dataset_path, cfg.label_column)
    return normalize_min_max(ds) if normalize else ds


def cluster_config(cfg: RunConfig, ds: Dataset, m: Optional[float] = None,
                   weights: Optional[str] = None, algorithm: Optional[str] = None,
                   family: Optional[str] = None) -> ClusterConfig:
    """ClusterConfig for this run; keyword arguments override per sweep cell."""
    algorithm = algorithm or cfg.algorithm
    family = family or cfg.distance
    if algorithm == "bfpm_wfd" and family == "lp":
        family = "wfd"
    spec = build_spec(family, ds.d, p=cfg.p, r=cfg.r,
                      weights=weights if weights is not None else cfg.weights,
                      priority_weights=cfg.priority_weights)
    return ClusterConfig(
        algorithm=algorithm,
        c=cfg.c,
        m=cfg.m if m is None else m,
        epsilon=cfg.epsilon,
        max_iter=cfg.max_iter,
        seed=cfg.seed,
        distance=spec,
        raw_exponent=cfg.raw_exponent,
    )


def accuracy_of(result: ClusterResult, ds: Dataset, hungarian: bool = False) -> Optional[float]:
    if ds.labels is None:
        return None
    return validity.clustering_accuracy(result.pm, ds.labels, hungarian=hungarian)


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


def _companion(path: Optional[str], output_format: str) -> Optional[Path]:
    """Sibling file for the second artifact of a command."""
    if path is None:
        return None
    p = Path(path)
    other = p.with_suffix(".csv" if output_format == "json" else ".json")
    return other if other != p else p.with_name(p.name + (".csv" if output_format == "json" else ".json"))


# -----------------------------------------------------------------------------
# Commands
# -----------------------------------------------------------------------------
def cmd_cluster(cfg: RunConfig) -> str:
    ds = load_dataset(cfg)
    result = run_clustering(ds, cluster_config(cfg, ds))
    acc = accuracy_of(result, ds, cfg.hungarian)
    mapping = None
    if acc is not None:
        log.info("accuracy %.4f", acc)
        mapping = validity.majority_mapping(result.pm, ds.labels)
    out.write_document(out.cluster_document(result, acc, mapping), out.membership_frame(result.pm),
                       cfg.output_format, cfg.output_path)
    return (f"cluster: algorithm={cfg.algorithm} iterations={result.iterations} "
            f"converged={result.converged} objective={result.objective:.6g} accuracy={_fmt(acc)}")


def _sweep_cell(ds: Dataset, ccfg: ClusterConfig, hungarian: bool) -> Tuple[float, bool]:
    result = run_clustering(ds, ccfg)
    return validity.clustering_accuracy(result.pm, ds.labels, hungarian=hungarian), result.converged


async def _run_sweep(ds: Dataset, cells: List[SweepCell], hungarian: bool):
    tasks = [asyncio.to_thread(_sweep_cell, ds, ccfg, hungarian) for _, _, ccfg in cells]
    return await asyncio.gather(*tasks, return_exceptions=True)


def _sweep_cells(cfg: RunConfig, ds: Dataset) -> Tuple[str, List[str], List[SweepCell]]:
    """Row axis, row labels and one ClusterConfig per (row, m) cell."""
    cells: List[SweepCell] = []
    if cfg.algorithms:
        rows = list(cfg.algorithms)
        for algorithm in rows:
            for m in cfg.m_values:
                if algorithm == "bfpm_wfd":
                    family = "wfd" if cfg.distance == "lp" else cfg.distance
                    ccfg = cluster_config(cfg, ds, m=m, weights=cfg.weights or "uniform:1/2",
                                          algorithm=algorithm, family=family)
                else:
                    ccfg = cluster_config(cfg, ds, m=m, weights="", algorithm=algorithm, family="lp")
                cells.append((algorithm, m, ccfg))
        return "algorithm", rows, cells

    rows = list(cfg.weight_specs)
    for spec in rows:
        for m in cfg.m_values:
            if spec.lower() in EUCLIDEAN_SPECS:
                ccfg = cluster_config(cfg, ds, m=m, weights="", algorithm="bfpm", family="lp")
            else:
                algorithm = "bfpm_wfd" if cfg.algorithm in ("bfpm", "bfpm_wfd") else cfg.algorithm
                family = "wfd" if cfg.distance == "lp" else cfg.distance
                ccfg = cluster_config(cfg, ds, m=m, weights=spec, algorithm=algorithm, family=family)
            cells.append((spec, m, ccfg))
    return "weights", rows, cells


def cmd_sweep(cfg: RunConfig) -> str:
    ds = load_dataset(cfg)
    axis, rows, cells = _sweep_cells(cfg, ds)

    results = asyncio.run(_run_sweep(ds, cells, cfg.hungarian))

    table: Dict[Tuple[str, float], Optional[float]] = {}
    converged: Dict[Tuple[str, float], Optional[bool]] = {}
    for (row, m, _), res in zip(cells, results):
        if isinstance(res, Exception):
            log.error("Sweep cell %s=%s m=%g failed", axis, row, m, exc_info=res)
            table[(row, m)] = None
            converged[(row, m)] = None
            continue
        table[(row, m)], converged[(row, m)] = res
        log.info("[sweep] %s=%s m=%g accuracy=%.4f converged=%s", axis, row, m, res[0], res[1])

    frame = out.sweep_frame(table, rows, cfg.m_values, axis=axis)
    doc = {
        "algorithms" if axis == "algorithm" else "weights": rows,
        "m_values": list(cfg.m_values),
        "accuracy": [[table[(r, m)] for m in cfg.m_values] for r in rows],
        "converged": [[converged[(r, m)] for m in cfg.m_values] for r in rows],
        "baselines": list(out.SWEEP_BASELINES),
    }
    out.write_document(doc, frame, cfg.output_format, cfg.output_path, footer=out.sweep_footer())
    failed = sum(v is None for v in table.values())
    return f"sweep: {len(cells)} cells, {failed} failed"


def _partition_for(cfg: RunConfig, ds: Dataset):
    if cfg.partition:
        pm, cents = out.load_partition(cfg.partition)
        return pm, cents
    result = run_clustering(ds, cluster_config(cfg, ds))
    return result.pm, result.cents


def cmd_validate(cfg: RunConfig) -> str:
    unknown = [name for name in cfg.indices if name not in INDEX_NAMES]
    if unknown:
        raise ConfigError(f"unknown validity indices {unknown}; choose from {list(INDEX_NAMES)}")
    ds = load_dataset(cfg)
    pm, cents = _partition_for(cfg, ds)
    spec = build_spec(cfg.distance, ds.d, p=cfg.p, r=cfg.r, weights=cfg.weights,
                      priority_weights=cfg.priority_weights)

    def centroids():
        return cents if cents is not None else update_centroids(ds, pm, cfg.m)

    compute = {
        "v_pc": lambda: validity.v_pc(pm),
        "v_pe": lambda: validity.v_pe(pm),
        "v_xb": lambda: validity.v_xb(pm, centroids(), ds),
        "db": lambda: validity.db_index(harden(pm), centroids(), ds),
        "cs": lambda: validity.cs_index(harden(pm), centroids(), ds),
        "g": lambda: validity.g_index(pm, ds, spec),
        "ig": lambda: validity.ig_index(pm, ds, cfg.y, spec),
    }
    cells: List[Dict[str, Any]] = []
    for name in cfg.indices:
        try:
            cells.append({"index": name, "value": float(compute[name]()), "error": None})
        except BfpmError as e:
            log.exception("Validity index %s failed", name)
            cells.append({"index": name, "value": None, "error": str(e)})

    doc = {"n": pm.n, "c": pm.c, "regimes": list(regime_subset_check(pm)), "indices": cells}
    frame = pd.DataFrame(cells, columns=["index", "value", "error"])
    out.write_document(doc, frame, cfg.output_format, cfg.output_path)
    shown = " ".join(f"{c['index']}={'ERR' if c['value'] is None else format(c['value'], '.4f')}"
                     for c in cells)
    return f"validate: {shown}"


def cmd_mutation(cfg: RunConfig) -> str:
    ds = load_dataset(cfg)
    result = run_clustering(ds, cluster_config(cfg, ds))
    pm = harden(result.pm) if cfg.harden_first else result.pm
    report = mutation_report(pm, cfg.thresholds)
    flags = detect_critical(pm, cfg.critical_epsilon, exact=cfg.exact_critical)
    taxonomy = object_taxonomy(pm, cfg.critical_epsilon, cfg.outlier_threshold,
                               exact=cfg.exact_critical)

    doc = out.mutation_document(report)
    doc["critical"] = [f.model_dump() for f in flags]
    doc["exact_critical"] = cfg.exact_critical
    doc["taxonomy"] = taxonomy.counts
    frame = out.mutation_frame(report)
    out.write_document(doc, frame, cfg.output_format, cfg.output_path)
    companion = _companion(cfg.output_path, cfg.output_format)
    if companion is not None:
        other = "csv" if cfg.output_format == "json" else "json"
        out.write_document(doc, frame, other, companion)

    counts = " ".join(f"{th:g}:{n}" for th, n in report.threshold_counts.items())
    return f"mutation: runner-up counts {counts} critical={len(flags)}"


def cmd_split(cfg: RunConfig) -> str:
    ds = load_dataset(cfg, normalize=False)
    plan = SplitPlan(kind=cfg.split, ratio=cfg.ratio, t=cfg.t, k=cfg.k, seed=cfg.seed)
    splits = plan_indices(ds.n, plan)
    doc = {"kind": plan.kind, "n": ds.n, "splits": [s.model_dump() for s in splits]}
    rows = [(i, j, role) for i, s in enumerate(splits)
            for role, idx in (("train", s.train), ("test", s.test)) for j in idx]
    frame = pd.DataFrame(rows, columns=["split", "object", "role"])
    out.write_document(doc, frame, cfg.output_format, cfg.output_path)
    return f"split: {plan.kind} produced {len(splits)} train/test pairs over n={ds.n}"


def cmd_dominant(cfg: RunConfig) -> str:
    ds = load_dataset(cfg, normalize=False)
    scan = scan_dominant(ds, cfg.lambda_)
    doc = scan.model_dump(by_alias=True)
    doc["feature_names"] = ds.feature_names
    frame = pd.DataFrame([r.feature_flags for r in scan.reports], columns=ds.feature_names)
    frame.insert(0, "object", range(ds.n))
    out.write_document(doc, frame, cfg.output_format, cfg.output_path)
    return f"dominant: {scan.objects_flagged} of {ds.n} objects carry a dominant feature"


def _class_report(pred: Sequence[int], truth: Sequence[int], n_classes: int) -> List[Dict[str, Any]]:
    report = []
    for cls in range(n_classes):
        cm = confusion(pred, truth, cls)
        report.append({"class": cls, "confusion": cm.model_dump(),
                       "metrics": metrics(cm).model_dump()})
    return report


def _normalized_split(ds: Dataset, train_idx: Sequence[int],
                      test_idx: Sequence[int]) -> Tuple[Dataset, Dataset]:
    """Normalize both parts with the training part's range; test values are clipped."""
    train = ds.subset(train_idx)
    bounds = fit_min_max(train)
    return normalize_min_max(train, bounds), normalize_min_max(ds.subset(test_idx), bounds)


def cmd_classify(cfg: RunConfig) -> str:
    ds = load_dataset(cfg, normalize=False)
    if cfg.positive_class >= ds.n_classes:
        raise ConfigError(f"positive class {cfg.positive_class} outside 0..{ds.n_classes - 1}")
    weights = parse_weight_spec(cfg.feature_weights, ds.d) if cfg.feature_weights else None
    distance = build_spec(cfg.distance, ds.d, p=cfg.p, r=cfg.r, weights=cfg.weights,
                          priority_weights=cfg.priority_weights)
    plan = SplitPlan(kind=cfg.split, ratio=cfg.ratio, t=cfg.t, k=cfg.k, seed=cfg.seed)

    per_split: List[Dict[str, Any]] = []
    frames: List[pd.DataFrame] = []
    correct = tested = 0
    for i, split in enumerate(plan_indices(ds.n, plan)):
        if not split.test:
            log.warning("split %d has no test objects", i)
            per_split.append({"split": i, "test_size": 0, "note": "no test objects"})
            continue
        train, test = _normalized_split(ds, split.train, split.test)
        model = build_model(train, weights, distance)
        result = bfpcm_classify(model, test)
        pred = result.predicted
        truth = test.labels.tolist()

        cm = confusion(pred, truth, cfg.positive_class)
        try:
            errors = error_measures(pred, truth).model_dump(exclude={"absolute", "squared"})
        except UndefinedMeasureError as e:
            log.warning("split %d: %s", i, e)
            errors = None
        hits = int(np.sum(np.asarray(pred) == np.asarray(truth)))
        correct += hits
        tested += len(truth)
        per_split.append({
            "split": i,
            "test_size": len(truth),
            "accuracy": hits / len(truth),
            "confusion": cm.model_dump(),
            "metrics": metrics(cm).model_dump(),
            "per_class": _class_report(pred, truth, ds.n_classes),
            "errors": errors,
            "objects": list(split.test),
            "predicted": list(pred),
        })
        part = out.membership_frame(result.pm, label_name="predicted")
        part["object"] = split.test
        part.insert(0, "split", i)
        part["truth"] = truth
        frames.append(part)

    accuracies = [s["accuracy"] for s in per_split if "accuracy" in s]
    pooled = correct / tested if tested else None
    doc = {
        "split": plan.kind,
        "positive_class": cfg.positive_class,
        "class_names": ds.class_names,
        "splits": per_split,
        "mean_accuracy": float(np.mean(accuracies)) if accuracies else None,
        "pooled_accuracy": pooled,
        "error_rate": None if pooled is None else 1.0 - pooled,
    }
    frame = pd.concat(frames, ignore_index=True) if frames else None
    out.write_document(doc, frame, cfg.output_format, cfg.output_path)
    if not accuracies:
        return "classify: no test objects"
    return (f"classify: {len(accuracies)} splits mean_accuracy={doc['mean_accuracy']:.4f} "
            f"pooled_accuracy={pooled:.4f}")


COMMANDS = {
    "cluster": cmd_cluster,
    "classify": cmd_classify,
    "validate": cmd_validate,
    "mutation": cmd_mutation,
    "split": cmd_split,
    "sweep": cmd_sweep,
    "dominant": cmd_dominant,
}


# -----------------------------------------------------------------------------
# Argument parsing
# -----------------------------------------------------------------------------
def _shared_arguments() -> argparse.ArgumentParser:
    # SUPPRESS keeps unset flags out of the namespace so the config file can fill them
    p = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    p.add_argument("dataset", help="CSV file with a header row")
    p.add_argument("--config", help="flat YAML file of flag values")
    p.add_argument("--label-column")
    p.add_argument("--algo", choices=["fpm", "fpm1", "fpm2", "bfpm", "bfpm_wfd"])
    p.add_argument("--c", type=int)
    p.add_argument("--m", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--max-iter", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--distance", choices=["lp", "wfd", "pwfd"])
    p.add_argument("--p", type=float)
    p.add_argument("--r", type=float)
    p.add_argument("--weights", help="uniform:VALUE or comma-separated per-feature weights")
    p.add_argument("--priority-weights", help="w'' divisors for pwfd, same syntax as --weights")
    p.add_argument("--raw-exponent", action="store_true")
    p.add_argument("--lambda", type=float, dest="lambda")
    p.add_argument("--critical-epsilon", type=float)
    p.add_argument("--exact-critical", action="store_true", help="flag exact ties only")
    p.add_argument("--thresholds", type=float, nargs="+")
    p.add_argument("--outlier-threshold", type=float)
    p.add_argument("--harden-first", action="store_true")
    p.add_argument("--hungarian", action="store_true")
    p.add_argument("--indices", nargs="+", help=f"any of {', '.join(INDEX_NAMES)}")
    p.add_argument("--y", type=float, help="exponent of the I_G normalizer")
    p.add_argument("--partition", help="cluster result JSON to validate instead of clustering")
    p.add_argument("--split", choices=["holdout", "subsampling", "random_subsampling", "kfold", "bootstrap"])
    p.add_argument("--ratio", type=float)
    p.add_argument("--k", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--feature-weights", help="BFPCM feature-space weights, same syntax as --weights")
    p.add_argument("--positive-class", type=int)
    p.add_argument("--m-values", type=float, nargs="+")
    p.add_argument("--weight-specs", nargs="+", help="weight specs to sweep; 'euclidean' for plain BFPM")
    p.add_argument("--algorithms", nargs="+",
                   choices=["fpm", "fpm1", "fpm2", "bfpm", "bfpm_wfd"],
                   help="sweep these algorithms instead of weight specs")
    p.add_argument("--format", choices=["json", "csv"])
    p.add_argument("--output")
    p.add_argument("--verbose", action="store_true")
    p.add_argument("--quiet", action="store_true")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bfpm", description="Bounded fuzzy possibilistic clustering toolkit")
    sub = parser.add_subparsers(dest="command", required=True)
    shared = _shared_arguments()
    helps = {
        "cluster": "run a clustering algorithm",
        "classify": "train and evaluate the BFPCM classifier over a resampling plan",
        "validate": "compute validity indices for a clustering or stored partition",
        "mutation": "runner-up membership analysis and critical objects",
        "split": "write train/test index assignments",
        "sweep": "accuracy grid over fuzzification constants and weight specs or algorithms",
        "dominant": "scan objects for dominant features",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[shared], help=text, argument_default=argparse.SUPPRESS)
    return parser


def parse_config(argv: Optional[Sequence[str]] = None) -> Tuple[RunConfig, bool, bool]:
    args = vars(build_parser().parse_args(argv))
    verbose = bool(args.pop("verbose", False))
    quiet = bool(args.pop("quiet", False))
    config_path = args.pop("config", None)
    return build_run_config(args, config_path), verbose, quiet


# -----------------------------------------------------------------------------
# Entrypoint
# -----------------------------------------------------------------------------
def main(argv: Optional[Sequence[str]] = None) -> int:
    configure_logging()
    try:
        cfg, verbose, quiet = parse_config(argv)
        configure_logging(verbose, quiet)
        summary = COMMANDS[cfg.command](cfg)
    except ValidationError as e:
        first = e.errors()[0]
        where = ".".join(str(x) for x in first.get("loc", ())) or "config"
        print(f"error: {where}: {first['msg']}", file=sys.stderr)
        return 2
    except BfpmError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    print(summary)
    return 0


if __name__ == "__main__":
    sys.exit(main())
