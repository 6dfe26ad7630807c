"""Result documents (JSON) and tables (CSV), written atomically.

A document is written to a temporary file in the target directory and moved
into place with ``os.replace``, so readers never see a partial report.
"""
from __future__ import annotations

import io
import json
import logging
import os
import sys
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.errors import DatasetError
from models.models import Centroids, ClusterResult, MutationReport, PartitionMatrix

log = logging.getLogger(__name__)

ERR = "ERR"

# published Iris accuracies, in percent
SWEEP_BASELINES = (
    "Iris, m=2, Euclidean: 97.33",
    "Iris, m=2, WFD uniform:1/2: 100.00",
)


# -----------------------------------------------------------------------------
# Writers
# -----------------------------------------------------------------------------
def write_text(text: str, path: Optional[str | Path]) -> None:
    """Write ``text`` to ``path`` atomically, or to stdout when no path is given."""
    if path is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    log.info("Wrote %s", path)


def render_json(doc: Any) -> str:
    return json.dumps(doc, indent=2, allow_nan=False) + "\n"


def render_csv(frame: pd.DataFrame, footer: Iterable[str] = ()) -> str:
    buf = io.StringIO()
    frame.to_csv(buf, index=False, lineterminator="\n")
    for line in footer:
        buf.write(f"# {line}\n")
    return buf.getvalue()


def write_document(doc: Any, frame: Optional[pd.DataFrame], output_format: str,
                   path: Optional[str | Path], footer: Iterable[str] = ()) -> None:
    """JSON renders ``doc``; CSV renders ``frame`` (falls back to JSON when there is no table)."""
    if output_format == "csv" and frame is not None:
        write_text(render_csv(frame, footer), path)
    else:
        write_text(render_json(doc), path)


# -----------------------------------------------------------------------------
# Payloads
# -----------------------------------------------------------------------------
def _matrix(arr: np.ndarray) -> List[List[float]]:
    return [[float(x) for x in row] for row in arr]


def cluster_document(result: ClusterResult, accuracy: Optional[float] = None,
                     majority_labels: Optional[List[Optional[int]]] = None) -> Dict[str, Any]:
    cfg = result.config
    return {
        "algorithm": cfg.algorithm,
        "c": cfg.c,
        "m": cfg.m,
        "epsilon": cfg.epsilon,
        "max_iter": cfg.max_iter,
        "seed": cfg.seed,
        "distance": cfg.distance.model_dump(mode="json"),
        "iterations": result.iterations,
        "converged": result.converged,
        "objective": result.objective,
        "objective_trace": list(result.objective_trace),
        "reseeds": result.reseeds,
        "accuracy": accuracy,
        "majority_labels": majority_labels,
        "regime": result.pm.regime,
        "centroids": _matrix(result.cents.v),
        "memberships": _matrix(result.pm.u),
    }


def membership_frame(pm: PartitionMatrix, label_name: str = "cluster") -> pd.DataFrame:
    """One row per object: a ``u_i`` column per cluster and the hardened label."""
    frame = pd.DataFrame({f"u_{i}": pm.u[i] for i in range(pm.c)})
    frame.insert(0, "object", range(pm.n))
    frame[label_name] = np.argmax(pm.u, axis=0)
    return frame


def load_partition(path: str | Path) -> Tuple[PartitionMatrix, Optional[Centroids]]:
    """Partition (and centroids, when stored) from a cluster result document."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise DatasetError(f"no such partition file: {path}")
    except json.JSONDecodeError as e:
        raise DatasetError(f"partition file {path} is not JSON: {e}")
    if not isinstance(doc, dict) or "memberships" not in doc:
        raise DatasetError(f"partition file {path} has no 'memberships' matrix")
    try:
        pm = PartitionMatrix(u=doc["memberships"], regime=doc.get("regime", "bfpm"))
        cents = Centroids(v=doc["centroids"]) if doc.get("centroids") else None
    except ValueError as e:
        raise DatasetError(f"partition file {path}: {e}")
    return pm, cents


def mutation_document(report: MutationReport) -> Dict[str, Any]:
    return {
        "threshold_counts": {f"{th:g}": n for th, n in report.threshold_counts.items()},
        "per_object": [e.model_dump() for e in report.per_object],
    }


def mutation_frame(report: MutationReport) -> pd.DataFrame:
    """Two membership series per object, ready to plot."""
    return pd.DataFrame(
        [(e.object_index, e.own_membership, e.runner_up_membership) for e in report.per_object],
        columns=["object_index", "own_membership", "runner_up_membership"],
    )


def sweep_frame(cells: Dict[Tuple[str, float], Optional[float]], labels: Sequence[str],
                m_values: Sequence[float], axis: str = "weights") -> pd.DataFrame:
    """Rows are weight specs (or algorithms), columns are m values; failed cells hold ERR."""
    rows = []
    for label in labels:
        row: Dict[str, Any] = {axis: label}
        for m in m_values:
            acc = cells.get((label, m))
            row[f"m={m:g}"] = ERR if acc is None else f"{acc:.4f}"
        rows.append(row)
    return pd.DataFrame(rows, columns=[axis] + [f"m={m:g}" for m in m_values])


def sweep_footer() -> List[str]:
    return ["reference accuracies (%)"] + list(SWEEP_BASELINES)
