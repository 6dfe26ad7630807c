from __future__ import annotations

import logging
from pathlib import Path
from typing import Optional

import numpy as np
import pandas as pd

from models.errors import DatasetError
from models.models import Dataset

log = logging.getLogger(__name__)

IRIS_CSV = Path(__file__).resolve().parent.parent / "data" / "iris.csv"
IRIS_LABEL = "class"


def _read_frame(path: Path) -> pd.DataFrame:
    try:
        # every cell as text so that parse failures can be located exactly
        df = pd.read_csv(path, sep=",", dtype=str, encoding="utf-8",
                         keep_default_na=False, skip_blank_lines=True)
    except FileNotFoundError:
        raise DatasetError(f"no such file: {path}")
    except pd.errors.EmptyDataError:
        raise DatasetError(f"empty file: {path}")
    except pd.errors.ParserError as e:
        raise DatasetError(f"ragged rows in {path}: {e}")
    except UnicodeDecodeError as e:
        raise DatasetError(f"{path} is not UTF-8: {e}")
    if df.empty:
        raise DatasetError(f"no data rows in {path}")
    # short rows come back padded with NaN
    missing = df.isna()
    if missing.to_numpy().any():
        row = int(np.argmax(missing.any(axis=1).to_numpy())) + 1
        raise DatasetError("ragged row: fewer cells than header columns", row=row)
    return df


def _parse_column(raw: pd.Series) -> np.ndarray:
    values = pd.to_numeric(raw.str.strip(), errors="coerce").to_numpy(dtype=float)
    bad = ~np.isfinite(values)
    if bad.any():
        row = int(np.argmax(bad))
        raise DatasetError(f"cannot parse {raw.iloc[row]!r} as a finite number",
                           row=row + 1, column=str(raw.name))
    return values


def load_csv(path: str | Path, label_column: Optional[str] = None) -> Dataset:
    """
    Read a comma-separated, UTF-8 file with a mandatory header row.

    Rows in error messages are 1-based data rows (the header is not counted).
    Labels are mapped to dense indices in order of first appearance.
    """
    path = Path(path)
    df = _read_frame(path)

    labels = None
    class_names: list[str] = []
    if label_column is not None:
        if label_column not in df.columns:
            raise DatasetError(f"unknown label column '{label_column}'; columns: {list(df.columns)}")
        codes, uniques = pd.factorize(df[label_column].str.strip(), sort=False)
        labels = codes
        class_names = [str(u) for u in uniques]
        df = df.drop(columns=[label_column])

    if df.shape[1] == 0:
        raise DatasetError(f"{path} has no feature columns")

    objects = np.column_stack([_parse_column(df[col]) for col in df.columns])
    ds = Dataset(
        objects=objects,
        labels=labels,
        feature_names=[str(c) for c in df.columns],
        class_names=class_names,
        normalized=False,
    )
    log.info("Loaded %s: n=%d d=%d classes=%d", path.name, ds.n, ds.d, ds.n_classes)
    return ds


def load_iris() -> Dataset:
    """The bundled 150 x 4 Iris fixture with its three classes."""
    return load_csv(IRIS_CSV, label_column=IRIS_LABEL)
