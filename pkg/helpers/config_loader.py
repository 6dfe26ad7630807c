"""Run configuration assembly: CLI flags > YAML config file > environment > defaults.

The config file is a flat YAML mapping whose keys are the long flag names,
with either ``-`` or ``_``::

    algo: bfpm_wfd
    c: 3
    m: 2
    weights: "uniform:0.5"
    thresholds: [0.85, 0.75, 0.70]
"""
from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Any, Dict, Optional

import yaml
from dotenv import load_dotenv

from models.errors import ConfigError
from models.models import RunConfig

log = logging.getLogger(__name__)

SEED_ENV = "BFPM_SEED"

# flag name -> RunConfig field, where they differ
_RENAMES = {
    "algo": "algorithm",
    "format": "output_format",
    "output": "output_path",
    "dataset": "dataset_path",
}
_SPLIT_NAMES = {"subsampling": "random_subsampling"}
_LISTS = ("thresholds", "m_values", "weight_specs", "algorithms", "indices")
_FIELDS = {name for name in RunConfig.model_fields} | {"lambda"}


def _canonical(key: str) -> str:
    key = key.strip().lstrip("-").replace("-", "_")
    key = _RENAMES.get(key, key)
    return "lambda" if key == "lambda_" else key


def normalize_keys(raw: Dict[str, Any], source: str) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, value in raw.items():
        name = _canonical(str(key))
        if name not in _FIELDS:
            raise ConfigError(f"unknown setting '{key}' in {source}")
        if name == "split" and isinstance(value, str):
            value = _SPLIT_NAMES.get(value, value)
        if name in _LISTS and isinstance(value, str):
            value = [part for part in value.split() if part]
        out[name] = value
    return out


def load_config_file(path: str | Path) -> Dict[str, Any]:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except yaml.YAMLError as e:
        raise ConfigError(f"config file {path} is not valid YAML: {e}")
    if raw is None:
        return {}
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path} must hold a flat mapping")
    nested = [k for k, v in raw.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config file {path} must be flat; nested keys: {nested}")
    log.info("Loaded config file %s (%d settings)", path, len(raw))
    return normalize_keys(raw, str(path))


def env_seed() -> Optional[int]:
    load_dotenv()
    value = os.getenv(SEED_ENV)
    if value is None or not value.strip():
        return None
    try:
        return int(value)
    except ValueError:
        raise ConfigError(f"{SEED_ENV} must be an integer, got '{value}'")


def build_run_config(flags: Dict[str, Any], config_path: Optional[str] = None) -> RunConfig:
    """Merge settings; ``flags`` holds only what was given on the command line."""
    merged: Dict[str, Any] = {}
    seed = env_seed()
    if seed is not None:
        merged["seed"] = seed
    if config_path:
        merged.update(load_config_file(config_path))
    merged.update(normalize_keys(flags, "command line"))
    return RunConfig.model_validate(merged)
