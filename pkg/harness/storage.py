"""
Artifact persistence: versioned JSON documents, CSV tables with a metadata
comment line, and plain-text Wigner grids. No timestamps are written, so
reruns with the same configuration produce identical files.
"""
import json
import logging
import os
from pathlib import Path
from typing import Dict, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from algorithms.dynamics import WignerGrid

from .schemas import SCHEMA_VERSION, PathDocument, RunConfig

logger = logging.getLogger(__name__)


class StorageError(Exception):
    """File could not be read or written"""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(f"{message}: {path}" if path else message)
        self.path = path


class ConfigError(Exception):
    """Configuration file or override rejected"""


def ensure_dir(directory: str) -> Path:
    try:
        os.makedirs(directory, exist_ok=True)
    except OSError as exc:
        raise StorageError(f"cannot create output directory ({exc.strerror})", directory) from exc
    return Path(directory)


def metadata(config: RunConfig, **extra) -> Dict[str, object]:
    meta = {
        "schema_version": SCHEMA_VERSION,
        "config_hash": config.config_hash(),
        "seed": config.optimizer.seed,
    }
    meta.update(extra)
    return meta


def metadata_line(meta: Dict[str, object]) -> str:
    return "# " + " ".join(f"{key}={value}" for key, value in meta.items()) + "\n"


def _write_text(path: Path, text: str) -> Path:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(text)
    except OSError as exc:
        raise StorageError(f"cannot write file ({exc.strerror})", str(path)) from exc
    return path


def _read_text(path) -> str:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            return handle.read()
    except OSError as exc:
        raise StorageError(f"cannot read file ({exc.strerror})", str(path)) from exc


def write_document(path, document: BaseModel) -> Path:
    payload = document.model_dump(mode="json")
    return _write_text(Path(path), json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_config_template(directory, config: RunConfig) -> Dict[str, Path]:
    """config.json with the given values and config.schema.json with every default and description"""
    out = ensure_dir(directory)
    schema = json.dumps(RunConfig.model_json_schema(), sort_keys=True, indent=2) + "\n"
    return {
        "config": _write_text(out / "config.json", config.model_dump_json(indent=2) + "\n"),
        "schema": _write_text(out / "config.schema.json", schema),
    }


def load_config(path: Optional[str]) -> RunConfig:
    if not path:
        return RunConfig()
    try:
        return RunConfig.model_validate_json(_read_text(path))
    except ValidationError as exc:
        raise ConfigError(f"invalid configuration {path}:\n{exc}") from exc


def load_path_document(path) -> PathDocument:
    try:
        return PathDocument.model_validate_json(_read_text(path))
    except ValidationError as exc:
        raise ConfigError(f"invalid path document {path}:\n{exc}") from exc


def write_csv(path, frame: pd.DataFrame, meta: Dict[str, object]) -> Path:
    path = Path(path)
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as handle:
            handle.write(metadata_line(meta))
            frame.to_csv(handle, index=False)
    except OSError as exc:
        raise StorageError(f"cannot write file ({exc.strerror})", str(path)) from exc
    return path


def read_csv(path) -> pd.DataFrame:
    try:
        return pd.read_csv(path, comment="#")
    except OSError as exc:
        raise StorageError(f"cannot read file ({exc.strerror})", str(path)) from exc


def write_wigner(path, grid: WignerGrid, meta: Dict[str, object]) -> Path:
    lines = [
        metadata_line(meta),
        f"# x: {float(grid.xs[0])!r} {float(grid.xs[-1])!r} {grid.xs.size}\n",
        f"# p: {float(grid.ps[0])!r} {float(grid.ps[-1])!r} {grid.ps.size}\n",
    ]
    lines.extend(" ".join(repr(float(v)) for v in row) + "\n" for row in grid.values)
    return _write_text(Path(path), "".join(lines))


def read_wigner(path) -> WignerGrid:
    axes = {}
    rows = []
    for line in _read_text(path).splitlines():
        if line.startswith("# x:") or line.startswith("# p:"):
            start, stop, count = line[4:].split()
            axes[line[2]] = np.linspace(float(start), float(stop), int(count))
        elif line and not line.startswith("#"):
            rows.append([float(v) for v in line.split()])
    return WignerGrid(axes["x"], axes["p"], np.array(rows))
