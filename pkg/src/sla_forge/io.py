"""File helpers: geometry files, JSON, run manifests."""

from __future__ import annotations

import csv
import json
import platform
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from . import __version__
from .geometry import ArrayGeometry


def read_geometry(path) -> ArrayGeometry:
    """Read ``{"positions": [...]}`` JSON or a whitespace-separated line."""
    return ArrayGeometry.from_text(Path(path).read_text(encoding="utf-8"))


def write_geometry(geom: ArrayGeometry, stem: Path) -> list[Path]:
    js, txt = stem.with_suffix(".json"), stem.with_suffix(".txt")
    write_json(geom.to_dict(), js)
    txt.write_text(geom.to_text() + "\n", encoding="utf-8")
    return [js, txt]


def write_json(data, path: Path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(data, indent=2, allow_nan=False) + "\n", encoding="utf-8")
    return path


def write_csv(rows: list[dict], path: Path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


def make_manifest(command: str, params: dict, grid: dict, outputs: list[Path]) -> dict:
    return {
        "tool": "sla-forge",
        "version": __version__,
        "command": command,
        "parameters": params,
        "grid": grid,
        "db_convention": "20*log10(normalized magnitude)",
        "python": platform.python_version(),
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "outputs": sorted(p.name for p in outputs),
    }


def load_packaged(name: str) -> dict:
    text = resources.files("sla_forge").joinpath("data", name).read_text(encoding="utf-8")
    return json.loads(text)
