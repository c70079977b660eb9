"""CSV/JSON writers. Floats are written with ``repr`` so identical inputs give identical bytes."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np


def fmt(x) -> str:
    x = float(x)
    if math.isnan(x):
        return ""
    return repr(x)


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True) + "\n"


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8")
    return path


def write_rows(path: Path, header: list[str], rows) -> Path:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def write_field_csv(path: Path, header: list[str], x_axis, y_axis, *fields) -> Path:
    """Long-format CSV ``x,y,f1,f2,...`` with x the slow index."""
    X, Y = np.meshgrid(x_axis, y_axis, indexing="ij")
    cols = [X.ravel(), Y.ravel()] + [np.asarray(f).ravel() for f in fields]
    lines = [",".join(header)]
    lines += [",".join(repr(float(v)) for v in vals) for vals in zip(*cols)]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    return Path(path)


def read_field_csv(path: Path) -> tuple[list[str], np.ndarray]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    header = text[0].split(",")
    data = np.array([[float(v) for v in line.split(",")] for line in text[1:]])
    return header, data


def potential_grid_files(grid, out_dir: Path, stem: str = "potential_grid", fmt_: str = "csv") -> list[Path]:
    out_dir = Path(out_dir)
    meta = {
        "device": grid.params.to_dict(),
        "window": {"phi_wb": [grid.phi_axis[0], grid.phi_axis[-1]],
                   "theta_rad": [grid.theta_axis[0], grid.theta_axis[-1]]},
        "resolution": [len(grid.phi_axis), len(grid.theta_axis)],
        "n_contours": grid.n_contours,
        "contour_interval_hz": grid.contour_interval,
        "units": {"values": "V/h in Hz"},
    }
    paths = []
    if fmt_ == "csv":
        paths.append(write_field_csv(out_dir / f"{stem}.csv", ["phi_wb", "theta_rad", "V_over_h_hz"],
                                     grid.phi_axis, grid.theta_axis, grid.values))
    else:
        paths.append(write_json(out_dir / f"{stem}.json", {
            "phi_wb": grid.phi_axis, "theta_rad": grid.theta_axis, "V_over_h_hz": grid.values}))
    paths.append(write_json(out_dir / f"{stem}.meta.json", meta))
    return paths
