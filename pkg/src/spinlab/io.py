"""Config files, trajectory CSVs and atomic writes."""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path

import numpy as np

from .integrate import Trajectory
from .model import SystemConfig

TRAJECTORY_COLUMNS = (
    "tau", "wx", "wy", "wz", "qw", "qx", "qy", "qz",
    "th_x", "th_y", "th_z", "Hx", "Hy", "Hz",
)
FLOAT_FMT = "%.9g"


def write_atomic(path, data, mode="w"):
    """Write ``data`` to ``path`` via a temporary file and rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise
    return path


def load_config(path) -> SystemConfig:
    """Read a JSON config; errors name the offending field."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: not valid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise ValueError(f"{path}: top level must be a JSON object")
    return SystemConfig.from_dict(data)


def dump_config(cfg: SystemConfig) -> str:
    return json.dumps(cfg.to_dict(), indent=2) + "\n"


def save_config(cfg: SystemConfig, path):
    return write_atomic(path, dump_config(cfg))


def trajectory_table(traj: Trajectory, seconds=False):
    """Column names and the ``(n, k)`` array written to CSV."""
    cols = list(TRAJECTORY_COLUMNS)
    parts = [traj.tau[:, None], traj.omega, traj.quat, traj.euler, traj.momentum()]
    if seconds:
        cols.append("t")
        parts.append((traj.tau / traj.config.omega_mag)[:, None])
    return cols, np.hstack(parts) + 0.0  # no "-0" in output


def write_trajectory_csv(traj: Trajectory, path, seconds=False):
    cols, table = trajectory_table(traj, seconds=seconds)
    buf = io.StringIO()
    np.savetxt(buf, table, fmt=FLOAT_FMT, delimiter=",", header=",".join(cols), comments="")
    return write_atomic(path, buf.getvalue())


def read_trajectory_csv(path):
    """Load a trajectory CSV as ``(columns, array)``."""
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return header, data


def write_rows_csv(rows, path, columns=None):
    """Write a list of mappings as CSV with 9-significant-digit floats."""
    rows = list(rows)
    if columns is None:
        columns = list(rows[0].keys()) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(
            [FLOAT_FMT % row[c] if isinstance(row[c], float) else row[c] for c in columns]
        )
    return write_atomic(path, buf.getvalue())


def write_json(obj, path):
    return write_atomic(path, json.dumps(obj, indent=2, default=_json_default) + "\n")


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if hasattr(obj, "value"):
        return obj.value
    raise TypeError(f"cannot serialize {type(obj).__name__}")
