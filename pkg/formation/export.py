"""Trajectory CSV, verdict sidecars and matrix dumps."""
import json, pathlib
from typing import Any, Dict, List, Optional, Union

import numpy as np

from .errors import IoError, ParseError
from .schemas import TrajectoryRecord

PathLike = Union[str, pathlib.Path]
FMT = "%.17g"


def trajectory_columns(n: int, d: int) -> List[str]:
    axes = "xyz"[:d]
    cols = ["time"]
    cols += [f"agent{i}_{a}" for i in range(1, n + 1) for a in axes]
    cols.append("bearing_error")
    cols += [f"ctrl_norm_agent{i}" for i in range(1, n + 1)]
    return cols


def export_trajectory(record: TrajectoryRecord, path: PathLike) -> pathlib.Path:
    path = pathlib.Path(path)
    s, n, d = record.samples, record.n, record.d
    table = np.column_stack([
        record.times.reshape(s, 1),
        record.positions.reshape(s, n * d),
        record.errors.reshape(s, 1),
        record.control_norms.reshape(s, n),
    ]) if s else np.zeros((0, 2 + n * d + n))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, table, fmt=FMT, delimiter=",", header=",".join(trajectory_columns(n, d)), comments="")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    return path


def read_trajectory(path: PathLike) -> Dict[str, np.ndarray]:
    path = pathlib.Path(path)
    try:
        with path.open(encoding="utf-8") as f:
            header = f.readline().strip().split(",")
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except OSError as e:
        raise IoError(f"cannot read {path}: {e}") from e
    except ValueError as e:
        raise ParseError(str(e), str(path)) from e
    if data.size == 0:
        data = np.zeros((0, len(header)))
    return {name: data[:, k] for k, name in enumerate(header)}


def write_verdict(record: TrajectoryRecord, path: PathLike, extra: Optional[Dict[str, Any]] = None) -> pathlib.Path:
    path = pathlib.Path(path)
    payload = record.summary().model_dump(mode="json")
    payload.update(n=record.n, d=record.d, convergence_tol=record.convergence_tol)
    payload.update(extra or {})
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    return path


def export_matrix(matrix: np.ndarray, path: PathLike, prefix: str = "c") -> pathlib.Path:
    path = pathlib.Path(path)
    A = np.atleast_2d(np.asarray(matrix, dtype=float))
    header = ",".join(f"{prefix}{j}" for j in range(1, A.shape[1] + 1))
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        np.savetxt(path, A, fmt=FMT, delimiter=",", header=header, comments="")
    except OSError as e:
        raise IoError(f"cannot write {path}: {e}") from e
    return path
