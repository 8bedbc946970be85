"""Trajectory and metrics files.

Trajectory CSV: header ``t,node_0,...,node_{n-1}``, one row per recorded
timestep, values printed with 17 significant digits. Next to it sits a JSON
sidecar ``<stem>.meta.json`` holding the model parameters, seed, variant,
convergence flag and stopping time.
"""

from __future__ import annotations

import csv
import json
from os import PathLike
from pathlib import Path

import numpy as np

from .dynamics import ModelParams, Trajectory
from .errors import IoFailure
from .metrics import REPORT_COLUMNS, MetricsReport, format_value

TRAJECTORY_SCHEMA = 1


def sidecar_path(path: str | PathLike) -> Path:
    path = Path(path)
    return path.with_name(path.stem + ".meta.json")


def write_trajectory(
    traj: Trajectory,
    path: str | PathLike,
    seed: int | None = None,
    extra: dict | None = None,
) -> Path:
    """Write the CSV and its sidecar; return the sidecar path."""
    path = Path(path)
    n = traj.states.shape[1]
    times = range(len(traj.states))
    if len(traj.states) != traj.steps + 1:
        # record=False keeps only the first and last state
        times = [0, traj.steps]
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t"] + [f"node_{i}" for i in range(n)])
            for t, row in zip(times, traj.states):
                w.writerow([str(t)] + [format_value(v) for v in row])
        meta = {
            "schema_version": TRAJECTORY_SCHEMA,
            "params": traj.params.to_dict(),
            "variant": traj.params.variant,
            "seed": seed,
            "converged": traj.converged,
            "stopping_time": traj.stopping_time,
            "steps": traj.steps,
            "cycle_detected": traj.cycle_detected,
            "cycle_kind": traj.cycle_kind,
            "cycle_length": traj.cycle_length,
            "n": n,
        }
        if extra:
            meta.update(extra)
        side = sidecar_path(path)
        side.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"{path}: {exc.strerror or exc}") from exc
    return side


def read_trajectory(path: str | PathLike) -> tuple[Trajectory, dict]:
    """Load a trajectory CSV plus its sidecar; returns ``(trajectory, meta)``."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
        meta = json.loads(sidecar_path(path).read_text())
    except OSError as exc:
        raise IoFailure(f"{exc.filename or path}: {exc.strerror or exc}") from exc
    if not rows or rows[0][0] != "t":
        raise IoFailure(f"{path}: missing 't,node_0,...' header")
    states = np.array([[float(v) for v in r[1:]] for r in rows[1:]], dtype=np.float64)
    params = ModelParams(**meta["params"])
    traj = Trajectory(
        states=states,
        converged=bool(meta["converged"]),
        stopping_time=int(meta["stopping_time"]),
        params=params,
        cycle_detected=bool(meta.get("cycle_detected", False)),
        cycle_length=meta.get("cycle_length"),
        cycle_kind=meta.get("cycle_kind"),
        steps=int(meta.get("steps", len(states) - 1)),
    )
    return traj, meta


def write_report(report: MetricsReport, path: str | PathLike) -> None:
    """Write a report as JSON (``.json``) or a one-row CSV (anything else)."""
    path = Path(path)
    try:
        if path.suffix == ".json":
            path.write_text(report.to_json() + "\n")
        else:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(REPORT_COLUMNS)
                w.writerow(report.to_row())
    except OSError as exc:
        raise IoFailure(f"{path}: {exc.strerror or exc}") from exc


def write_reports(reports, sources, path: str | PathLike) -> None:
    """Write several reports, each tagged with its source trajectory."""
    path = Path(path)
    try:
        if path.suffix == ".json":
            rows = [{"trajectory": str(src), **r.to_dict()} for r, src in zip(reports, sources)]
            path.write_text(json.dumps(rows, indent=2) + "\n")
        else:
            with path.open("w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(("trajectory",) + REPORT_COLUMNS)
                for r, src in zip(reports, sources):
                    w.writerow([str(src)] + r.to_row())
    except OSError as exc:
        raise IoFailure(f"{path}: {exc.strerror or exc}") from exc


def read_report(path: str | PathLike) -> MetricsReport:
    path = Path(path)
    if path.suffix == ".json":
        return MetricsReport.from_dict(json.loads(path.read_text()))
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    return MetricsReport.from_dict(rows[0])
