"""Parameter sweeps over random signed networks.

A sweep runs ``trials`` independent simulations for every cell of the
parameter grid. Each (cell, trial) pair gets its own seed derived from the
master seed, the topology, the cell's parameter values (in millionths) and
the trial index, so results do not depend on grid order, scheduling or
worker count. Records are sorted before aggregation.

Exports (see :func:`export`):

``records.csv``
    one row per trial, columns ``RECORD_COLUMNS``
``aggregates.csv``
    one row per group, mean/std/count of each aggregated metric
``sweep_meta.json``
    schema version, config, grouping and column lists
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from itertools import product
from os import PathLike
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .dynamics import DEFAULT_MAX_ITER, DEFAULT_TOL, VARIANTS, ModelParams, run
from .errors import InvalidParameter, IoFailure, UnknownParameter
from .graph import generate_er_signed, generate_sbm_signed
from .metrics import REPORT_COLUMNS, MetricsReport, compute_report, format_value
from .rng import child_rng, derive_seed

SCHEMA_VERSION = 1
TOPOLOGIES = ("er", "sbm")

PAPER_P1 = (0.2, 0.4, 0.6, 0.8, 1.0)
PAPER_P2 = (0.0, 0.2, 0.4, 0.6, 0.8)
# the ER heatmap caption also lists p2 = 1
PAPER_P2_FIG = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
PAPER_RHO = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0)
PAPER_C = (0.05, 0.4, 0.8, 1.2, 1.6)

METRICS = ("opinion_spread", "proportional_spread")


@dataclass(frozen=True)
class SweepConfig:
    topology: str = "er"
    n: int = 100
    k: int = 5
    p1_grid: tuple = PAPER_P1
    p2_grid: tuple = PAPER_P2
    rho_grid: tuple = (1.0,)
    c_grid: tuple = PAPER_C
    trials: int = 100
    master_seed: int = 0
    opinion_interval: tuple = (0.0, 1.0)
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    variant: str = "scaled"
    label: str = ""

    def __post_init__(self):
        for name in ("p1_grid", "p2_grid", "rho_grid", "c_grid", "opinion_interval"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        self.validate()

    def validate(self) -> None:
        if self.topology not in TOPOLOGIES:
            raise InvalidParameter(f"topology must be one of {TOPOLOGIES}, got {self.topology!r}")
        if self.n < 1:
            raise InvalidParameter("n must be positive")
        if self.topology == "sbm" and not 1 <= self.k <= self.n:
            raise InvalidParameter(f"need 1 <= k <= n, got k={self.k}")
        for name in ("p1_grid", "p2_grid", "rho_grid"):
            grid = getattr(self, name)
            if not grid:
                raise InvalidParameter(f"{name} is empty")
            if any(not 0.0 <= v <= 1.0 for v in grid):
                raise InvalidParameter(f"{name} values must lie in [0, 1]")
        if not self.c_grid or any(not v > 0 for v in self.c_grid):
            raise InvalidParameter("c_grid values must be positive")
        if self.trials < 1:
            raise InvalidParameter("trials must be >= 1")
        if self.master_seed < 0:
            raise InvalidParameter("master_seed must be non-negative")
        lo, hi = self.opinion_interval
        if not lo < hi:
            raise InvalidParameter("opinion_interval needs lo < hi")
        if self.variant not in VARIANTS:
            raise InvalidParameter(f"variant must be one of {VARIANTS}")
        ModelParams(c=self.c_grid[0], tol=self.tol, max_iter=self.max_iter, variant=self.variant)

    @property
    def grid_params(self) -> tuple[str, ...]:
        return ("p1", "p2", "rho", "c") if self.topology == "sbm" else ("p1", "p2", "c")

    def cells(self) -> list[dict]:
        rho = self.rho_grid if self.topology == "sbm" else (None,)
        out = []
        for p1, p2, r, c in product(self.p1_grid, self.p2_grid, rho, self.c_grid):
            cell = {"p1": p1, "p2": p2, "c": c}
            if r is not None:
                cell["rho"] = r
            out.append(cell)
        return out

    def n_records(self) -> int:
        return len(self.cells()) * self.trials

    def to_dict(self) -> dict:
        d = asdict(self)
        for key, v in d.items():
            if isinstance(v, tuple):
                d[key] = list(v)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SweepConfig":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise UnknownParameter(f"unknown config fields: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path: str | PathLike) -> "SweepConfig":
        try:
            raw = json.loads(Path(path).read_text())
        except OSError as exc:
            raise IoFailure(f"{path}: {exc.strerror or exc}") from exc
        raw.pop("_comment", None)
        return cls.from_dict(raw)

    def to_json(self, path: str | PathLike | None = None) -> str:
        text = json.dumps(self.to_dict(), indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text


def er_paper(trials: int = 100, master_seed: int = 0, with_p2_one: bool = False) -> SweepConfig:
    """ER grid from the experiments; ``with_p2_one`` adds the p2 = 1 column of the heatmap."""
    return SweepConfig(
        topology="er",
        p2_grid=PAPER_P2_FIG if with_p2_one else PAPER_P2,
        trials=trials,
        master_seed=master_seed,
        label="er-paper-fig6" if with_p2_one else "er-paper",
    )


def sbm_paper(trials: int = 100, master_seed: int = 0) -> SweepConfig:
    return SweepConfig(
        topology="sbm", rho_grid=PAPER_RHO, trials=trials, master_seed=master_seed, label="sbm-paper"
    )


PRESETS = {
    "er-paper": lambda: er_paper(),
    "er-paper-fig6": lambda: er_paper(with_p2_one=True),
    "sbm-paper": lambda: sbm_paper(),
}


def _micro(v: float) -> int:
    return int(round(v * 1_000_000))


def trial_seed(config: SweepConfig, cell: dict, trial: int) -> int:
    coords = [_micro(cell[p]) for p in config.grid_params]
    return derive_seed(config.master_seed, f"{config.topology}-trial", *coords, trial)


@dataclass
class TrialRecord:
    p1: float
    p2: float
    rho: float | None
    c: float
    trial: int
    seed: int
    n: int
    k: int | None
    m: int | None = None
    m_r: int | None = None
    converged: bool | None = None
    stopping_time: int | None = None
    metrics: MetricsReport | None = None
    error: str | None = None

    def param(self, name: str):
        if name == "ratio":
            return self.p2 / self.p1 if self.p1 > 0 else None
        return getattr(self, name)

    def value(self, metric: str):
        if self.metrics is None:
            return None
        return getattr(self.metrics, metric)

    def sort_key(self):
        return (self.p1, self.p2, -1.0 if self.rho is None else self.rho, self.c, self.trial)


RECORD_COLUMNS = (
    "p1", "p2", "rho", "c", "trial", "seed", "n", "k", "m", "m_r",
    "converged", "stopping_time", *REPORT_COLUMNS, "error",
)


def _record_row(rec: TrialRecord) -> list[str]:
    base = [rec.p1, rec.p2, rec.rho, rec.c, rec.trial, rec.seed, rec.n, rec.k, rec.m, rec.m_r,
            rec.converged, rec.stopping_time]
    cells = [format_value(v) for v in base]
    if rec.metrics is not None:
        cells += rec.metrics.to_row()
    else:
        cells += [""] * len(REPORT_COLUMNS)
    cells.append(rec.error or "")
    return cells


def _parse_opt(v: str, cast):
    return None if v == "" else cast(v)


def _record_from_row(row: dict) -> TrialRecord:
    metrics = None
    if row.get("regime"):
        metrics = MetricsReport.from_dict({k: row[k] for k in REPORT_COLUMNS})
    conv = row["converged"]
    return TrialRecord(
        p1=float(row["p1"]),
        p2=float(row["p2"]),
        rho=_parse_opt(row["rho"], float),
        c=float(row["c"]),
        trial=int(row["trial"]),
        seed=int(row["seed"]),
        n=int(row["n"]),
        k=_parse_opt(row["k"], int),
        m=_parse_opt(row["m"], int),
        m_r=_parse_opt(row["m_r"], int),
        converged=None if conv == "" else conv == "true",
        stopping_time=_parse_opt(row["stopping_time"], int),
        metrics=metrics,
        error=row["error"] or None,
    )


def run_trial(config: SweepConfig, cell: dict, trial: int) -> TrialRecord:
    """One simulation. Failures are captured in ``error`` instead of raised."""
    seed = trial_seed(config, cell, trial)
    rho = cell.get("rho")
    rec = TrialRecord(
        p1=cell["p1"], p2=cell["p2"], rho=rho, c=cell["c"], trial=trial, seed=seed,
        n=config.n, k=config.k if config.topology == "sbm" else None,
    )
    try:
        graph_rng = child_rng(seed, "graph")
        if config.topology == "sbm":
            graph = generate_sbm_signed(config.n, config.k, cell["p1"], cell["p2"], rho, graph_rng)
        else:
            graph = generate_er_signed(config.n, cell["p1"], cell["p2"], graph_rng)
        lo, hi = config.opinion_interval
        x0 = child_rng(seed, "opinions").uniform(lo, hi, size=config.n)
        params = ModelParams(c=cell["c"], tol=config.tol, max_iter=config.max_iter,
                             variant=config.variant)
        traj = run(x0, graph, params, record=False)
        rec.m, rec.m_r = graph.m, graph.m_r
        rec.converged, rec.stopping_time = traj.converged, traj.stopping_time
        rec.metrics = compute_report(traj.initial, traj.final, cell["c"], graph.group_of)
    except Exception as exc:  # noqa: BLE001 - recorded per trial, sweep continues
        rec.error = f"{type(exc).__name__}: {exc}"
    return rec


def _run_task(task):
    config, cell, trial = task
    return run_trial(config, cell, trial)


@dataclass
class SweepResult:
    config: SweepConfig
    records: list = field(default_factory=list)

    def sorted(self) -> "SweepResult":
        return SweepResult(self.config, sorted(self.records, key=TrialRecord.sort_key))

    def errors(self) -> list[TrialRecord]:
        return [r for r in self.records if r.error]

    def values(self, metric: str, **where) -> np.ndarray:
        """Metric values of the records matching ``where`` (parameter == value)."""
        out = []
        for r in self.records:
            if all(r.param(k) == v for k, v in where.items()):
                v = r.value(metric)
                if v is not None:
                    out.append(v)
        return np.array(out, dtype=np.float64)


def run_sweep(config: SweepConfig, workers: int = 1, chunksize: int | None = None) -> SweepResult:
    """Run every (cell, trial). Output is independent of ``workers``."""
    config.validate()
    tasks = [(config, cell, t) for cell in config.cells() for t in range(config.trials)]
    if workers <= 1:
        records = [_run_task(task) for task in tasks]
    else:
        if chunksize is None:
            chunksize = max(1, len(tasks) // (workers * 4))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(_run_task, tasks, chunksize=chunksize))
    return SweepResult(config, sorted(records, key=TrialRecord.sort_key))


def _group_params(config: SweepConfig) -> tuple[str, ...]:
    return config.grid_params + ("ratio",)


def aggregate(
    result: SweepResult,
    group_by: Sequence[str] = (),
    metrics: Sequence[str] = METRICS,
) -> list[dict]:
    """Mean, sample std and count of each metric per group.

    ``group_by`` may name grid parameters or ``"ratio"`` (p2 / p1, records
    with p1 = 0 are dropped). Rows are ordered by the group values.
    """
    allowed = _group_params(result.config)
    for name in group_by:
        if name not in allowed:
            raise UnknownParameter(f"cannot group by {name!r}; choose from {allowed}")
    for metric in metrics:
        if metric not in REPORT_COLUMNS and metric not in ("stopping_time", "converged"):
            raise UnknownParameter(f"unknown metric {metric!r}")
    groups: dict[tuple, list[TrialRecord]] = {}
    for rec in sorted(result.records, key=TrialRecord.sort_key):
        key = tuple(rec.param(p) for p in group_by)
        if any(v is None for v in key) and "ratio" in group_by:
            continue
        groups.setdefault(key, []).append(rec)

    rows = []
    for key in sorted(groups, key=lambda k: tuple(-1.0 if v is None else v for v in k)):
        recs = groups[key]
        row = dict(zip(group_by, key))
        row["trials"] = len(recs)
        row["errors"] = sum(1 for r in recs if r.error)
        for metric in metrics:
            if metric in ("stopping_time", "converged"):
                vals = [float(getattr(r, metric)) for r in recs if getattr(r, metric) is not None]
            else:
                vals = [float(v) for r in recs if (v := r.value(metric)) is not None]
            arr = np.array(vals, dtype=np.float64)
            row[f"{metric}_mean"] = float(arr.mean()) if arr.size else None
            row[f"{metric}_std"] = float(arr.std(ddof=1)) if arr.size > 1 else (0.0 if arr.size else None)
            row[f"{metric}_count"] = int(arr.size)
        rows.append(row)
    return rows


def aggregate_columns(group_by: Sequence[str], metrics: Sequence[str] = METRICS) -> list[str]:
    cols = list(group_by) + ["trials", "errors"]
    for m in metrics:
        cols += [f"{m}_mean", f"{m}_std", f"{m}_count"]
    return cols


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _meta(result: SweepResult, group_by, metrics, fmt: str) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "format": fmt,
        "config": result.config.to_dict(),
        "group_by": list(group_by),
        "metrics": list(metrics),
        "record_columns": list(RECORD_COLUMNS),
        "aggregate_columns": aggregate_columns(group_by, metrics),
        "record_count": len(result.records),
        "error_count": len(result.errors()),
    }


def export(
    result: SweepResult,
    path: str | PathLike,
    format: str = "csv",
    group_by: Sequence[str] | None = None,
    metrics: Sequence[str] = METRICS,
) -> Path:
    """Write records, aggregates and metadata into directory ``path``.

    ``csv`` writes ``records.csv``, ``aggregates.csv`` and
    ``sweep_meta.json``; ``json`` writes ``sweep.json`` (records and
    aggregates inline) plus ``sweep_meta.json``. Aggregates default to
    grouping by every grid parameter.
    """
    if format not in ("csv", "json"):
        raise InvalidParameter(f"format must be 'csv' or 'json', got {format!r}")
    out = Path(path)
    group_by = tuple(result.config.grid_params if group_by is None else group_by)
    result = result.sorted()
    agg = aggregate(result, group_by, metrics)
    agg_cols = aggregate_columns(group_by, metrics)
    meta = _meta(result, group_by, metrics, format)
    try:
        out.mkdir(parents=True, exist_ok=True)
        if format == "csv":
            _write_csv(out / "records.csv", RECORD_COLUMNS, (_record_row(r) for r in result.records))
            _write_csv(out / "aggregates.csv", agg_cols,
                       ([format_value(row[c]) for c in agg_cols] for row in agg))
        else:
            payload = dict(meta)
            payload["records"] = [
                dict(zip(RECORD_COLUMNS, _record_row(r))) for r in result.records
            ]
            payload["aggregates"] = [
                {c: format_value(row[c]) for c in agg_cols} for row in agg
            ]
            (out / "sweep.json").write_text(json.dumps(payload, indent=1) + "\n")
        (out / "sweep_meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"{out}: {exc.strerror or exc}") from exc
    return out


def load_sweep(path: str | PathLike) -> tuple[SweepResult, list[dict]]:
    """Re-import an export directory; returns the result and the stored aggregate rows.

    Aggregate values come back as strings exactly as written.
    """
    path = Path(path)
    try:
        meta = json.loads((path / "sweep_meta.json").read_text())
        if meta["schema_version"] != SCHEMA_VERSION:
            raise IoFailure(f"{path}: unsupported schema version {meta['schema_version']}")
        config = SweepConfig.from_dict(meta["config"])
        if meta["format"] == "csv":
            with (path / "records.csv").open(newline="") as fh:
                rows = list(csv.DictReader(fh))
            with (path / "aggregates.csv").open(newline="") as fh:
                agg = list(csv.DictReader(fh))
        else:
            payload = json.loads((path / "sweep.json").read_text())
            rows, agg = payload["records"], payload["aggregates"]
    except OSError as exc:
        raise IoFailure(f"{exc.filename or path}: {exc.strerror or exc}") from exc
    return SweepResult(config, [_record_from_row(r) for r in rows]), agg


def aggregate_strings(rows: list[dict], group_by: Sequence[str], metrics: Sequence[str] = METRICS):
    """Format aggregate rows the way :func:`export` writes them, for comparisons."""
    cols = aggregate_columns(group_by, metrics)
    return [{c: format_value(row[c]) for c in cols} for row in rows]


def seed_collisions(config: SweepConfig) -> int:
    """Number of duplicate trial seeds over the full grid (expected 0)."""
    seeds = [trial_seed(config, cell, t) for cell in config.cells() for t in range(config.trials)]
    return len(seeds) - len(set(seeds))


def with_overrides(config: SweepConfig, **changes) -> SweepConfig:
    changes = {k: v for k, v in changes.items() if v is not None}
    return replace(config, **changes) if changes else config


def spread_table(result: SweepResult, metric: str = "opinion_spread") -> dict:
    """Nested mapping ``{c: {ratio: mean}}`` for the ER heatmap."""
    table: dict = {}
    for row in aggregate(result, ("c", "ratio"), (metric,)):
        table.setdefault(row["c"], {})[row["ratio"]] = row[f"{metric}_mean"]
    return table
