"""Synchronous bounded-confidence dynamics on signed graphs.

Three update rules are available:

``scaled``
    Repulsive edges push with force ``|c - d|`` where ``d`` is the current
    distance, so a repelled pair settles at exactly ``c`` apart. Equal
    opinions on a repulsive edge are split by node index: the higher index
    moves up.
``naive``
    Repulsive edges push with the raw difference ``x_j - x_i``. Can cycle.
``hk``
    Plain Hegselmann-Krause averaging; only valid without repulsive edges.

All variants honour the strict confidence test ``|x_j - x_i| < c`` and
count the node itself through the unit diagonal.
"""

from __future__ import annotations

from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Literal

import numpy as np

from . import _kernels
from .errors import DimensionMismatch, InvalidParameter, NegativeEdgePresent
from .graph import SignedGraph

Variant = Literal["scaled", "naive", "hk"]
VARIANTS = ("scaled", "naive", "hk")

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10_000
CYCLE_DECIMALS = 12
CYCLE_WINDOW = 1000
CYCLE_REPEATS = 3

# use the numba loop when available; both paths give identical floats
USE_COMPILED = True


@dataclass(frozen=True)
class ModelParams:
    c: float
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    variant: Variant = "scaled"
    # stop as soon as the displacement drops below tol; False runs all max_iter steps
    early_stop: bool = True
    detect_cycles: bool = False
    cycle_window: int = CYCLE_WINDOW
    # re-entries of one receptivity pattern that count as an oscillation
    cycle_repeats: int = CYCLE_REPEATS

    def __post_init__(self):
        if not (np.isfinite(self.c) and self.c > 0):
            raise InvalidParameter(f"c must be positive and finite, got {self.c}")
        if not self.tol > 0:
            raise InvalidParameter(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise InvalidParameter(f"max_iter must be >= 1, got {self.max_iter}")
        if self.variant not in VARIANTS:
            raise InvalidParameter(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if int(self.cycle_window) < 1:
            raise InvalidParameter("cycle_window must be >= 1")
        if int(self.cycle_repeats) < 2:
            raise InvalidParameter("cycle_repeats must be >= 2")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Trajectory:
    """Recorded run.

    ``states[t]`` is the opinion vector at time ``t``. When the run was made
    with ``record=False`` only the initial and final states are kept.
    """

    states: np.ndarray
    converged: bool
    stopping_time: int
    params: ModelParams
    cycle_detected: bool = False
    cycle_length: int | None = None
    # "state" (exact revisit) or "pattern" (receptivity pattern keeps recurring)
    cycle_kind: str | None = None
    steps: int = field(default=0)

    @property
    def initial(self) -> np.ndarray:
        return self.states[0]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def variant(self) -> str:
        return self.params.variant

    def __len__(self):
        return len(self.states)


def as_state(x, n: int | None = None) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatch(f"opinion state must be 1-D, got shape {x.shape}")
    if n is not None and x.size != n:
        raise DimensionMismatch(f"state has {x.size} entries, graph has {n} nodes")
    if not np.all(np.isfinite(x)):
        raise InvalidParameter("opinion state contains non-finite values")
    return x


def signed_offset(i: int, j: int, state, graph: SignedGraph, c: float) -> float:
    """Signed distance node ``i`` would travel because of node ``j``."""
    x = np.asarray(state, dtype=np.float64)
    d = float(x[j] - x[i])
    if i == j or graph.adjacency[i, j] >= 0:
        return d
    if d != 0.0:
        return float(np.sign(d)) * abs(c - abs(d))
    return float(np.sign(j - i)) * c


class _Kernel:
    """Per-graph edge arrays reused across steps."""

    __slots__ = ("n", "indptr", "rows", "cols", "signs", "repulsive", "tie", "any_repulsive")

    def __init__(self, graph: SignedGraph):
        indptr, cols, signs = graph.csr()
        self.n = graph.n
        self.indptr = indptr
        self.rows = np.repeat(np.arange(graph.n, dtype=np.int64), np.diff(indptr))
        self.cols = cols
        self.signs = signs.astype(np.float64)
        self.repulsive = signs == -1
        self.tie = np.sign(cols - self.rows).astype(np.float64)
        self.any_repulsive = bool(self.repulsive.any())

    def update(self, x: np.ndarray, c: float, scaled: bool) -> np.ndarray:
        if USE_COMPILED and _kernels.HAVE_NUMBA:
            out = np.empty_like(x)
            return _kernels.update_loop(x, out, c, self.indptr, self.cols, self.signs, scaled)
        return self.update_numpy(x, c, scaled)

    def update_numpy(self, x: np.ndarray, c: float, scaled: bool) -> np.ndarray:
        d = x[self.cols] - x[self.rows]
        absd = np.abs(d)
        inconf = absd < c
        if scaled and self.any_repulsive:
            pushed = np.where(d != 0.0, np.sign(d) * np.abs(c - absd), self.tie * c)
            offset = np.where(self.repulsive, pushed, d)
        else:
            offset = d
        contrib = np.where(inconf, self.signs * offset, 0.0)
        num = np.bincount(self.rows, weights=contrib, minlength=self.n)
        den = 1.0 + np.bincount(self.rows, weights=inconf.astype(np.float64), minlength=self.n)
        return x + num / den


_KERNEL_CACHE: dict[int, tuple[SignedGraph, _Kernel]] = {}


def _kernel(graph: SignedGraph) -> _Kernel:
    hit = _KERNEL_CACHE.get(id(graph))
    if hit is not None and hit[0] is graph:
        return hit[1]
    k = _Kernel(graph)
    if len(_KERNEL_CACHE) > 64:
        _KERNEL_CACHE.clear()
    _KERNEL_CACHE[id(graph)] = (graph, k)
    return k


def step(state, graph: SignedGraph, params: ModelParams) -> np.ndarray:
    """One synchronous update with distance-scaled repulsion."""
    x = as_state(state, graph.n)
    return _kernel(graph).update(x, params.c, scaled=True)


def step_naive(state, graph: SignedGraph, params: ModelParams) -> np.ndarray:
    """One synchronous update where repulsion uses the raw difference."""
    x = as_state(state, graph.n)
    return _kernel(graph).update(x, params.c, scaled=False)


def step_hk(state, graph: SignedGraph, params: ModelParams) -> np.ndarray:
    """Plain HK update written in matrix form, independent of :func:`step`."""
    x = as_state(state, graph.n)
    if graph.m_r:
        raise NegativeEdgePresent(f"graph has {graph.m_r} repulsive edges")
    A = graph.adjacency.astype(np.float64)
    diff = x[None, :] - x[:, None]
    W = A * (np.abs(diff) < params.c)
    return x + (W * diff).sum(axis=1) / W.sum(axis=1)


_STEPPERS = {"scaled": step, "naive": step_naive, "hk": step_hk}


def step_variant(state, graph: SignedGraph, params: ModelParams) -> np.ndarray:
    return _STEPPERS[params.variant](state, graph, params)


class _CycleDetector:
    """Flags oscillation along a run.

    Two triggers, both inside a sliding window of recent steps:

    * the opinion vector rounded to 12 decimals equals an earlier one;
    * the receptivity pattern (which edges are currently within
      confidence) is re-entered ``repeats`` times while opinions are still
      moving by more than ``100 * tol``.

    The second trigger exists because an oscillating piecewise-linear
    orbit need not be exactly periodic.
    """

    def __init__(self, graph: SignedGraph, params: ModelParams):
        iu, ju, _ = graph.upper()
        self.iu, self.ju = iu, ju
        self.c = params.c
        self.window = int(params.cycle_window)
        self.repeats = int(params.cycle_repeats)
        self.min_move = 100.0 * params.tol
        self.states: dict[bytes, int] = {}
        self.state_log: deque[tuple[bytes, int]] = deque()
        self.entries: dict[bytes, deque[int]] = {}
        self.last_pattern: bytes | None = None

    def _pattern(self, x):
        return np.packbits(np.abs(x[self.ju] - x[self.iu]) < self.c).tobytes()

    def observe(self, x: np.ndarray, t: int, moved: float):
        """Return ``(kind, length)`` when an oscillation is found, else None."""
        key = (np.round(x, CYCLE_DECIMALS) + 0.0).tobytes()  # + 0.0 folds -0.0
        prev = self.states.get(key)
        if prev is not None:
            return "state", t - prev
        self.states[key] = t
        self.state_log.append((key, t))
        if len(self.state_log) > self.window:
            old_key, old_t = self.state_log.popleft()
            if self.states.get(old_key) == old_t:
                del self.states[old_key]

        pattern = self._pattern(x)
        if pattern != self.last_pattern:
            times = self.entries.setdefault(pattern, deque())
            while times and times[0] <= t - self.window:
                times.popleft()
            times.append(t)
            self.last_pattern = pattern
            if len(times) > self.repeats and moved >= self.min_move:
                return "pattern", t - times[-2]
        return None


def run(initial, graph: SignedGraph, params: ModelParams, record: bool = True) -> Trajectory:
    """Iterate the selected update rule until the max displacement is below ``tol``.

    Non-convergence within ``max_iter`` steps is reported, not raised. With
    ``params.detect_cycles`` the run also stops early once it is found to
    oscillate (see :class:`_CycleDetector`).
    """
    x = as_state(initial, graph.n).copy()
    c = params.c
    if params.variant == "hk":
        if graph.m_r:
            raise NegativeEdgePresent(f"graph has {graph.m_r} repulsive edges")
        advance = lambda s: step_hk(s, graph, params)  # noqa: E731
    else:
        kern = _kernel(graph)
        scaled = params.variant == "scaled"
        advance = lambda s: kern.update(s, c, scaled)  # noqa: E731

    history = [x] if record else None
    detector = _CycleDetector(graph, params) if params.detect_cycles else None
    if detector is not None:
        detector.observe(x, 0, np.inf)

    converged = False
    stopping_time = None
    cycle = None
    t = 0
    while t < params.max_iter:
        nxt = advance(x)
        t += 1
        moved = float(np.max(np.abs(nxt - x))) if x.size else 0.0
        x = nxt
        if record:
            history.append(x)
        if moved < params.tol:
            if stopping_time is None:
                stopping_time = t
            converged = True
            if params.early_stop:
                break
            continue
        converged = False
        stopping_time = None
        if detector is not None:
            cycle = detector.observe(x, t, moved)
            if cycle is not None:
                break

    if stopping_time is None:
        stopping_time = t
    states = np.array(history) if record else np.array([as_state(initial), x])
    return Trajectory(
        states=states,
        converged=converged,
        stopping_time=stopping_time,
        params=params,
        cycle_detected=cycle is not None,
        cycle_length=cycle[1] if cycle else None,
        cycle_kind=cycle[0] if cycle else None,
        steps=t,
    )
