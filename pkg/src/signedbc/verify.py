"""Executable checks of the analytical results on small instances.

Each ``check_*`` function simulates a batch of random instances and returns
a :class:`CheckReport`. Instances are built from a per-trial seed derived
from ``(seed, check name, trial)``, and every violation records that seed
together with ``n`` and the parameters, so a failure can be replayed with
the matching ``*_instance`` helper.

The results checked on all-repulsive graphs (ordering, extreme gaps, gap
width, final width) are verified on complete graphs only: the ordering
argument needs every pair adjacent, and on sparse all-repulsive graphs the
top node can be overtaken (see ``tests/test_verify.py``).
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .dynamics import ModelParams, run, step
from .graph import SignedGraph, build_signed_graph, complete_signed, generate_er_signed
from .metrics import width
from .rng import derive_seed, make_rng

ALGEBRA_TOL = 1e-10
LIMIT_TOL = 1e-6
CONJECTURE_TOL = 1e-9


@dataclass(frozen=True)
class NeighborhoodPartition:
    """In-confidence neighbours of ``node`` split by how they act on it.

    ``v_plus``: attractive neighbours (the node itself included);
    ``upper``: repulsive neighbours above (push the node down);
    ``lower``: repulsive neighbours below (push the node up).
    Equal-opinion repulsive neighbours go to ``upper`` when their index is
    larger and to ``lower`` otherwise.
    """

    node: int
    v_plus: frozenset
    upper: frozenset
    lower: frozenset

    @property
    def size(self) -> int:
        return len(self.v_plus) + len(self.upper) + len(self.lower)


def partition_neighborhood(i: int, state, graph: SignedGraph, c: float) -> NeighborhoodPartition:
    x = np.asarray(state, dtype=np.float64)
    v_plus, upper, lower = {i}, set(), set()
    cols, signs = graph.neighbors(i)
    for j, s in zip(cols.tolist(), signs.tolist()):
        d = x[j] - x[i]
        if not abs(d) < c:
            continue
        if s == 1:
            v_plus.add(j)
        elif d > 0 or (d == 0 and j > i):
            upper.add(j)
        else:
            lower.add(j)
    return NeighborhoodPartition(i, frozenset(v_plus), frozenset(upper), frozenset(lower))


def average_form(i: int, state, graph: SignedGraph, c: float) -> float:
    """Next opinion of ``i`` written as a plain average of shifted opinions."""
    x = np.asarray(state, dtype=np.float64)
    part = partition_neighborhood(i, x, graph, c)
    total = sum(x[j] for j in part.v_plus)
    total += sum(x[j] - c for j in part.upper)
    total += sum(x[j] + c for j in part.lower)
    return total / part.size


def grouped_form(i: int, state, graph: SignedGraph, c: float, subset: Iterable[int]) -> float:
    """Same average with the opinions of ``subset`` replaced by their mean."""
    x = np.asarray(state, dtype=np.float64)
    part = partition_neighborhood(i, x, graph, c)
    everyone = part.v_plus | part.upper | part.lower
    w = set(subset)
    if not w <= everyone:
        raise ValueError("subset must lie inside the in-confidence neighbourhood")
    total = sum(x[j] for j in everyone - w)
    if w:
        total += len(w) * (sum(x[j] for j in w) / len(w))
    total += (len(part.lower) - len(part.upper)) * c
    return total / part.size


@dataclass
class CheckReport:
    name: str
    instances: int = 0
    violations: list = field(default_factory=list)
    # False for conjectures: a violation is a finding, not an engine failure
    proven: bool = True
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def add(self, **record):
        self.violations.append(_plain(record))

    def to_dict(self) -> dict:
        d = asdict(self)
        d["passed"] = self.passed
        return d

    def summary(self) -> str:
        status = "PASS" if self.passed else ("FINDING" if not self.proven else "FAIL")
        return f"{status:7s} {self.name}: {self.instances} instances, {len(self.violations)} violations"


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_plain(v) for v in (sorted(obj) if isinstance(obj, (set, frozenset)) else obj)]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


# -- instance generators (public so violations can be replayed) ----------


def random_signed_instance(seed: int, n_max: int = 8, c_range=(0.05, 1.0)):
    """Random signed ER graph, confidence bound and opinions with some ties."""
    rng = make_rng(seed)
    n = int(rng.integers(1, n_max + 1))
    p1, p2 = rng.random(2)
    graph = generate_er_signed(n, p1, p2, rng)
    c = float(rng.uniform(*c_range))
    x = rng.random(n)
    if n >= 2 and rng.random() < 0.3:
        a, b = rng.choice(n, size=2, replace=False)
        x[b] = x[a]
    return graph, c, x


def repulsive_instance(seed: int, n_min: int = 2, n_max: int = 8, ties: bool = True):
    """Complete all-repulsive graph with opinions spread over 0.2c..3c."""
    rng = make_rng(seed)
    n = int(rng.integers(n_min, n_max + 1))
    c = float(rng.choice([0.05, 0.1, 0.4, 1.0]))
    spread = float(rng.uniform(0.2, 3.0)) * c
    x = rng.uniform(0.0, spread, size=n)
    if ties and n >= 2 and rng.random() < 0.25:
        a, b = rng.choice(n, size=2, replace=False)
        top = int(np.argmax(x)) if rng.random() < 0.5 else int(np.argmin(x))
        x[b if b != top else a] = x[top]
    return complete_signed(n, -1), c, x


def width_instance(seed: int, n: int, c: float):
    """Opinions uniform on an interval of width 0.9c at a random offset."""
    rng = make_rng(seed)
    lo = float(rng.uniform(-1.0, 1.0))
    return complete_signed(n, -1), lo + rng.uniform(0.0, 0.9 * c, size=n)


def mixed_instance(seed: int, n_max: int = 20):
    rng = make_rng(seed)
    n = int(rng.integers(2, n_max + 1))
    p1, p2 = rng.random(2)
    graph = generate_er_signed(n, p1, p2, rng)
    c = float(rng.uniform(0.05, 1.6))
    return graph, c, rng.random(n)


FIG2_EDGES = [(0, 2, -1), (0, 1, 1), (1, 2, 1)]
FIG2_STATE = (1.0, 0.5, 0.0)
FIG2_C = 0.6


def fig2_graph(repulsive: bool = True) -> SignedGraph:
    edges = FIG2_EDGES if repulsive else [(0, 1, 1), (1, 2, 1)]
    return build_signed_graph(3, edges)


# -- checks ----------------------------------------------------------------


def check_average_form(trials: int = 1000, seed: int = 0, n_max: int = 8) -> CheckReport:
    """step() equals the shifted-opinion average, node by node; grouping identity too."""
    rep = CheckReport("average_form")
    for trial in range(trials):
        s = derive_seed(seed, rep.name, trial)
        graph, c, x = random_signed_instance(s, n_max)
        nxt = step(x, graph, ModelParams(c=c))
        sub_rng = make_rng(derive_seed(s, "subset"))
        for i in range(graph.n):
            expect = average_form(i, x, graph, c)
            if abs(nxt[i] - expect) > ALGEBRA_TOL:
                rep.add(seed=s, n=graph.n, c=c, node=i, step=nxt[i], average=expect)
            part = partition_neighborhood(i, x, graph, c)
            pool = sorted(part.v_plus | part.upper | part.lower)
            size = int(sub_rng.integers(0, len(pool) + 1))
            w = sub_rng.choice(pool, size=size, replace=False).tolist() if size else []
            grouped = grouped_form(i, x, graph, c, w)
            if abs(grouped - expect) > ALGEBRA_TOL:
                rep.add(seed=s, n=graph.n, c=c, node=i, subset=w, grouped=grouped, average=expect)
        rep.instances += 1
    return rep


TWO_NODE_C_GRID = (0.05, 0.1, 0.25, 0.4, 0.5, 1.0, 1.6)


def check_two_node(c_grid: Iterable[float] = TWO_NODE_C_GRID, seed: int = 0) -> CheckReport:
    """Every two-node case: no edge, attractive, repulsive x separations 0, c/2, c, 3c/2.

    Starting from x_0 = 0 the arithmetic is exact, so equalities are exact.
    ``seed`` is unused; the table is exhaustive.
    """
    rep = CheckReport("two_node")
    for c in c_grid:
        c = float(c)
        for kind in ("none", "attractive", "repulsive"):
            edges = [] if kind == "none" else [(0, 1, 1 if kind == "attractive" else -1)]
            graph = build_signed_graph(2, edges)
            for frac in (0.0, 0.5, 1.0, 1.5):
                sep0 = frac * c
                traj = run([0.0, sep0], graph, ModelParams(c=c))
                sep = abs(traj.final[1] - traj.final[0])
                case = dict(c=c, edge=kind, separation=sep0, final=sep, T=traj.stopping_time)
                rep.instances += 1
                if not traj.converged or sep > max(c, sep0):
                    rep.add(reason="bound", **case)
                interacting = kind != "none" and sep0 < c
                if not interacting:
                    if traj.stopping_time != 1 or sep != sep0:
                        rep.add(reason="no-interaction case must stop at T=1 unchanged", **case)
                elif kind == "attractive" and sep != 0.0:
                    rep.add(reason="attractive pair must meet", **case)
                elif kind == "repulsive" and sep != c:
                    rep.add(reason="repulsive pair must end exactly c apart", **case)
    return rep


def _strict_argmax(x: np.ndarray):
    i = int(np.argmax(x))
    return i if np.count_nonzero(x == x[i]) == 1 else None


def _strict_argmin(x: np.ndarray):
    i = int(np.argmin(x))
    return i if np.count_nonzero(x == x[i]) == 1 else None


def check_order_preservation(trials: int = 200, n_max: int = 8, seed: int = 0) -> CheckReport:
    """Top and bottom nodes keep their rank on complete all-repulsive graphs.

    Along each trajectory: a strict maximum (minimum) stays strict and keeps
    its identity at the next step; when several nodes share the maximum,
    the highest index is the strict maximum one step later (lowest index
    for the minimum).
    """
    rep = CheckReport("order_preservation")
    steps = 0
    for trial in range(trials):
        s = derive_seed(seed, rep.name, trial)
        graph, c, x0 = repulsive_instance(s, 2, n_max)
        states = run(x0, graph, ModelParams(c=c)).states
        for t in range(len(states) - 1):
            cur, nxt = states[t], states[t + 1]
            steps += 1
            top = np.flatnonzero(cur == cur.max())
            bottom = np.flatnonzero(cur == cur.min())
            want_top, want_bottom = int(top.max()), int(bottom.min())
            if _strict_argmax(nxt) != want_top:
                rep.add(seed=s, n=graph.n, c=c, t=t, rule="max", expected=want_top, tied=top)
            if _strict_argmin(nxt) != want_bottom:
                rep.add(seed=s, n=graph.n, c=c, t=t, rule="min", expected=want_bottom, tied=bottom)
        rep.instances += 1
    rep.diagnostics["steps_checked"] = steps
    return rep


def extreme_gap_bounds(state, graph: SignedGraph, c: float, top: bool = True):
    """Bounds on the next-step gap between the extreme node and its nearest in-confidence node.

    Returns ``(i, j, lower, upper)`` or None when the premise does not hold
    (no strict extreme, nothing within confidence, or a tie at ``j``). The
    bottom case is the mirror image: shared upward pushers play the role of
    the shared downward ones.
    """
    x = np.asarray(state, dtype=np.float64)
    i = _strict_argmax(x) if top else _strict_argmin(x)
    if i is None:
        return None
    dist = (x[i] - x) if top else (x - x[i])
    near = np.flatnonzero((dist > 0) & (dist < c))
    if near.size == 0:
        return None
    j = int(near[np.argmin(dist[near])])
    if np.count_nonzero(x[near] == x[j]) > 1:
        return None
    pi = partition_neighborhood(i, x, graph, c)
    pj = partition_neighborhood(j, x, graph, c)
    if top:
        shared = pi.lower & pj.lower
        only_j = pj.lower - shared
    else:
        shared = pi.upper & pj.upper
        only_j = pj.upper - shared
    denom = 2 + len(shared) + len(only_j)
    return i, j, 2 * c / denom, (len(only_j) + 2) * c / denom


def check_extreme_gap_bounds(trials: int = 200, seed: int = 0, n_max: int = 8) -> CheckReport:
    """Next-step gap between the extreme node and its nearest in-confidence neighbour."""
    rep = CheckReport("extreme_gap_bounds")
    applied = 0
    for trial in range(trials):
        s = derive_seed(seed, rep.name, trial)
        graph, c, x0 = repulsive_instance(s, 2, n_max)
        states = run(x0, graph, ModelParams(c=c)).states
        for t in range(len(states) - 1):
            cur, nxt = states[t], states[t + 1]
            for top in (True, False):
                got = extreme_gap_bounds(cur, graph, c, top)
                if got is None:
                    continue
                i, j, lo, hi = got
                gap = (nxt[i] - nxt[j]) if top else (nxt[j] - nxt[i])
                tol = ALGEBRA_TOL * max(1.0, abs(cur[i]))
                applied += 1
                if not (lo - tol <= gap <= hi + tol):
                    rep.add(seed=s, n=graph.n, c=c, t=t, side="top" if top else "bottom",
                            i=i, j=j, gap=gap, lower=lo, upper=hi)
        rep.instances += 1
    rep.diagnostics["steps_checked"] = applied
    return rep


def check_gap_width(trials: int = 200, seed: int = 0, n_max: int = 8) -> CheckReport:
    """Consecutive in-confidence pairs are at most c apart one step later."""
    rep = CheckReport("gap_width")
    pairs = 0
    for trial in range(trials):
        s = derive_seed(seed, rep.name, trial)
        graph, c, x0 = repulsive_instance(s, 2, n_max)
        states = run(x0, graph, ModelParams(c=c)).states
        for t in range(len(states) - 1):
            cur, nxt = states[t], states[t + 1]
            order = np.argsort(cur, kind="stable")
            for lo_node, hi_node in zip(order[:-1], order[1:]):
                d = cur[hi_node] - cur[lo_node]
                if not (0 < d < c):
                    continue
                pairs += 1
                gap = abs(nxt[hi_node] - nxt[lo_node])
                if gap > c + ALGEBRA_TOL:
                    rep.add(seed=s, n=graph.n, c=c, t=t, i=int(hi_node), j=int(lo_node), gap=gap)
        rep.instances += 1
    rep.diagnostics["pairs_checked"] = pairs
    return rep


WIDTH_N_GRID = tuple(range(2, 11))
WIDTH_C_GRID = (0.05, 0.1, 0.4, 1.0)


def check_width_theorem(
    n_grid: Iterable[int] = WIDTH_N_GRID,
    c_grid: Iterable[float] = WIDTH_C_GRID,
    trials: int = 20,
    seed: int = 0,
) -> CheckReport:
    """Complete all-repulsive graphs started within c end (n-1)c wide with gaps of c."""
    rep = CheckReport("width_theorem")
    worst = 0.0
    for n in n_grid:
        for c in c_grid:
            for trial in range(trials):
                s = derive_seed(seed, rep.name, n, int(round(c * 1e6)), trial)
                graph, x0 = width_instance(s, n, c)
                traj = run(x0, graph, ModelParams(c=c), record=False)
                final = np.sort(traj.final)
                err = abs(width(final) - (n - 1) * c)
                gap_err = float(np.max(np.abs(np.diff(final) - c))) if n > 1 else 0.0
                worst = max(worst, err)
                rep.instances += 1
                if not traj.converged or err > LIMIT_TOL or gap_err > LIMIT_TOL:
                    rep.add(seed=s, n=n, c=c, converged=traj.converged,
                            width=width(final), expected=(n - 1) * c, gap_error=gap_err)
    rep.diagnostics["max_width_error"] = worst
    return rep


def check_conjectured_bound(trials: int = 1000, seed: int = 0, n_max: int = 20) -> CheckReport:
    """Final width <= max(initial width, m c) on random mixed-sign graphs.

    Also tallies, as diagnostics only, how often the tighter ``m_r c``
    candidate would have failed and which term of the bound was binding.
    """
    rep = CheckReport("conjectured_bound", proven=False)
    tight_fail = mc_binding = initial_binding = unconverged = 0
    for trial in range(trials):
        s = derive_seed(seed, rep.name, trial)
        graph, c, x0 = mixed_instance(s, n_max)
        traj = run(x0, graph, ModelParams(c=c), record=False)
        w0, wT = width(x0), width(traj.final)
        bound = max(w0, graph.m * c)
        rep.instances += 1
        unconverged += not traj.converged
        if graph.m * c >= w0:
            mc_binding += 1
        else:
            initial_binding += 1
        if wT > max(w0, graph.m_r * c) + CONJECTURE_TOL:
            tight_fail += 1
        if wT > bound + CONJECTURE_TOL:
            rep.add(seed=s, n=graph.n, c=c, m=graph.m, m_r=graph.m_r,
                    initial_width=w0, final_width=wT, converged=traj.converged)
    rep.diagnostics.update(
        mr_bound_exceeded=tight_fail,
        mc_term_binding=mc_binding,
        initial_term_binding=initial_binding,
        unconverged=unconverged,
    )
    return rep


def check_naive_nonconvergence(seed: int = 0) -> CheckReport:
    """The three-node example: the raw-difference rule oscillates, the scaled rule settles.

    ``seed`` is unused; the instance is fixed.
    """
    rep = CheckReport("naive_nonconvergence")
    graph = fig2_graph()
    plain = ModelParams(c=FIG2_C, variant="naive")
    long_run = run(FIG2_STATE, graph, plain, record=False)
    if long_run.converged:
        rep.add(reason="naive variant converged", T=long_run.stopping_time)
    watched = run(FIG2_STATE, graph, ModelParams(c=FIG2_C, variant="naive", detect_cycles=True))
    if not watched.cycle_detected or watched.converged:
        rep.add(reason="no cycle detected for the naive variant")
    scaled = run(FIG2_STATE, graph, ModelParams(c=FIG2_C))
    final = scaled.final
    pairwise = np.abs(final[:, None] - final[None, :])
    off_diag = pairwise[~np.eye(3, dtype=bool)]
    if not scaled.converged:
        rep.add(reason="scaled variant did not converge")
    elif not (np.all(off_diag < FIG2_C) and np.all(off_diag > 0)):
        rep.add(reason="scaled final state should be distinct yet pairwise within confidence",
                final=final)
    no_rep = fig2_graph(repulsive=False)
    a = run(FIG2_STATE, no_rep, ModelParams(c=FIG2_C, variant="naive"))
    b = run(FIG2_STATE, no_rep, ModelParams(c=FIG2_C, variant="hk"))
    if not a.converged or a.stopping_time != b.stopping_time or not np.allclose(a.final, b.final, atol=1e-12):
        rep.add(reason="without repulsive edges naive should match HK")
    rep.instances = 4
    rep.diagnostics.update(
        naive_steps=long_run.steps,
        cycle_kind=watched.cycle_kind,
        cycle_length=watched.cycle_length,
        cycle_found_at=watched.steps,
        scaled_stopping_time=scaled.stopping_time,
        scaled_final=final.tolist(),
    )
    return rep


SUITE: dict[str, Callable[[int], CheckReport]] = {
    "average_form": lambda seed: check_average_form(1000, seed),
    "two_node": lambda seed: check_two_node(TWO_NODE_C_GRID, seed),
    "order_preservation": lambda seed: check_order_preservation(200, 8, seed),
    "extreme_gap_bounds": lambda seed: check_extreme_gap_bounds(200, seed),
    "gap_width": lambda seed: check_gap_width(200, seed),
    "width_theorem": lambda seed: check_width_theorem(WIDTH_N_GRID, WIDTH_C_GRID, 20, seed),
    "conjectured_bound": lambda seed: check_conjectured_bound(1000, seed),
    "naive_nonconvergence": lambda seed: check_naive_nonconvergence(seed),
}


def run_suite(names: Iterable[str] | str = "all", seed: int = 0) -> list[CheckReport]:
    if names == "all":
        names = list(SUITE)
    elif isinstance(names, str):
        names = [n.strip() for n in names.split(",") if n.strip()]
    unknown = [n for n in names if n not in SUITE]
    if unknown:
        raise KeyError(f"unknown checks: {unknown}; available: {sorted(SUITE)}")
    return [SUITE[name](seed) for name in names]


def suite_failed(reports: Iterable[CheckReport]) -> bool:
    """True when any check of a proven result has violations."""
    return any(r.proven and not r.passed for r in reports)


def reports_json(reports: Iterable[CheckReport], seed: int) -> str:
    reports = list(reports)
    payload = {
        "seed": seed,
        "failed": suite_failed(reports),
        "checks": [r.to_dict() for r in reports],
    }
    return json.dumps(_plain(payload), indent=2, sort_keys=True)
