"""Measurements on opinion states: spread, group distances, clusters, regimes."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from typing import Sequence

import numpy as np

from .errors import (
    DegenerateInitialState,
    DimensionMismatch,
    InvalidParameter,
    SingleGroup,
    ZeroOutGroupDistance,
)
from .graph import GroupAssignment

CONSENSUS = "consensus"
POLARIZATION = "polarization"
FRAGMENTATION = "fragmentation"

CONSENSUS_SHARE = 0.9
DOMINANT_SHARE = 0.1


def width(state) -> float:
    """Largest pairwise distance, ``max - min``."""
    x = np.asarray(state, dtype=np.float64)
    return float(x.max() - x.min()) if x.size else 0.0


def opinion_spread(initial, final) -> float:
    """Final width over initial width."""
    x0 = np.asarray(initial, dtype=np.float64)
    xT = np.asarray(final, dtype=np.float64)
    if x0.shape != xT.shape:
        raise DimensionMismatch(f"state shapes differ: {x0.shape} vs {xT.shape}")
    w0 = width(x0)
    if w0 <= 0:
        raise DegenerateInitialState("initial opinions have zero width")
    return width(xT) / w0


def _mean_abs_between(a: np.ndarray, b: np.ndarray) -> float:
    """Mean of |a_i - b_j| over all ordered pairs, without forming the matrix."""
    b = np.sort(b)
    prefix = np.concatenate([[0.0], np.cumsum(b)])
    idx = np.searchsorted(b, a, side="right")
    below = idx * a - prefix[idx]
    above = (prefix[-1] - prefix[idx]) - (b.size - idx) * a
    return float((below + above).sum() / (a.size * b.size))


def group_distances(final, groups: GroupAssignment) -> tuple[float, float]:
    """Average in-group distance I and out-group distance O.

    I averages, over groups, the mean |x_j - x_l| over all ordered pairs
    inside the group (self-pairs included, so normalised by |g|^2). O
    averages, over groups, the mean distance from members to non-members.
    """
    x = np.asarray(final, dtype=np.float64)
    if groups.n != x.size:
        raise DimensionMismatch(f"groups cover {groups.n} nodes, state has {x.size}")
    sizes = groups.sizes()
    present = [g for g in range(groups.k) if sizes[g] > 0]
    if len(present) < 2:
        raise SingleGroup("out-group distance needs at least two non-empty groups")
    inner, outer = [], []
    for g in present:
        mask = groups.membership == g
        inside, outside = x[mask], x[~mask]
        inner.append(_mean_abs_between(inside, inside))
        outer.append(_mean_abs_between(inside, outside))
    return float(np.mean(inner)), float(np.mean(outer))


def proportional_spread(in_group: float, out_group: float) -> float:
    if not out_group > 0:
        raise ZeroOutGroupDistance("out-group distance is zero")
    return in_group / out_group


@dataclass(frozen=True)
class Cluster:
    members: tuple[int, ...]
    mean: float
    low: float
    high: float

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def width(self) -> float:
        return self.high - self.low


def cluster_opinions(final, gap_threshold: float) -> list[Cluster]:
    """Split sorted opinions wherever consecutive values differ by >= ``gap_threshold``."""
    if not gap_threshold > 0:
        raise InvalidParameter(f"gap_threshold must be positive, got {gap_threshold}")
    x = np.asarray(final, dtype=np.float64)
    if x.size == 0:
        return []
    order = np.argsort(x, kind="stable")
    xs = x[order]
    cuts = np.flatnonzero(np.diff(xs) >= gap_threshold) + 1
    clusters = []
    for seg_idx, seg_val in zip(np.split(order, cuts), np.split(xs, cuts)):
        clusters.append(
            Cluster(
                members=tuple(sorted(int(i) for i in seg_idx)),
                mean=float(seg_val.mean()),
                low=float(seg_val[0]),
                high=float(seg_val[-1]),
            )
        )
    return clusters


def classify_regime(
    clusters: Sequence[Cluster],
    n: int | None = None,
    consensus_share: float = CONSENSUS_SHARE,
    dominant_share: float = DOMINANT_SHARE,
) -> str:
    """Label a clustering as consensus, polarization or fragmentation.

    Consensus: one cluster holds at least ``consensus_share`` of the nodes.
    Polarization: two or three clusters each hold at least
    ``dominant_share`` and together at least ``consensus_share``.
    Anything else is fragmentation.
    """
    if not clusters:
        raise InvalidParameter("need at least one cluster")
    sizes = np.array([cl.size if isinstance(cl, Cluster) else len(cl) for cl in clusters])
    if n is None:
        n = int(sizes.sum())
    if sizes.max() >= consensus_share * n:
        return CONSENSUS
    dominant = sizes[sizes >= dominant_share * n]
    if 2 <= dominant.size <= 3 and dominant.sum() >= consensus_share * n:
        return POLARIZATION
    return FRAGMENTATION


REPORT_COLUMNS = (
    "initial_width",
    "final_width",
    "opinion_spread",
    "in_group_distance",
    "out_group_distance",
    "proportional_spread",
    "initial_proportional_spread",
    "cluster_count",
    "regime",
)


@dataclass(frozen=True)
class MetricsReport:
    """Flat summary of one run. Group-based fields are None without groups."""

    initial_width: float
    final_width: float
    opinion_spread: float | None
    in_group_distance: float | None
    out_group_distance: float | None
    proportional_spread: float | None
    initial_proportional_spread: float | None
    cluster_count: int
    regime: str

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_row(self) -> list[str]:
        """CSV cells in ``REPORT_COLUMNS`` order; None becomes an empty cell."""
        return [format_value(getattr(self, name)) for name in REPORT_COLUMNS]

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        kw = {}
        for f in fields(cls):
            v = d.get(f.name)
            if v in ("", None):
                kw[f.name] = None
            elif f.name == "cluster_count":
                kw[f.name] = int(v)
            elif f.name == "regime":
                kw[f.name] = str(v)
            else:
                kw[f.name] = float(v)
        return cls(**kw)


def format_value(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        if math.isnan(v):
            return "nan"
        return f"{float(v):.17g}"
    return str(v)


def compute_report(
    initial,
    final,
    c: float,
    groups: GroupAssignment | None = None,
    gap_threshold: float | None = None,
) -> MetricsReport:
    """Assemble a :class:`MetricsReport`; the cluster gap defaults to ``c / 2``."""
    x0 = np.asarray(initial, dtype=np.float64)
    xT = np.asarray(final, dtype=np.float64)
    w0, wT = width(x0), width(xT)
    spread = wT / w0 if w0 > 0 else None
    in_d = out_d = ps = ps0 = None
    if groups is not None and np.count_nonzero(groups.sizes()) >= 2:
        in_d, out_d = group_distances(xT, groups)
        ps = in_d / out_d if out_d > 0 else None
        i0, o0 = group_distances(x0, groups)
        ps0 = i0 / o0 if o0 > 0 else None
    clusters = cluster_opinions(xT, gap_threshold if gap_threshold is not None else c / 2)
    return MetricsReport(
        initial_width=w0,
        final_width=wT,
        opinion_spread=spread,
        in_group_distance=in_d,
        out_group_distance=out_d,
        proportional_spread=ps,
        initial_proportional_spread=ps0,
        cluster_count=len(clusters),
        regime=classify_regime(clusters, xT.size),
    )
