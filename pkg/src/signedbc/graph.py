"""Signed networks: data model, random generators and the edge-list file format.

A :class:`SignedGraph` holds an undirected graph whose edges carry a sign,
+1 (attractive) or -1 (repulsive). The diagonal is always +1, so every node
counts itself when averaging.

Storage is dense (an ``int8`` n x n matrix) up to ``DENSE_LIMIT`` nodes and
neighbour lists above that. Dynamics never read the storage directly: both
layouts expose the same canonical CSR view (rows in node order, neighbours
sorted), so simulation results do not depend on the layout.
"""

from __future__ import annotations

from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    ConflictingEdgeSign,
    DimensionMismatch,
    GraphFormatError,
    IndexOutOfRange,
    InvalidEdgeSign,
    InvalidGroupCount,
    InvalidParameter,
    InvalidProbability,
    SelfLoopRejected,
)

DENSE_LIMIT = 4096

# rows of the upper triangle sampled per block by the generators
_SAMPLE_BLOCK = 256


@dataclass(frozen=True)
class GroupAssignment:
    """Partition of nodes ``0..n-1`` into ``k`` groups."""

    k: int
    membership: np.ndarray

    def __post_init__(self):
        membership = np.asarray(self.membership, dtype=np.int64)
        if self.k < 1:
            raise InvalidGroupCount(f"k must be >= 1, got {self.k}")
        if membership.ndim != 1:
            raise DimensionMismatch("membership must be one-dimensional")
        if membership.size and (membership.min() < 0 or membership.max() >= self.k):
            raise InvalidGroupCount("group index outside [0, k)")
        membership.setflags(write=False)
        object.__setattr__(self, "membership", membership)

    @classmethod
    def balanced(cls, n: int, k: int) -> "GroupAssignment":
        """Contiguous balanced partition: node i goes to group floor(i*k/n)."""
        if k < 1 or k > n:
            raise InvalidGroupCount(f"need 1 <= k <= n, got k={k}, n={n}")
        return cls(k, (np.arange(n, dtype=np.int64) * k) // n)

    @classmethod
    def from_sizes(cls, sizes: Sequence[int]) -> "GroupAssignment":
        sizes = [int(s) for s in sizes]
        if not sizes or any(s < 1 for s in sizes):
            raise InvalidGroupCount(f"group sizes must be positive, got {sizes}")
        return cls(len(sizes), np.repeat(np.arange(len(sizes)), sizes))

    @property
    def n(self) -> int:
        return int(self.membership.size)

    def sizes(self) -> np.ndarray:
        return np.bincount(self.membership, minlength=self.k)

    def members(self, g: int) -> np.ndarray:
        return np.flatnonzero(self.membership == g)

    def is_contiguous(self) -> bool:
        return bool(np.all(np.diff(self.membership) >= 0))

    def __eq__(self, other):
        if not isinstance(other, GroupAssignment):
            return NotImplemented
        return self.k == other.k and np.array_equal(self.membership, other.membership)

    def __hash__(self):
        return hash((self.k, self.membership.tobytes()))


class SignedGraph:
    """Immutable undirected signed graph with unit self-loops.

    Construct through :func:`build_signed_graph`, the generators, or
    :meth:`from_upper` (pre-validated upper-triangle arrays).
    """

    __slots__ = ("n", "group_of", "_iu", "_ju", "_su", "_dense", "_csr")

    def __init__(self, n, iu, ju, su, group_of=None):
        self.n = int(n)
        self.group_of = group_of
        order = np.lexsort((ju, iu))
        self._iu = np.ascontiguousarray(np.asarray(iu, dtype=np.int64)[order])
        self._ju = np.ascontiguousarray(np.asarray(ju, dtype=np.int64)[order])
        self._su = np.ascontiguousarray(np.asarray(su, dtype=np.int8)[order])
        for a in (self._iu, self._ju, self._su):
            a.setflags(write=False)
        self._csr = None
        self._dense = None
        if self.n <= DENSE_LIMIT:
            dense = np.eye(self.n, dtype=np.int8)
            dense[self._iu, self._ju] = self._su
            dense[self._ju, self._iu] = self._su
            dense.setflags(write=False)
            self._dense = dense

    @classmethod
    def from_upper(cls, n, iu, ju, su, group_of=None) -> "SignedGraph":
        return cls(n, iu, ju, su, group_of)

    # -- storage -------------------------------------------------------
    @property
    def storage(self) -> str:
        return "dense" if self._dense is not None else "lists"

    @property
    def adjacency(self) -> np.ndarray:
        """Dense sign matrix (diagonal +1). Materialised on demand above the dense limit."""
        if self._dense is not None:
            return self._dense
        dense = np.eye(self.n, dtype=np.int8)
        dense[self._iu, self._ju] = self._su
        dense[self._ju, self._iu] = self._su
        return dense

    def csr(self):
        """Return ``(indptr, indices, signs)`` of the off-diagonal neighbours.

        Rows are in node order and neighbours within a row sorted by index.
        """
        if self._csr is None:
            rows = np.concatenate([self._iu, self._ju])
            cols = np.concatenate([self._ju, self._iu])
            signs = np.concatenate([self._su, self._su])
            order = np.lexsort((cols, rows))
            rows, cols, signs = rows[order], cols[order], signs[order]
            indptr = np.zeros(self.n + 1, dtype=np.int64)
            np.cumsum(np.bincount(rows, minlength=self.n), out=indptr[1:])
            for a in (indptr, cols, signs):
                a.setflags(write=False)
            self._csr = (indptr, cols, signs)
        return self._csr

    # -- derived quantities --------------------------------------------
    @property
    def m(self) -> int:
        """Number of signed edges (unordered pairs, self-loops excluded)."""
        return int(self._su.size)

    @property
    def m_r(self) -> int:
        """Number of repulsive edges."""
        return int(np.count_nonzero(self._su == -1))

    @property
    def m_a(self) -> int:
        return self.m - self.m_r

    def edges(self) -> list[tuple[int, int, int]]:
        """Edges as ``(i, j, sign)`` with ``i < j``, sorted."""
        return list(zip(self._iu.tolist(), self._ju.tolist(), self._su.tolist()))

    def upper(self):
        return self._iu, self._ju, self._su

    def neighbors(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        indptr, cols, signs = self.csr()
        lo, hi = indptr[i], indptr[i + 1]
        return cols[lo:hi], signs[lo:hi]

    def is_complete(self) -> bool:
        return self.m == self.n * (self.n - 1) // 2

    def with_groups(self, groups: GroupAssignment | None) -> "SignedGraph":
        if groups is not None and groups.n != self.n:
            raise DimensionMismatch(f"group assignment covers {groups.n} nodes, graph has {self.n}")
        return SignedGraph(self.n, self._iu, self._ju, self._su, groups)

    def __eq__(self, other):
        if not isinstance(other, SignedGraph):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self._iu, other._iu)
            and np.array_equal(self._ju, other._ju)
            and np.array_equal(self._su, other._su)
            and self.group_of == other.group_of
        )

    def __hash__(self):
        return hash((self.n, self._iu.tobytes(), self._ju.tobytes(), self._su.tobytes()))

    def __repr__(self):
        k = self.group_of.k if self.group_of is not None else None
        return f"SignedGraph(n={self.n}, m={self.m}, m_r={self.m_r}, groups={k})"


def build_signed_graph(
    n: int,
    signed_edges: Iterable[tuple[int, int, int]],
    groups: GroupAssignment | None = None,
) -> SignedGraph:
    """Build a graph from explicit ``(i, j, sign)`` triples.

    Repeating a pair with the same sign is harmless; repeating it with the
    opposite sign raises :class:`ConflictingEdgeSign`.
    """
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    seen: dict[tuple[int, int], int] = {}
    for i, j, s in signed_edges:
        i, j, s = int(i), int(j), int(s)
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"edge ({i}, {j}) outside 0..{n - 1}")
        if i == j:
            raise SelfLoopRejected(f"explicit self-loop on node {i}; the diagonal is implicit")
        if s not in (-1, 1):
            raise InvalidEdgeSign(f"edge ({i}, {j}) has sign {s}, expected -1 or +1")
        key = (min(i, j), max(i, j))
        prev = seen.setdefault(key, s)
        if prev != s:
            raise ConflictingEdgeSign(f"pair {key} listed with both signs")
    if seen:
        pairs = np.array(list(seen.keys()), dtype=np.int64)
        signs = np.array(list(seen.values()), dtype=np.int8)
        iu, ju = pairs[:, 0], pairs[:, 1]
    else:
        iu = ju = np.zeros(0, dtype=np.int64)
        signs = np.zeros(0, dtype=np.int8)
    if groups is not None and groups.n != n:
        raise DimensionMismatch(f"group assignment covers {groups.n} nodes, graph has {n}")
    return SignedGraph(n, iu, ju, signs, groups)


def _check_prob(name: str, p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise InvalidProbability(f"{name}={p} outside [0, 1]")
    return p


def _sample_upper(n, rng, prob_pos, prob_neg):
    """Sample A1 - A2 over the upper triangle, block of rows at a time.

    ``prob_pos(i, j)`` / ``prob_neg(i, j)`` give per-pair probabilities for
    the two underlying graphs. Within a block, all draws for A1 come before
    the draws for A2.
    """
    iu_parts, ju_parts, su_parts = [], [], []
    for start in range(0, n, _SAMPLE_BLOCK):
        stop = min(n, start + _SAMPLE_BLOCK)
        counts = n - 1 - np.arange(start, stop)
        total = int(counts.sum())
        if total == 0:
            continue
        i = np.repeat(np.arange(start, stop), counts)
        offsets = np.arange(total) - np.repeat(np.cumsum(counts) - counts, counts)
        j = i + 1 + offsets
        a1 = rng.random(total) < prob_pos(i, j)
        a2 = rng.random(total) < prob_neg(i, j)
        s = a1.astype(np.int8) - a2.astype(np.int8)
        keep = s != 0
        iu_parts.append(i[keep])
        ju_parts.append(j[keep])
        su_parts.append(s[keep])
    if not iu_parts:
        empty = np.zeros(0, dtype=np.int64)
        return empty, empty, np.zeros(0, dtype=np.int8)
    return np.concatenate(iu_parts), np.concatenate(ju_parts), np.concatenate(su_parts)


def generate_er_signed(n: int, p1: float, p2: float, rng: np.random.Generator) -> SignedGraph:
    """Signed Erdos-Renyi graph built as A1 - A2 with A1 ~ G(n, p1), A2 ~ G(n, p2).

    A pair drawn in both graphs cancels to a non-edge.
    """
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    p1 = _check_prob("p1", p1)
    p2 = _check_prob("p2", p2)
    iu, ju, su = _sample_upper(n, rng, lambda i, j: p1, lambda i, j: p2)
    return SignedGraph(n, iu, ju, su)


def generate_sbm_signed(
    n: int,
    k: int,
    p1: float,
    p2: float,
    rho: float,
    rng: np.random.Generator,
    groups: GroupAssignment | None = None,
) -> SignedGraph:
    """Signed stochastic block model.

    Same-group pairs use ``(p1, p2)``; cross-group pairs use
    ``(p1 * rho, p2 * rho)``. Groups default to the balanced contiguous
    partition.
    """
    if n < 1:
        raise InvalidParameter(f"n must be positive, got {n}")
    if k < 1 or k > n:
        raise InvalidGroupCount(f"need 1 <= k <= n, got k={k}, n={n}")
    p1 = _check_prob("p1", p1)
    p2 = _check_prob("p2", p2)
    rho = _check_prob("rho", rho)
    if groups is None:
        groups = GroupAssignment.balanced(n, k)
    elif groups.n != n or groups.k != k:
        raise DimensionMismatch("group assignment does not match (n, k)")
    g = groups.membership
    cross1, cross2 = p1 * rho, p2 * rho
    iu, ju, su = _sample_upper(
        n,
        rng,
        lambda i, j: np.where(g[i] == g[j], p1, cross1),
        lambda i, j: np.where(g[i] == g[j], p2, cross2),
    )
    return SignedGraph(n, iu, ju, su, groups)


def complete_signed(n: int, sign: int = -1) -> SignedGraph:
    """Complete graph with every edge carrying ``sign``."""
    iu, ju = np.triu_indices(n, 1)
    return SignedGraph(n, iu, ju, np.full(iu.size, sign, dtype=np.int8))


def receptivity_subgraph(graph: SignedGraph, state, c: float) -> SignedGraph:
    """Drop every edge whose endpoints are at least ``c`` apart in ``state``."""
    x = np.asarray(state, dtype=np.float64)
    if x.shape != (graph.n,):
        raise DimensionMismatch(f"state has shape {x.shape}, graph has {graph.n} nodes")
    if not c > 0:
        raise InvalidParameter(f"c must be positive, got {c}")
    iu, ju, su = graph.upper()
    keep = np.abs(x[ju] - x[iu]) < c
    return SignedGraph(graph.n, iu[keep], ju[keep], su[keep], graph.group_of)


def save_graph(graph: SignedGraph, path: str | PathLike) -> None:
    """Write the plain-text edge list.

    Layout: ``n=<int>``, optionally ``groups=<sizes>``, then ``i j sign``
    per edge with ``i < j``. Groups must be contiguous to be representable.
    """
    lines = [f"n={graph.n}"]
    if graph.group_of is not None:
        if not graph.group_of.is_contiguous():
            raise GraphFormatError("only contiguous group assignments can be saved")
        lines.append("groups=" + ",".join(str(int(s)) for s in graph.group_of.sizes()))
    lines.extend(f"{i} {j} {s}" for i, j, s in graph.edges())
    Path(path).write_text("\n".join(lines) + "\n")


def load_graph(path: str | PathLike) -> SignedGraph:
    path = Path(path)
    try:
        raw = path.read_text().splitlines()
    except OSError as exc:
        raise GraphFormatError(f"{path}: {exc.strerror or exc}") from exc
    lines = [ln.strip() for ln in raw if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines or not lines[0].startswith("n="):
        raise GraphFormatError(f"{path}: first line must be 'n=<int>'")
    try:
        n = int(lines[0][2:])
    except ValueError as exc:
        raise GraphFormatError(f"{path}: bad node count {lines[0]!r}") from exc
    body = lines[1:]
    groups = None
    if body and body[0].startswith("groups="):
        try:
            groups = GroupAssignment.from_sizes([int(s) for s in body[0][7:].split(",")])
        except ValueError as exc:
            raise GraphFormatError(f"{path}: bad groups line {body[0]!r}") from exc
        body = body[1:]
        if groups.n != n:
            raise GraphFormatError(f"{path}: group sizes sum to {groups.n}, expected {n}")
    triples = []
    for lineno, ln in enumerate(body, start=2):
        parts = ln.split()
        if len(parts) != 3:
            raise GraphFormatError(f"{path}: line {lineno}: expected 'i j sign', got {ln!r}")
        try:
            triples.append(tuple(int(p) for p in parts))
        except ValueError as exc:
            raise GraphFormatError(f"{path}: line {lineno}: non-integer field in {ln!r}") from exc
    return build_signed_graph(n, triples, groups)
