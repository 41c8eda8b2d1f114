"""Computable graphings of diameter 2 for ceers whose classes are all infinite.

A ceer is presented by an enumeration ``f(x, n)`` listing the class of ``x``
without repetitions.  Two numbers ``x < y`` are declared adjacent when they are
connected in the finite graph obtained by running ``f(z, 0..y)`` for every
``z < y``.  :func:`connect` produces the common neighbour of two equivalent
numbers, so every class is a connected component of diameter at most 2.
"""

from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .errors import BudgetExhausted, GraphableError, InternalContradiction
from .oracles import pair, unpair

__all__ = [
    "CeerEnumeration", "ModKCeer", "MergeScheduleCeer", "ScheduleError",
    "FiniteWitnessGraph", "EquivalenceCertificate",
    "adjacent", "witness_graph", "connect", "witness_equivalent",
    "mod_k_ceer", "merge_schedule_ceer", "random_merge_schedule", "ceer_from_descriptor",
    "enumeration_violations",
]


class ScheduleError(GraphableError, ValueError):
    """A merge schedule is malformed."""


class CeerEnumeration:
    """Enumeration ``f(x, n)`` of the class of ``x``, without duplicates."""

    def __init__(self, fn: Callable[[int, int], int], descriptor: dict | None = None):
        self._fn = fn
        self.descriptor = descriptor
        # witness graphs are pure functions of the enumeration; keep recent ones
        self._graphs: OrderedDict[int, "FiniteWitnessGraph"] = OrderedDict()
        self._graphs_lock = threading.Lock()

    def enumerate(self, x: int, n: int) -> int:
        return int(self._fn(x, n))

    __call__ = enumerate

    def column(self, x: int, stop: int) -> np.ndarray:
        """``f(x, 0), ..., f(x, stop - 1)`` as an int64 array."""
        return np.fromiter((self.enumerate(x, n) for n in range(stop)), dtype=np.int64,
                           count=stop)

    def __repr__(self):
        return f"{type(self).__name__}({self.descriptor})"


class ModKCeer(CeerEnumeration):
    """Congruence mod k.  Column x starts with x, then lists the rest of the
    class in increasing order."""

    def __init__(self, k: int):
        if k < 1:
            raise ValueError(f"k must be positive, got {k}")
        self.k = k
        super().__init__(self._value, {"kind": "mod-k", "seed": 0, "params": {"k": k}})

    def _value(self, x, n):
        if n == 0:
            return x
        v = x % self.k + self.k * (n - 1)
        return v + self.k if v >= x else v

    def column(self, x, stop):
        n = np.arange(stop, dtype=np.int64)
        v = x % self.k + self.k * (n - 1)
        v = np.where(v >= x, v + self.k, v)
        if stop:
            v[0] = x
        return v


class MergeScheduleCeer(CeerEnumeration):
    """Columns ``{<i, n> : n}`` glued together by a schedule of merges.

    ``schedule`` is a list of ``(stage, column_a, column_b)`` with
    non-decreasing stages.  The enumeration of ``x`` starts with ``x`` and then
    works stage by stage: at stage ``s`` the merges scheduled for stages
    ``<= s`` are applied, and every column currently glued to the column of
    ``x`` contributes its members ``<c, 0>, ..., <c, s>`` not yet listed.
    """

    def __init__(self, schedule: Sequence[Sequence[int]], descriptor: dict | None = None):
        entries = []
        last = -1
        for entry in schedule:
            if len(entry) != 3:
                raise ScheduleError(f"schedule entry {entry!r} is not (stage, a, b)")
            stage, a, b = (int(v) for v in entry)
            if min(stage, a, b) < 0:
                raise ScheduleError(f"negative value in schedule entry {entry!r}")
            if stage < last:
                raise ScheduleError(f"stages not monotone: {stage} after {last}")
            last = stage
            entries.append((stage, a, b))
        self.schedule = tuple(entries)
        self._lists: dict[int, list[int]] = {}
        self._state: dict[int, tuple] = {}
        self._groups: dict[tuple[int, int], list[int]] = {}
        self._lock = threading.Lock()
        if descriptor is None:
            descriptor = {"kind": "merge-schedule", "seed": 0,
                          "params": {"schedule": [list(e) for e in entries]}}
        super().__init__(self._value, descriptor)

    def _group(self, column: int, stage: int) -> list[int]:
        applied = sum(1 for s, _, _ in self.schedule if s <= stage)
        key = (column, applied)
        if key not in self._groups:
            self._groups[key] = self._compute_group(column, stage)
        return self._groups[key]

    def _compute_group(self, column: int, stage: int) -> list[int]:
        parent: dict[int, int] = {}

        def find(c):
            while parent.get(c, c) != c:
                c = parent[c]
            return c

        nodes = {column}
        for s, a, b in self.schedule:
            if s > stage:
                break
            nodes |= {a, b}
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        root = find(column)
        return sorted(c for c in nodes if find(c) == root)

    def _extend(self, x: int, length: int) -> list[int]:
        with self._lock:
            if x not in self._lists:
                self._lists[x] = [x]
                self._state[x] = (0, {x}, {})
            out = self._lists[x]
            stage, seen, upto = self._state[x]
            home = unpair(x)[0]
            while len(out) < length:
                for c in self._group(home, stage):
                    start = upto.get(c, 0)
                    for m in range(start, stage + 1):
                        e = pair(c, m)
                        if e not in seen:
                            seen.add(e)
                            out.append(e)
                    upto[c] = stage + 1
                stage += 1
            self._state[x] = (stage, seen, upto)
            return out

    def _value(self, x, n):
        return self._extend(x, n + 1)[n]

    def column(self, x, stop):
        return np.asarray(self._extend(x, stop)[:stop], dtype=np.int64)

    def class_columns(self, x: int) -> list[int]:
        """Columns making up the final class of ``x``."""
        last = self.schedule[-1][0] if self.schedule else 0
        return self._group(unpair(x)[0], last)


def mod_k_ceer(k: int) -> ModKCeer:
    return ModKCeer(k)


def merge_schedule_ceer(schedule: Sequence[Sequence[int]]) -> MergeScheduleCeer:
    return MergeScheduleCeer(schedule)


def random_merge_schedule(seed: int, columns: int = 6, merges: int = 3,
                          max_stage: int = 12) -> MergeScheduleCeer:
    """Seeded schedule merging random pairs among the first ``columns`` columns."""
    rng = np.random.default_rng(seed)
    stages = np.sort(rng.integers(0, max_stage + 1, size=merges))
    entries = []
    for s in stages:
        a, b = rng.choice(columns, size=2, replace=False)
        entries.append((int(s), int(a), int(b)))
    desc = {"kind": "random-merge", "seed": seed,
            "params": {"columns": columns, "merges": merges, "max_stage": max_stage}}
    return MergeScheduleCeer(entries, desc)


def ceer_from_descriptor(desc: dict) -> CeerEnumeration:
    kind = desc.get("kind")
    params = desc.get("params", {}) or {}
    if kind == "mod-k":
        return mod_k_ceer(int(params["k"]))
    if kind == "merge-schedule":
        return merge_schedule_ceer(params.get("schedule", []))
    if kind == "random-merge":
        return random_merge_schedule(int(desc.get("seed", 0)), **params)
    raise ValueError(f"unknown ceer kind {kind!r}")


# ---------------------------------------------------------------------------
# certificates

@dataclass(frozen=True)
class EquivalenceCertificate:
    """Chain of ``(column, index)`` steps leading from ``x`` to ``y``.

    Each step names one enumeration fact ``f(column, index) = v``; the walk
    moves from ``column`` to ``v`` or from ``v`` back to ``column``.
    """
    x: int
    y: int
    chain: tuple[tuple[int, int], ...]

    def replay(self, ceer: CeerEnumeration) -> bool:
        current = self.x
        for column, index in self.chain:
            v = ceer(column, index)
            if current == column:
                current = v
            elif current == v:
                current = column
            else:
                return False
        return current == self.y

    def reversed(self) -> "EquivalenceCertificate":
        return EquivalenceCertificate(self.y, self.x, tuple(reversed(self.chain)))

    def compose(self, other: "EquivalenceCertificate") -> "EquivalenceCertificate":
        if self.y != other.x:
            raise ValueError(f"cannot compose {self.x}~{self.y} with {other.x}~{other.y}")
        return EquivalenceCertificate(self.x, other.y, self.chain + other.chain)

    def to_json(self) -> dict:
        return {"x": self.x, "y": self.y, "chain": [list(step) for step in self.chain]}


def witness_equivalent(ceer: CeerEnumeration, x: int, y: int, budget: int):
    """Look for ``y`` among ``f(x, 0), ..., f(x, budget - 1)``.

    Returns an :class:`EquivalenceCertificate`, or ``None`` when nothing was
    found (which says nothing about inequivalence).
    """
    if budget <= 0:
        return None
    hits = np.flatnonzero(ceer.column(x, budget) == y)
    if hits.size == 0:
        return None
    return EquivalenceCertificate(x, y, ((x, int(hits[0])),))


# ---------------------------------------------------------------------------
# the finite witness graph

@dataclass
class FiniteWitnessGraph:
    """Finite subgraph of the ceer seen while deciding one adjacency.

    Edge ``i`` joins ``source[i]`` and ``target[i]`` because
    ``f(source[i], index[i]) = target[i]``.
    """
    vertices: np.ndarray
    source: np.ndarray
    index: np.ndarray
    target: np.ndarray
    _labels: np.ndarray | None = field(default=None, repr=False)
    _provenance: dict | None = field(default=None, repr=False)

    @property
    def edges(self) -> set[frozenset]:
        return {frozenset((int(u), int(v))) for u, v in zip(self.source, self.target)}

    def provenance(self) -> dict[frozenset, tuple[int, int]]:
        """Maps each edge to the ``(column, index)`` fact that produced it."""
        if self._provenance is None:
            self._provenance = {frozenset((u, v)): (u, n) for u, n, v in
                                zip(self.source.tolist(), self.index.tolist(), self.target.tolist())}
        return self._provenance

    def _pos(self, v):
        return np.searchsorted(self.vertices, v)

    def __contains__(self, v) -> bool:
        i = self._pos(v)
        return bool(i < len(self.vertices) and self.vertices[i] == v)

    def _matrix(self):
        n = len(self.vertices)
        rows, cols = self._pos(self.source), self._pos(self.target)
        return coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(n, n)).tocsr()

    def connected(self, a: int, b: int) -> bool:
        if a not in self or b not in self:
            return False
        if self._labels is None:
            _, self._labels = connected_components(self._matrix(), directed=False)
        return bool(self._labels[self._pos(a)] == self._labels[self._pos(b)])

    def path(self, a: int, b: int) -> list[int] | None:
        """Shortest path from ``a`` to ``b`` inside the graph, if any."""
        if not self.connected(a, b):
            return None
        m = self._matrix()
        _, pred = breadth_first_order(m + m.T, self._pos(a), directed=True,
                                      return_predecessors=True)
        walk = [int(self._pos(b))]
        while walk[-1] != self._pos(a):
            walk.append(int(pred[walk[-1]]))
        return [int(self.vertices[i]) for i in reversed(walk)]

    def _fact(self, u: int, v: int) -> tuple[int, int]:
        hit = np.flatnonzero(((self.source == u) & (self.target == v))
                             | ((self.source == v) & (self.target == u)))
        return int(self.source[hit[0]]), int(self.index[hit[0]])

    def certificate(self, a: int, b: int) -> EquivalenceCertificate | None:
        """Certificate for ``a ~ b`` assembled from edge provenance."""
        walk = self.path(a, b)
        if walk is None:
            return None
        chain = tuple(self._fact(u, v) for u, v in zip(walk, walk[1:]))
        return EquivalenceCertificate(a, b, chain)

    def to_dot(self, name: str = "witness") -> str:
        lines = [f"graph {name} {{"]
        for v in self.vertices:
            lines.append(f"  {int(v)};")
        for u, n, v in zip(self.source, self.index, self.target):
            lines.append(f'  {int(u)} -- {int(v)} [label="f({int(u)},{int(n)})"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_json(self) -> dict:
        return {"vertices": self.vertices.tolist(),
                "edges": [[int(u), int(v), int(n)] for u, n, v
                          in zip(self.source, self.index, self.target)]}


_GRAPH_CACHE_SIZE = 64


def witness_graph(ceer: CeerEnumeration, y: int) -> FiniteWitnessGraph:
    """Graph from ``f(z, 0..y)`` for all ``z < y``, loops and repeated edges dropped."""
    with ceer._graphs_lock:
        if y in ceer._graphs:
            ceer._graphs.move_to_end(y)
            return ceer._graphs[y]
    graph = _build_witness_graph(ceer, y)
    with ceer._graphs_lock:
        ceer._graphs[y] = graph
        while len(ceer._graphs) > _GRAPH_CACHE_SIZE:
            ceer._graphs.popitem(last=False)
    return graph


def _build_witness_graph(ceer: CeerEnumeration, y: int) -> FiniteWitnessGraph:
    if y <= 0:
        empty = np.zeros(0, dtype=np.int64)
        return FiniteWitnessGraph(empty, empty, empty, empty)
    cols = np.stack([ceer.column(z, y + 1) for z in range(y)])
    src = np.repeat(np.arange(y, dtype=np.int64), y + 1)
    idx = np.tile(np.arange(y + 1, dtype=np.int64), y)
    dst = cols.ravel()
    keep = dst != src
    src, idx, dst = src[keep], idx[keep], dst[keep]
    # first occurrence (in (source, index) order) of each unordered edge
    lo, hi = np.minimum(src, dst), np.maximum(src, dst)
    _, first = np.unique(lo * (int(hi.max()) + 1) + hi if len(hi) else hi, return_index=True)
    first.sort()
    src, idx, dst = src[first], idx[first], dst[first]
    vertices = np.union1d(np.arange(y, dtype=np.int64), dst)
    return FiniteWitnessGraph(vertices, src, idx, dst)


def adjacent(ceer: CeerEnumeration, x: int, y: int) -> tuple[bool, FiniteWitnessGraph]:
    """Decide adjacency of ``x != y`` in the computable graphing."""
    if x == y:
        raise ValueError("the graphing has no loops; adjacent() needs x != y")
    if min(x, y) < 0:
        raise ValueError("arguments must be natural numbers")
    lo, hi = min(x, y), max(x, y)
    graph = witness_graph(ceer, hi)
    return graph.connected(lo, hi), graph


def connect(ceer: CeerEnumeration, x: int, y: int, budget: int) -> int:
    """Common neighbour ``z`` of two equivalent numbers ``x != y``.

    Raises :class:`BudgetExhausted` when ``y`` does not show up among the
    first ``budget`` entries of column ``x``.
    """
    if x == y:
        raise ValueError("connect() needs x != y")
    cert = witness_equivalent(ceer, x, y, budget)
    if cert is None:
        raise BudgetExhausted(f"{y} not enumerated by column {x} within {budget} steps")
    found_at = cert.chain[0][1]
    bound = max(found_at + 1, x + 1, y + 1)
    # everything listed before z is <= bound, so z sits at index <= bound + 1
    col = ceer.column(x, bound + 2)
    above = np.flatnonzero(col > bound)
    if above.size == 0:
        raise InternalContradiction(
            f"column {x} has no value above {bound} among its first {bound + 2} entries; "
            "the enumeration repeats values or the class is finite")
    z = int(col[above[0]])
    for w in (x, y):
        ok, _ = adjacent(ceer, w, z)
        if not ok:
            raise InternalContradiction(f"{w} and {z} are not adjacent")
    return z


def enumeration_violations(ceer: CeerEnumeration, columns: int, indices: int,
                           search: int | None = None) -> list[dict]:
    """Check the enumeration contract on a finite window.

    Looks for duplicates in columns ``< columns`` among indices ``< indices``,
    for ``f(x, 0) != x``, and for values ``y = f(x, n)`` whose own column does
    not list ``x`` within ``search`` entries.
    """
    search = indices if search is None else search
    bad = []
    for x in range(columns):
        col = ceer.column(x, indices)
        if len(np.unique(col)) != len(col):
            bad.append({"column": x, "problem": "duplicate"})
        if indices and col[0] != x:
            bad.append({"column": x, "problem": "self-membership"})
        for y in col[:min(indices, 8)]:
            if witness_equivalent(ceer, int(y), x, search) is None:
                bad.append({"column": x, "problem": "coherence", "value": int(y)})
    return bad
