"""Maximum matching on general undirected graphs.

Two entry points back the solvers: a blossom (odd-cycle contracting) maximum
cardinality matcher compiled with numba, used on the unit-weight residual
graphs where almost all the work happens, and a maximum weight matcher for
small-integer weights delegated to networkx's blossom implementation.  An
exhaustive oracle covers both for small instances.

Edge weights are non-negative integers in half-units (true weight times two),
matching the half-unit score convention of the genome modules.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import networkx as nx
import numpy as np
from numba import njit

from bpkit.genomes import SizeBoundError


class MatchingError(ValueError):
    pass


class WeightedGraph:
    """Undirected graph with non-negative integer weights in half-units.

    Parallel edges are merged by summing their weights; zero-weight edges are
    dropped.  Self-loops are rejected.  Isolated vertices are allowed and
    simply stay unmatched.
    """

    __slots__ = ("vertex_count", "_u", "_v", "_w")

    def __init__(self, vertex_count: int, edges: Iterable[tuple[int, int, int]] = ()):
        if vertex_count < 0:
            raise MatchingError("vertex_count must be >= 0")
        self.vertex_count = vertex_count
        rows = list(edges)
        if not rows:
            self._u = np.empty(0, dtype=np.int64)
            self._v = np.empty(0, dtype=np.int64)
            self._w = np.empty(0, dtype=np.int64)
            return
        arr = np.asarray(rows, dtype=np.int64)
        u = np.minimum(arr[:, 0], arr[:, 1])
        v = np.maximum(arr[:, 0], arr[:, 1])
        w = arr[:, 2]
        if (arr[:, 0] == arr[:, 1]).any():
            raise MatchingError("self-loops are not allowed")
        if (u < 0).any() or (v >= vertex_count).any():
            raise MatchingError("vertex index out of range")
        if (w < 0).any():
            raise MatchingError("negative edge weight")
        key = u * vertex_count + v
        order = np.argsort(key, kind="stable")
        key, u, v, w = key[order], u[order], v[order], w[order]
        uniq, start = np.unique(key, return_index=True)
        sums = np.add.reduceat(w, start)
        u = u[start]
        v = v[start]
        keep = sums > 0
        self._u, self._v, self._w = u[keep], v[keep], sums[keep]

    @classmethod
    def from_arrays(cls, vertex_count: int, u, v, w) -> "WeightedGraph":
        g = cls(vertex_count)
        stacked = np.stack([np.asarray(u), np.asarray(v), np.asarray(w)], axis=1)
        return cls(vertex_count, stacked) if len(stacked) else g

    @property
    def edge_count(self) -> int:
        return len(self._w)

    def edges(self) -> list[tuple[int, int, int]]:
        return [(int(a), int(b), int(c)) for a, b, c in zip(self._u, self._v, self._w)]

    def edge_arrays(self):
        return self._u, self._v, self._w

    def weight_of(self, x: int, y: int) -> int:
        a, b = (x, y) if x < y else (y, x)
        lo = np.searchsorted(self._u * self.vertex_count + self._v, a * self.vertex_count + b)
        if lo < len(self._u) and self._u[lo] == a and self._v[lo] == b:
            return int(self._w[lo])
        return 0

    def __repr__(self):
        return f"<WeightedGraph V={self.vertex_count} E={self.edge_count}>"


@dataclass(frozen=True)
class Matching:
    """A set of vertex-disjoint edges with its total weight in half-units."""

    pairs: tuple[tuple[int, int], ...]
    weight_x2: int

    def __post_init__(self):
        seen = set()
        for a, b in self.pairs:
            if a == b or a in seen or b in seen:
                raise MatchingError("pairs are not vertex-disjoint")
            seen.add(a)
            seen.add(b)

    @property
    def size(self) -> int:
        return len(self.pairs)

    def vertex_set(self) -> set[int]:
        return {x for pair in self.pairs for x in pair}


def _as_matching(graph: WeightedGraph, pairs: Iterable[tuple[int, int]]) -> Matching:
    norm = tuple(sorted((min(a, b), max(a, b)) for a, b in pairs))
    weight = sum(graph.weight_of(a, b) for a, b in norm)
    return Matching(norm, weight)


# ---------------------------------------------------------------------------
# Maximum cardinality matching: blossom algorithm over CSR arrays
# ---------------------------------------------------------------------------

def _to_csr(n: int, u: np.ndarray, v: np.ndarray):
    src = np.concatenate([u, v]).astype(np.int64)
    dst = np.concatenate([v, u]).astype(np.int64)
    order = np.argsort(src, kind="stable")
    dst = dst[order].astype(np.int32)
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, dst


@njit(cache=True)
def _greedy_init(indptr, indices, match):
    """Karp-Sipser style initialization: apply the forced degree-1 rule where
    possible, otherwise match greedily in vertex order."""
    n = match.shape[0]
    deg = np.empty(n, dtype=np.int64)
    for v in range(n):
        deg[v] = indptr[v + 1] - indptr[v]
    stack = np.empty(n * 4, dtype=np.int64)
    top = 0
    for v in range(n):
        if deg[v] == 1:
            stack[top] = v
            top += 1
    cursor = 0
    while True:
        x = -1
        y = -1
        while top > 0:
            top -= 1
            v = stack[top]
            if match[v] != -1 or deg[v] != 1:
                continue
            for ei in range(indptr[v], indptr[v + 1]):
                u = indices[ei]
                if match[u] == -1:
                    x, y = v, u
                    break
            if x != -1:
                break
        if x == -1:
            while cursor < n:
                v = cursor
                cursor += 1
                if match[v] != -1:
                    continue
                for ei in range(indptr[v], indptr[v + 1]):
                    u = indices[ei]
                    if match[u] == -1:
                        x, y = v, u
                        break
                if x != -1:
                    break
            if x == -1:
                return
        match[x] = y
        match[y] = x
        for z in (x, y):
            for ei in range(indptr[z], indptr[z + 1]):
                u = indices[ei]
                if match[u] == -1:
                    deg[u] -= 1
                    if deg[u] == 1 and top < stack.shape[0]:
                        stack[top] = u
                        top += 1


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _blossom_augment(indptr, indices, match):
    """Augment a partial matching to maximum cardinality (Edmonds blossom).

    Per-root BFS with odd-cycle contraction through a union-find over blossom
    bases; all per-search state is rolled back through a touched list so that
    sparse searches stay proportional to the explored subgraph.
    """
    n = match.shape[0]
    p = np.full(n, -1, dtype=np.int32)
    parent = np.arange(n).astype(np.int32)  # union-find over bases
    used = np.zeros(n, dtype=np.uint8)
    lca_stamp = np.zeros(n, dtype=np.int64)
    q = np.empty(n, dtype=np.int32)
    touched = np.empty(3 * n + 16, dtype=np.int32)
    stamp = 0

    for root in range(n):
        if match[root] != -1 or indptr[root] == indptr[root + 1]:
            continue
        ntouch = 0
        qh = 0
        qt = 0
        used[root] = 1
        touched[ntouch] = root
        ntouch += 1
        q[qt] = root
        qt += 1
        aug = -1
        while qh < qt and aug == -1:
            v = q[qh]
            qh += 1
            for ei in range(indptr[v], indptr[v + 1]):
                to = indices[ei]
                if _find(parent, v) == _find(parent, to) or match[v] == to:
                    continue
                if to == root or (match[to] != -1 and p[match[to]] != -1):
                    # blossom between two outer vertices: find the LCA base
                    stamp += 1
                    a = _find(parent, v)
                    while True:
                        lca_stamp[a] = stamp
                        if match[a] == -1:
                            break
                        a = _find(parent, p[match[a]])
                    b = _find(parent, to)
                    while lca_stamp[b] != stamp:
                        b = _find(parent, p[match[b]])
                    curbase = b
                    # contract both paths into curbase
                    for side in range(2):
                        x = v if side == 0 else to
                        child = to if side == 0 else v
                        while _find(parent, x) != curbase:
                            bx = _find(parent, x)
                            mx = match[x]
                            bmx = _find(parent, mx)
                            parent[bx] = curbase
                            touched[ntouch] = bx
                            ntouch += 1
                            parent[bmx] = curbase
                            touched[ntouch] = bmx
                            ntouch += 1
                            if p[x] == -1:
                                touched[ntouch] = x
                                ntouch += 1
                            p[x] = child
                            if not used[mx]:
                                used[mx] = 1
                                touched[ntouch] = mx
                                ntouch += 1
                                q[qt] = mx
                                qt += 1
                            child = mx
                            x = p[mx]
                elif p[to] == -1:
                    p[to] = v
                    touched[ntouch] = to
                    ntouch += 1
                    if match[to] == -1:
                        aug = to
                        break
                    mt = match[to]
                    if not used[mt]:
                        used[mt] = 1
                        touched[ntouch] = mt
                        ntouch += 1
                        q[qt] = mt
                        qt += 1
        if aug != -1:
            u = aug
            while u != -1:
                pv = p[u]
                ppv = match[pv]
                match[u] = pv
                match[pv] = u
                u = ppv
        # roll back search state
        for i in range(ntouch):
            t = touched[i]
            used[t] = 0
            p[t] = -1
            parent[t] = t


def maximum_cardinality_pairs(n: int, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Maximum cardinality matching over edge arrays; returns the mate array
    (-1 for unmatched vertices)."""
    match = np.full(n, -1, dtype=np.int32)
    if len(u) == 0 or n == 0:
        return match
    indptr, indices = _to_csr(n, u, v)
    _greedy_init(indptr, indices, match)
    _blossom_augment(indptr, indices, match)
    return match


def max_cardinality_matching(graph: WeightedGraph) -> Matching:
    """A maximum cardinality matching of the underlying simple graph
    (weights ignored; reported weight is the weight of the chosen edges)."""
    u, v, _ = graph.edge_arrays()
    mate = maximum_cardinality_pairs(graph.vertex_count, u, v)
    pairs = [(int(x), int(mate[x])) for x in range(graph.vertex_count)
             if mate[x] > x]
    return _as_matching(graph, pairs)


# ---------------------------------------------------------------------------
# Maximum weight matching (small integer weights)
# ---------------------------------------------------------------------------

def max_weight_matching(graph: WeightedGraph) -> Matching:
    """A matching of maximum total weight (not necessarily maximum
    cardinality).

    Delegates to networkx's blossom implementation; weights are doubled so
    that every dual value stays integral and the result is exact.
    """
    g = nx.Graph()
    g.add_nodes_from(range(graph.vertex_count))
    for a, b, w in graph.edges():
        g.add_edge(a, b, weight=2 * w)
    mate = nx.max_weight_matching(g, maxcardinality=False, weight="weight")
    return _as_matching(graph, mate)


def brute_force_max_weight(graph: WeightedGraph, max_vertices: int = 16) -> Matching:
    """Exhaustive maximum weight matching; test oracle for small graphs."""
    if graph.vertex_count > max_vertices:
        raise SizeBoundError(
            f"brute force limited to {max_vertices} vertices, got {graph.vertex_count}")
    adj: list[list[tuple[int, int]]] = [[] for _ in range(graph.vertex_count)]
    for a, b, w in graph.edges():
        adj[a].append((b, w))
        adj[b].append((a, w))
    best_weight = -1
    best_pairs: list[tuple[int, int]] = []
    free = [True] * graph.vertex_count
    chosen: list[tuple[int, int]] = []

    def rec(v: int, weight: int):
        nonlocal best_weight, best_pairs
        while v < graph.vertex_count and not free[v]:
            v += 1
        if v >= graph.vertex_count:
            if weight > best_weight:
                best_weight = weight
                best_pairs = list(chosen)
            return
        # leave v unmatched
        free[v] = False
        rec(v + 1, weight)
        for b, w in adj[v]:
            if free[b]:
                free[b] = False
                chosen.append((v, b))
                rec(v + 1, weight + w)
                chosen.pop()
                free[b] = True
        free[v] = True

    rec(0, 0)
    return _as_matching(graph, best_pairs)


def brute_force_max_cardinality(graph: WeightedGraph, max_vertices: int = 16) -> Matching:
    """Exhaustive maximum cardinality matching (unit-weight oracle)."""
    unit = WeightedGraph(graph.vertex_count,
                         [(a, b, 1) for a, b, _ in graph.edges()])
    best = brute_force_max_weight(unit, max_vertices)
    return _as_matching(graph, best.pairs)
