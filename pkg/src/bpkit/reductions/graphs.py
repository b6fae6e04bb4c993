"""Plain graph/digraph containers and the text format used by the reduction
commands: first line "V E", then one edge (or arc) per line, 1-indexed."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class SimpleGraph:
    """Undirected simple graph on vertices 0..vertex_count-1."""

    vertex_count: int
    edges: tuple[tuple[int, int], ...]

    def __init__(self, vertex_count: int, edges):
        norm = []
        seen = set()
        for a, b in edges:
            if a == b:
                raise GraphError(f"self-loop at vertex {a}")
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise GraphError(f"edge ({a},{b}) out of range")
            e = (min(a, b), max(a, b))
            if e in seen:
                raise GraphError(f"duplicate edge {e}")
            seen.add(e)
            norm.append(e)
        object.__setattr__(self, "vertex_count", vertex_count)
        object.__setattr__(self, "edges", tuple(sorted(norm)))

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for a, b in self.edges:
            deg[a] += 1
            deg[b] += 1
        return deg

    def is_cubic(self) -> bool:
        return all(d == 3 for d in self.degrees())

    def incident_edges(self) -> list[list[int]]:
        """For each vertex, indices of its incident edges in edge-index order."""
        inc: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for i, (a, b) in enumerate(self.edges):
            inc[a].append(i)
            inc[b].append(i)
        return inc

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return True
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for a, b in self.edges:
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.vertex_count


@dataclass(frozen=True)
class Digraph:
    """Directed graph; arcs are ordered pairs.  Parallel arcs are allowed by
    the container but rejected by the halving reduction."""

    vertex_count: int
    arcs: tuple[tuple[int, int], ...]

    def __init__(self, vertex_count: int, arcs):
        norm = []
        for a, b in arcs:
            if a == b:
                raise GraphError(f"self-loop at vertex {a}")
            if not (0 <= a < vertex_count and 0 <= b < vertex_count):
                raise GraphError(f"arc ({a},{b}) out of range")
            norm.append((a, b))
        object.__setattr__(self, "vertex_count", vertex_count)
        object.__setattr__(self, "arcs", tuple(norm))

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def out_degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for a, _ in self.arcs:
            deg[a] += 1
        return deg

    def in_degrees(self) -> list[int]:
        deg = [0] * self.vertex_count
        for _, b in self.arcs:
            deg[b] += 1
        return deg

    def has_parallel_arcs(self) -> bool:
        return len(set(self.arcs)) != len(self.arcs)

    def is_weakly_connected(self) -> bool:
        if self.vertex_count == 0:
            return True
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for a, b in self.arcs:
            adj[a].append(b)
            adj[b].append(a)
        seen = {0}
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        return len(seen) == self.vertex_count

    def eulerian_circuit(self) -> list[tuple[int, int]]:
        """Hierholzer's algorithm; requires in-degree == out-degree everywhere
        and weak connectivity.  Returns the circuit as an arc list."""
        if self.in_degrees() != self.out_degrees():
            raise GraphError("no Eulerian circuit: degrees are unbalanced")
        if not self.is_weakly_connected():
            raise GraphError("no Eulerian circuit: graph is not connected")
        return self._euler_walk(start=self.arcs[0][0] if self.arcs else 0)

    def eulerian_path(self, start: int, end: int) -> list[tuple[int, int]]:
        """Eulerian path from start to end (degrees must balance except at
        the endpoints)."""
        ind, outd = self.in_degrees(), self.out_degrees()
        for v in range(self.vertex_count):
            expect = (1 if v == start else 0) - (1 if v == end else 0)
            if outd[v] - ind[v] != expect:
                raise GraphError("no Eulerian path with these endpoints")
        if not self.is_weakly_connected():
            raise GraphError("no Eulerian path: graph is not connected")
        return self._euler_walk(start=start)

    def _euler_walk(self, start: int) -> list[tuple[int, int]]:
        succ: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for a, b in sorted(self.arcs):
            succ[a].append(b)
        for lst in succ:
            lst.reverse()  # pop() then yields successors in sorted order
        stack = [start]
        walk: list[int] = []
        while stack:
            v = stack[-1]
            if succ[v]:
                stack.append(succ[v].pop())
            else:
                walk.append(stack.pop())
        walk.reverse()
        if len(walk) != len(self.arcs) + 1:
            raise GraphError("graph has no Eulerian walk")
        return list(zip(walk, walk[1:]))


def _parse_pairs(text: str, directed: bool):
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    rows = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    if not rows:
        raise GraphError("empty graph file")
    header = rows[0][1].split()
    if len(header) != 2:
        raise GraphError(f"line {rows[0][0]}: expected 'V E' header")
    try:
        nv, ne = int(header[0]), int(header[1])
    except ValueError:
        raise GraphError(f"line {rows[0][0]}: bad header {rows[0][1]!r}") from None
    pairs = []
    for lineno, ln in rows[1:]:
        parts = ln.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v'")
        try:
            a, b = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: bad vertex id in {ln!r}") from None
        if not (1 <= a <= nv and 1 <= b <= nv):
            raise GraphError(f"line {lineno}: vertex out of range 1..{nv}")
        pairs.append((a - 1, b - 1))
    if len(pairs) != ne:
        raise GraphError(f"header announces {ne} edges, found {len(pairs)}")
    return nv, pairs


def parse_graph(text: str) -> SimpleGraph:
    nv, pairs = _parse_pairs(text, directed=False)
    return SimpleGraph(nv, pairs)


def parse_digraph(text: str) -> Digraph:
    nv, pairs = _parse_pairs(text, directed=True)
    return Digraph(nv, pairs)


def serialize_graph(g: SimpleGraph | Digraph) -> str:
    pairs = g.edges if isinstance(g, SimpleGraph) else g.arcs
    lines = [f"{g.vertex_count} {len(pairs)}"]
    lines += [f"{a + 1} {b + 1}" for a, b in pairs]
    return "\n".join(lines) + "\n"
