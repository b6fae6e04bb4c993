"""Reduction from maximum matching in cubic graphs to the breakpoint median.

The input multigraph of a median instance is a union of three perfect
matchings, i.e. edge 3-colorable, which not every cubic graph is.  The
construction assigns the three colors to the edge ends at each vertex,
subdivides every edge whose two ends disagree (end colors preserved, the
middle edge takes the third color), then doubles the whole graph and hangs an
auxiliary double edge off every degree-2 vertex pair so all three color
classes become perfect matchings.  A maximum median of the three genomes
restricted to one copy is a maximum matching of the subdivided graph, and
contracting the subdivisions recovers a maximum matching of the input.
"""

from __future__ import annotations

from dataclasses import dataclass

from bpkit.genomes import Genome
from bpkit.reductions.graphs import GraphError, SimpleGraph


@dataclass(frozen=True)
class MedianReductionInstance:
    """Three genomes encoding a cubic matching instance, plus the recovery
    map from copy-1 vertices back to the original graph."""

    graph: SimpleGraph
    genomes: tuple[Genome, Genome, Genome]
    n_genes: int
    #: per original edge: ("direct", (x, y)) or ("subdiv", (x, u, v, y)),
    #: all in copy-1 vertex ids (originals keep their ids)
    edge_repr: tuple[tuple, ...]
    #: indices of subdivided edges
    subdivided: tuple[int, ...]
    #: extremities used per input edge (the strong-linearity slope)
    extremities_per_edge: float

    @property
    def extremity_count(self) -> int:
        return 2 * self.n_genes


def matching_to_median(g: SimpleGraph) -> MedianReductionInstance:
    """Build the 3-genome median instance of a cubic graph."""
    if not g.is_cubic():
        raise GraphError("matching-to-median reduction requires a cubic graph")
    nv = g.vertex_count
    # color the three edge ends at each vertex in edge-index order
    end_color: dict[tuple[int, int], int] = {}
    for v, inc in enumerate(g.incident_edges()):
        for c, ei in enumerate(inc):
            end_color[(v, ei)] = c

    colored: list[tuple[int, int, int]] = []  # (a, b, color) in copy-1 ids
    edge_repr: list[tuple] = []
    subdivided: list[int] = []
    next_vertex = nv
    for ei, (x, y) in enumerate(g.edges):
        cx, cy = end_color[(x, ei)], end_color[(y, ei)]
        if cx == cy:
            colored.append((x, y, cx))
            edge_repr.append(("direct", (x, y)))
        else:
            u, v = next_vertex, next_vertex + 1
            next_vertex += 2
            colored.append((x, u, cx))
            colored.append((u, v, 3 - cx - cy))
            colored.append((v, y, cy))
            edge_repr.append(("subdiv", (x, u, v, y)))
            subdivided.append(ei)

    n1 = next_vertex  # vertices of the subdivided graph
    deg = [0] * n1
    for a, b, _ in colored:
        deg[a] += 1
        deg[b] += 1
    low = [v for v in range(n1) if deg[v] == 2]
    assert all(deg[v] in (2, 3) for v in range(n1))

    # copy-2 vertex of w is w + n1; auxiliaries come after both copies
    classes: list[list[tuple[int, int]]] = [[], [], []]
    color_sum = [0] * n1
    for a, b, c in colored:
        classes[c].append((a, b))
        classes[c].append((a + n1, b + n1))
        color_sum[a] += c
        color_sum[b] += c
    base = 2 * n1
    for j, w in enumerate(low):
        missing = 3 - color_sum[w]
        aw, awp = base + 2 * j, base + 2 * j + 1
        classes[missing].append((w, aw))
        classes[missing].append((w + n1, awp))
        for c in range(3):
            if c != missing:
                classes[c].append((aw, awp))
    total_vertices = base + 2 * len(low)
    assert total_vertices % 2 == 0
    n_genes = total_vertices // 2
    genomes = tuple(Genome.from_adjacencies(n_genes, cls, (), "general").require_valid()
                    for cls in classes)
    return MedianReductionInstance(
        graph=g,
        genomes=genomes,
        n_genes=n_genes,
        edge_repr=tuple(edge_repr),
        subdivided=tuple(subdivided),
        extremities_per_edge=total_vertices / g.edge_count,
    )


def median_to_matching(inst: MedianReductionInstance, alpha: Genome) -> list[tuple[int, int]]:
    """Recover a matching of the original cubic graph from a median genome.

    A subdivided edge x-u-v-y counts as matched exactly when both outer
    pieces xu and vy are adjacencies of alpha.
    """
    if alpha.n != inst.n_genes:
        raise GraphError("alpha does not live on the instance universe")
    present = alpha.adjacency_set()

    def has(a, b):
        return (min(a, b), max(a, b)) in present

    matched = []
    for ei, repr_ in enumerate(inst.edge_repr):
        if repr_[0] == "direct":
            x, y = repr_[1]
            if has(x, y):
                matched.append(inst.graph.edges[ei])
        else:
            x, u, v, y = repr_[1]
            if has(x, u) and has(v, y):
                matched.append(inst.graph.edges[ei])
    used = set()
    for a, b in matched:
        if a in used or b in used:
            raise GraphError("decoded edges do not form a matching")
        used.add(a)
        used.add(b)
    return matched
