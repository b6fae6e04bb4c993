"""Reduction from cubic max-cut to the breakpoint quartet problem.

For every graph vertex there is a vertex gadget: a 12-extremity cycle
alternating between the red matching (pi1) and the green matching (pi2),
carrying three ports (corner-middle-corner triples separated by intermediate
extremities) where the three incident edges attach.  For every graph edge
there is an edge gadget: four ladder extremities whose blue cycle (pi3/pi4)
runs through both attached ports, two red-green double rungs, one red-green
auxiliary double edge, and two blue auxiliary double edges that also finish
the matchings over the intermediates.

With ancestors in normal form the red/green choice at each vertex gadget is
a cut coloring: the first ancestor's side contributes 6 per vertex gadget
plus 6 per edge gadget, the second ancestor's side 9 per edge gadget, and
the ancestors share 1 adjacency in an edge gadget whose endpoints got the
same color but 2 when the colors differ, so the score is 20m + cut size.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field

from bpkit.genomes import Genome, SizeBoundError
from bpkit.phylogeny import quartet_score
from bpkit.reductions.graphs import GraphError, SimpleGraph

RED, GREEN = "red", "green"


def _pair(a: int, b: int) -> tuple[int, int]:
    return (a, b) if a < b else (b, a)


@dataclass(frozen=True)
class QuartetInstance:
    """Four genomes encoding a cubic max-cut instance, with the gadget
    annotations needed by the encoder, decoder, normalizer and verifier."""

    graph: SimpleGraph
    genomes: tuple[Genome, Genome, Genome, Genome]
    n_genes: int
    #: incident edge index per (vertex, port slot)
    port_edge: tuple[tuple[int, int, int], ...]
    #: port slot of each edge at its two endpoints
    edge_slots: tuple[tuple[int, int], ...]

    # ----- extremity layout ------------------------------------------------

    @property
    def m(self) -> int:
        return self.graph.edge_count

    @property
    def offset_x2(self) -> int:
        """Twice the constant score offset (20m)."""
        return 40 * self.m

    def vertex_base(self, u: int) -> int:
        return 12 * u

    def edge_base(self, i: int) -> int:
        return 12 * self.graph.vertex_count + 6 * i

    def corner_a(self, u: int, j: int) -> int:
        return 12 * u + 4 * j

    def middle(self, u: int, j: int) -> int:
        return 12 * u + 4 * j + 1

    def corner_b(self, u: int, j: int) -> int:
        return 12 * u + 4 * j + 2

    def intermediate(self, u: int, j: int) -> int:
        return 12 * u + 4 * j + 3

    def ladder(self, i: int) -> tuple[int, int, int, int]:
        base = self.edge_base(i)
        return base, base + 1, base + 2, base + 3  # La, Lb, Lc, Ld

    def aux(self, i: int) -> tuple[int, int]:
        base = self.edge_base(i)
        return base + 4, base + 5  # T1, T2

    # ----- extremity classes ------------------------------------------------

    def class_sets(self) -> dict[str, frozenset[int]]:
        nv = self.graph.vertex_count
        corners, middles, inters = set(), set(), set()
        for u in range(nv):
            for j in range(3):
                corners.add(self.corner_a(u, j))
                corners.add(self.corner_b(u, j))
                middles.add(self.middle(u, j))
                inters.add(self.intermediate(u, j))
        lads, auxs = set(), set()
        for i in range(self.m):
            lads.update(self.ladder(i))
            auxs.update(self.aux(i))
        return {
            "C": frozenset(corners),
            "M": frozenset(middles),
            "I": frozenset(inters),
            "L": frozenset(lads),
            "A": frozenset(auxs),
        }

    # ----- structured adjacency families ------------------------------------

    def red_port_pair(self, u: int, j: int) -> tuple[int, int]:
        return _pair(self.corner_a(u, j), self.middle(u, j))

    def green_port_pair(self, u: int, j: int) -> tuple[int, int]:
        return _pair(self.middle(u, j), self.corner_b(u, j))

    def vertex_class_pairs(self, u: int, color: str) -> list[tuple[int, int]]:
        """The six pi1 (red) or pi2 (green) adjacencies of a vertex gadget."""
        pairs = []
        for j in range(3):
            if color == RED:
                pairs.append(self.red_port_pair(u, j))
                pairs.append(_pair(self.corner_b(u, j), self.intermediate(u, j)))
            else:
                pairs.append(self.green_port_pair(u, j))
                pairs.append(_pair(self.intermediate(u, j), self.corner_a(u, (j + 1) % 3)))
        return pairs

    def rung_pairs(self, i: int) -> list[tuple[int, int]]:
        la, lb, lc, ld = self.ladder(i)
        return [_pair(la, lb), _pair(lc, ld)]

    def aux_redgreen_pair(self, i: int) -> tuple[int, int]:
        t1, t2 = self.aux(i)
        return _pair(t1, t2)

    def aux_blue_pairs(self, i: int) -> list[tuple[int, int]]:
        (u, v) = self.graph.edges[i]
        ju, jv = self.edge_slots[i]
        t1, t2 = self.aux(i)
        return [_pair(t1, self.intermediate(u, ju)),
                _pair(t2, self.intermediate(v, jv))]

    def edge_gadget_ports(self, i: int):
        """((a, m1, b), (c, m2, d)) port extremities at the two endpoints."""
        (u, v) = self.graph.edges[i]
        ju, jv = self.edge_slots[i]
        return ((self.corner_a(u, ju), self.middle(u, ju), self.corner_b(u, ju)),
                (self.corner_a(v, jv), self.middle(v, jv), self.corner_b(v, jv)))

    def blue_class_pairs(self, i: int, cls: str) -> list[tuple[int, int]]:
        """The five pi3 ("X") or pi4 ("Y") adjacencies of an edge gadget."""
        (a, m1, b), (c, m2, d) = self.edge_gadget_ports(i)
        la, lb, lc, ld = self.ladder(i)
        if cls == "X":
            return [_pair(a, m1), _pair(b, lb), _pair(lc, c), _pair(m2, d), _pair(ld, la)]
        return [_pair(m1, b), _pair(lb, lc), _pair(c, m2), _pair(d, ld), _pair(la, a)]

    def blue_cycle_vertices(self, i: int) -> list[int]:
        (a, m1, b), (c, m2, d) = self.edge_gadget_ports(i)
        la, lb, lc, ld = self.ladder(i)
        return [a, m1, b, lb, lc, c, m2, d, ld, la]

    def middle_rail_partner(self, ell: int) -> int:
        """The other end of a ladder extremity's middle rail (La-Ld, Lb-Lc)."""
        base = ell - (ell - 12 * self.graph.vertex_count) % 6
        la, lb, lc, ld = base, base + 1, base + 2, base + 3
        return {la: ld, ld: la, lb: lc, lc: lb}[ell]

    def rung_partner(self, ell: int) -> int:
        base = ell - (ell - 12 * self.graph.vertex_count) % 6
        la, lb, lc, ld = base, base + 1, base + 2, base + 3
        return {la: lb, lb: la, lc: ld, ld: lc}[ell]

    def edge_of_extremity(self, ext: int) -> int:
        """Edge-gadget index owning a ladder/aux extremity."""
        nv12 = 12 * self.graph.vertex_count
        if ext < nv12:
            raise GraphError(f"extremity {ext} is not in an edge gadget")
        return (ext - nv12) // 6

    def port_of_extremity(self, ext: int) -> tuple[int, int] | None:
        """(vertex, slot) if the extremity is a corner or middle, else None."""
        if ext >= 12 * self.graph.vertex_count:
            return None
        u, r = divmod(ext, 12)
        j, pos = divmod(r, 4)
        return (u, j) if pos in (0, 1, 2) else None


def maxcut_to_quartet(g: SimpleGraph) -> QuartetInstance:
    """Build the four-genome quartet instance of a connected cubic graph."""
    if not g.is_cubic():
        raise GraphError("maxcut-to-quartet reduction requires a cubic graph")
    if not g.is_connected():
        raise GraphError("maxcut-to-quartet reduction requires a connected graph")
    nv = g.vertex_count
    m = g.edge_count
    inc = g.incident_edges()
    port_edge = tuple(tuple(inc[u]) for u in range(nv))
    slot_of: dict[tuple[int, int], int] = {}
    for u in range(nv):
        for j, ei in enumerate(inc[u]):
            slot_of[(u, ei)] = j
    edge_slots = tuple((slot_of[(a, ei)], slot_of[(b, ei)])
                       for ei, (a, b) in enumerate(g.edges))
    total = 12 * nv + 6 * m
    inst = QuartetInstance(
        graph=g,
        genomes=(None, None, None, None),  # filled below
        n_genes=total // 2,
        port_edge=port_edge,
        edge_slots=edge_slots,
    )
    pi1, pi2, pi3, pi4 = [], [], [], []
    for u in range(nv):
        pi1 += inst.vertex_class_pairs(u, RED)
        pi2 += inst.vertex_class_pairs(u, GREEN)
    for i in range(m):
        rungs = inst.rung_pairs(i)
        aux_rg = inst.aux_redgreen_pair(i)
        pi1 += rungs + [aux_rg]
        pi2 += rungs + [aux_rg]
        blues = inst.aux_blue_pairs(i)
        pi3 += inst.blue_class_pairs(i, "X") + blues
        pi4 += inst.blue_class_pairs(i, "Y") + blues
    n = total // 2
    genomes = tuple(Genome.from_adjacencies(n, pairs, (), "general").require_valid()
                    for pairs in (pi1, pi2, pi3, pi4))
    object.__setattr__(inst, "genomes", genomes)
    return inst


def _normalize_coloring(inst: QuartetInstance, coloring) -> list[str]:
    nv = inst.graph.vertex_count
    if isinstance(coloring, dict):
        colors = [coloring[u] for u in range(nv)]
    else:
        colors = list(coloring)
    if len(colors) != nv:
        raise GraphError("coloring must cover every vertex")
    out = []
    for c in colors:
        if c in (RED, 0, False):
            out.append(RED)
        elif c in (GREEN, 1, True):
            out.append(GREEN)
        else:
            raise GraphError(f"bad color {c!r}")
    return out


def cut_size(g: SimpleGraph, colors) -> int:
    """Number of bichromatic edges under a color list/dict."""
    if isinstance(colors, dict):
        colors = [colors[u] for u in range(g.vertex_count)]
    return sum(1 for a, b in g.edges if colors[a] != colors[b])


def encode_cut(inst: QuartetInstance, coloring) -> tuple[Genome, Genome]:
    """Ancestors in normal form realizing a coloring: alpha1 takes each
    vertex gadget's color class plus all rungs and red-green auxiliaries;
    alpha2 takes the blue auxiliaries plus, per edge gadget, the blue class
    with the larger overlap against alpha1 (ties to X)."""
    colors = _normalize_coloring(inst, coloring)
    a1 = []
    for u in range(inst.graph.vertex_count):
        a1 += inst.vertex_class_pairs(u, colors[u])
    for i in range(inst.m):
        a1 += inst.rung_pairs(i)
        a1.append(inst.aux_redgreen_pair(i))
    a1_set = set(a1)
    a2 = []
    for i in range(inst.m):
        a2 += inst.aux_blue_pairs(i)
        x = inst.blue_class_pairs(i, "X")
        y = inst.blue_class_pairs(i, "Y")
        ox = sum(1 for p in x if p in a1_set)
        oy = sum(1 for p in y if p in a1_set)
        a2 += x if ox >= oy else y
    alpha1 = Genome.from_adjacencies(inst.n_genes, a1, (), "general")
    alpha2 = Genome.from_adjacencies(inst.n_genes, a2, (), "general")
    return alpha1, alpha2


def decode_solution(inst: QuartetInstance, alpha1: Genome) -> dict[int, str]:
    """Majority vote over the three port edges of each vertex gadget;
    a tie (including no evidence at all) goes to red."""
    if alpha1.n != inst.n_genes:
        raise GraphError("alpha1 does not live on the instance universe")
    present = alpha1.adjacency_set()
    colors = {}
    for u in range(inst.graph.vertex_count):
        red = green = 0
        for j in range(3):
            if inst.red_port_pair(u, j) in present:
                red += 1
            elif inst.green_port_pair(u, j) in present:
                green += 1
        colors[u] = RED if red >= green else GREEN
    return colors


def score_encoded(inst: QuartetInstance, a1: Genome, a2: Genome) -> int:
    p1, p2, p3, p4 = inst.genomes
    return quartet_score(p1, p2, p3, p4, a1, a2)


# ---------------------------------------------------------------------------
# Verification
# ---------------------------------------------------------------------------

@dataclass
class VerifyReport:
    ok: bool
    failures: list[str] = field(default_factory=list)
    colorings_checked: int = 0
    max_encode_score_x2: int | None = None
    per_vertex_alpha1: dict | None = None
    per_edge_alpha1: dict | None = None
    per_edge_alpha2: dict | None = None

    def fail(self, msg: str):
        self.ok = False
        self.failures.append(msg)


def _port_pair_edge_map(inst: QuartetInstance) -> dict[tuple[int, int], int]:
    out = {}
    for i in range(inst.m):
        (a, m1, b), (c, m2, d) = inst.edge_gadget_ports(i)
        out[_pair(a, m1)] = i
        out[_pair(m1, b)] = i
        out[_pair(c, m2)] = i
        out[_pair(m2, d)] = i
    return out


def _owned_side_counts(inst: QuartetInstance, alpha: Genome, first_pair: bool):
    """Per-gadget raw contribution of alpha against (pi1,pi2) or (pi3,pi4).

    On the first-ancestor side a port edge is a vertex-gadget adjacency; on
    the second-ancestor side the parallel blue edge belongs to the edge
    gadget whose cycle runs through the port.
    """
    g1, g2 = (inst.genomes[0], inst.genomes[1]) if first_pair else (inst.genomes[2], inst.genomes[3])
    s1, s2 = g1.adjacency_set(), g2.adjacency_set()
    nv = inst.graph.vertex_count
    vertex = {u: 0 for u in range(nv)}
    edge = {i: 0 for i in range(inst.m)}
    stray = 0
    nv12 = 12 * nv
    ports = None if first_pair else _port_pair_edge_map(inst)
    for p in alpha.adjacencies():
        w = (p in s1) + (p in s2)
        if not w:
            continue
        a, b = p
        if a >= nv12 or b >= nv12:
            edge[inst.edge_of_extremity(a if a >= nv12 else b)] += w
        elif ports is not None and p in ports:
            edge[ports[p]] += w
        elif a // 12 == b // 12:
            vertex[a // 12] += w
        else:
            stray += w
    return vertex, edge, stray


def _edge_overlaps(inst: QuartetInstance, a1: Genome, a2: Genome):
    common = a1.adjacency_set() & a2.adjacency_set()
    per_edge = {i: 0 for i in range(inst.m)}
    stray = []
    port_to_edge = _port_pair_edge_map(inst)
    for p in common:
        if p in port_to_edge:
            per_edge[port_to_edge[p]] += 1
        else:
            stray.append(p)
    return per_edge, stray


def verify_instance(inst: QuartetInstance, exhaustive: bool | None = None,
                    samples: int = 1000, seed: int = 0) -> VerifyReport:
    """Check every structural invariant and the score accounting identities,
    over all colorings when the graph is small (or exhaustive is forced),
    else over sampled colorings."""
    report = VerifyReport(ok=True)
    g = inst.graph
    nv = g.vertex_count
    classes = inst.class_sets()

    universe = set(range(2 * inst.n_genes))
    union = set().union(*classes.values())
    if union != universe:
        report.fail("extremity classes do not cover the universe")
    if sum(len(s) for s in classes.values()) != len(universe):
        report.fail("extremity classes overlap")

    from bpkit.genomes import validate as validate_genome

    for idx, genome in enumerate(inst.genomes, start=1):
        for problem in validate_genome(genome):
            report.fail(f"pi{idx}: {problem}")
        if genome.telomeres():
            report.fail(f"pi{idx} has telomeres")
        if genome.n != inst.n_genes:
            report.fail(f"pi{idx} gene count mismatch")

    p1, p2, p3, p4 = (g_.adjacency_set() for g_ in inst.genomes)
    rg_doubles = set()
    blue_doubles = set()
    for i in range(inst.m):
        rg_doubles.update(inst.rung_pairs(i))
        rg_doubles.add(inst.aux_redgreen_pair(i))
        blue_doubles.update(inst.aux_blue_pairs(i))
    if p1 & p2 != rg_doubles:
        report.fail("pi1 and pi2 share edges other than rungs and red-green auxiliaries")
    if p3 & p4 != blue_doubles:
        report.fail("pi3 and pi4 share edges other than blue auxiliaries")

    for i in range(inst.m):
        cyc = inst.blue_cycle_vertices(i)
        cls = classes
        for j, ext in enumerate(cyc):
            want_port = j in (0, 1, 2, 5, 6, 7)
            if want_port and ext not in cls["C"] | cls["M"]:
                report.fail(f"edge gadget {i}: blue cycle position {j} is not a port extremity")
            if not want_port and ext not in cls["L"]:
                report.fail(f"edge gadget {i}: blue cycle position {j} is not a ladder extremity")

    # accounting identities over colorings
    if exhaustive is None:
        exhaustive = nv <= 8
    if exhaustive:
        colorings = itertools.product((RED, GREEN), repeat=nv)
        total = 2 ** nv
    else:
        rng = random.Random(seed)
        colorings = ([rng.choice((RED, GREEN)) for _ in range(nv)]
                     for _ in range(samples))
        total = samples

    best = None
    last_tables = None
    for colors in colorings:
        colors = list(colors)
        a1, a2 = encode_cut(inst, colors)
        c = sum(1 for a, b in g.edges if colors[a] != colors[b])
        score = score_encoded(inst, a1, a2)
        report.colorings_checked += 1
        if score != inst.offset_x2 + 2 * c:
            report.fail(f"coloring {colors}: score {score} != 20m + c = {inst.offset_x2 + 2 * c} (x2)")
            break
        vert1, edge1, stray1 = _owned_side_counts(inst, a1, first_pair=True)
        _, edge2, stray2 = _owned_side_counts(inst, a2, first_pair=False)
        overlaps, stray_common = _edge_overlaps(inst, a1, a2)
        bad = None
        if stray1 or stray2:
            bad = "cross-gadget contributions present"
        for u, val in vert1.items():
            if val != 6:
                bad = f"vertex gadget {u}: alpha1 side contributes {val} != 6"
                break
        for i, val in edge1.items():
            if bad:
                break
            if val != 6:
                bad = f"edge gadget {i}: alpha1 side contributes {val} != 6"
        for i, val in edge2.items():
            if bad:
                break
            if val != 9:
                bad = f"edge gadget {i}: alpha2 side contributes {val} != 9"
        if bad is None and stray_common:
            bad = f"common adjacencies outside ports: {stray_common[:3]}"
        for i, val in overlaps.items():
            if bad:
                break
            expect = 2 if colors[g.edges[i][0]] != colors[g.edges[i][1]] else 1
            if val != expect:
                bad = f"edge gadget {i}: overlap {val} != {expect}"
        if bad:
            report.fail(f"coloring {colors}: {bad}")
            break
        if best is None or score > best:
            best = score
        last_tables = (vert1, edge1, edge2)
    report.max_encode_score_x2 = best
    if last_tables:
        report.per_vertex_alpha1, report.per_edge_alpha1, report.per_edge_alpha2 = last_tables
    return report


def max_cut_bruteforce(g: SimpleGraph, max_vertices: int = 16) -> tuple[int, list[str]]:
    """Exhaustive max cut (oracle); returns (size, coloring)."""
    if g.vertex_count > max_vertices:
        raise SizeBoundError(f"max-cut oracle limited to {max_vertices} vertices")
    best, best_colors = -1, None
    for bits in itertools.product((RED, GREEN), repeat=g.vertex_count):
        c = sum(1 for a, b in g.edges if bits[a] != bits[b])
        if c > best:
            best, best_colors = c, list(bits)
    return best, best_colors


def compare_quartet_topologies(inst: QuartetInstance, max_rounds: int = 50):
    """Best-effort Steinerization scores of the three quartet topologies.

    Heuristic only: local optima say nothing certified about the optimal
    scores of the alternative topologies.
    """
    from bpkit.phylogeny import quartet_tree, steinerize

    p1, p2, p3, p4 = inst.genomes
    out = {}
    for name, (x1, x2, x3, x4) in {
        "((pi1,pi2),(pi3,pi4))": (p1, p2, p3, p4),
        "((pi1,pi3),(pi2,pi4))": (p1, p3, p2, p4),
        "((pi1,pi4),(pi2,pi3))": (p1, p4, p2, p3),
    }.items():
        tree = quartet_tree(x1, x2, x3, x4)
        res = steinerize(tree, max_rounds=max_rounds)
        out[name] = res.score_x2
    return out
