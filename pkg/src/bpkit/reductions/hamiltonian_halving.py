"""Reduction from directed Hamiltonicity to unichromosomal genome halving.

A digraph with all in- and out-degrees equal to 2 has an Eulerian circuit
visiting every vertex twice; writing the visited vertices down as genes, with
the copy label given by first/second visit, yields a duplicated genome that
is one circular chromosome and has no adjacency twice.  A circular ancestor
can therefore reach double similarity n only by using head-to-tail
adjacencies supported by arcs, i.e. exactly when contracting it gives a
directed Hamiltonian cycle.  The linear variant removes one arc, follows the
Eulerian path, and turns the would-be closing adjacency into two telomeres.
"""

from __future__ import annotations

from dataclasses import dataclass

from bpkit.genomes import (
    Chromosome,
    DuplicatedGenome,
    Genome,
    decompose,
    double_similarity_x2,
)
from bpkit.reductions.graphs import Digraph, GraphError


@dataclass(frozen=True)
class HalvingReductionInstance:
    digraph: Digraph
    variant: str  # "circular" or "linear"
    removed_arc: tuple[int, int] | None
    delta: DuplicatedGenome
    #: gene sequence of delta's single chromosome, as (vertex, copy) pairs
    visit_order: tuple[tuple[int, int], ...]

    @property
    def n(self) -> int:
        return self.digraph.vertex_count

    def similarity_threshold_x2(self) -> int:
        """Half-unit double similarity attained exactly by Hamiltonian
        solutions (n in raw units for both variants)."""
        return 2 * self.digraph.vertex_count


def _require_reduction_digraph(d: Digraph):
    if d.has_parallel_arcs():
        # parallel arcs would create double adjacencies in delta and break
        # the similarity-n threshold argument
        raise GraphError("halving reduction requires a simple digraph")
    if d.in_degrees() != [2] * d.vertex_count or d.out_degrees() != [2] * d.vertex_count:
        raise GraphError("halving reduction requires in-degree = out-degree = 2")


def hamiltonian_to_halving(d: Digraph, variant: str = "circular",
                           removed_arc: tuple[int, int] | None = None) -> HalvingReductionInstance:
    """Encode a degree-2 digraph as a duplicated genome whose optimal
    unichromosomal halving similarity is n iff the digraph is Hamiltonian
    (circular variant: Hamiltonian cycle; linear: Hamiltonian path)."""
    _require_reduction_digraph(d)
    n = d.vertex_count
    if variant == "circular":
        if removed_arc is not None:
            raise GraphError("removed_arc only applies to the linear variant")
        arcs = d.eulerian_circuit()
        vertices = [a for a, _ in arcs]
    elif variant == "linear":
        if removed_arc is None:
            removed_arc = d.arcs[0]
        x, y = removed_arc
        remaining = list(d.arcs)
        try:
            remaining.remove((x, y))
        except ValueError:
            raise GraphError(f"removed arc {removed_arc} not in digraph") from None
        rest = Digraph(n, remaining)
        arcs = rest.eulerian_path(start=y, end=x)
        vertices = [a for a, _ in arcs] + [x]
    else:
        raise GraphError(f"unknown variant {variant!r}")

    seen: dict[int, int] = {}
    genes = []
    visit_order = []
    for v in vertices:
        copy = seen.get(v, 0) + 1
        seen[v] = copy
        if copy > 2:
            raise GraphError("vertex visited more than twice in Eulerian walk")
        genes.append(v + 1 if copy == 1 else v + 1 + n)
        visit_order.append((v, copy))
    kind = "circular" if variant == "circular" else "linear"
    genome = Genome.from_chromosomes(2 * n, [Chromosome(kind, tuple(genes))],
                                     "circular" if variant == "circular" else "linear")
    delta = DuplicatedGenome(n, genome)
    return HalvingReductionInstance(d, variant, removed_arc, delta, tuple(visit_order))


def halving_to_hamiltonian(inst: HalvingReductionInstance | Digraph,
                           alpha: Genome) -> list[int] | None:
    """Decode a halving solution: if alpha attains double similarity n
    against the instance's duplicated genome, return the contracted,
    orientation-fixed Hamiltonian cycle (circular variant) or path (linear),
    else None."""
    if isinstance(inst, Digraph):
        inst = hamiltonian_to_halving(inst, "circular")
    d = inst.digraph
    n = d.vertex_count
    if alpha.n != n:
        raise GraphError("alpha does not live on the digraph's vertex set")
    if double_similarity_x2(alpha, inst.delta) != inst.similarity_threshold_x2():
        return None
    chroms = decompose(alpha)
    if len(chroms) != 1:
        return None
    chrom = chroms[0]
    expected_kind = "circular" if inst.variant == "circular" else "linear"
    if chrom.kind != expected_kind:
        return None
    genes = list(chrom.genes)
    # all adjacencies run head-to-tail, so the traversal is all-forward in
    # one of the two reading directions
    if all(g < 0 for g in genes):
        genes = [-g for g in reversed(genes)]
    if not all(g > 0 for g in genes):
        return None
    cycle = [g - 1 for g in genes]
    arcset = set(d.arcs)
    steps = list(zip(cycle, cycle[1:]))
    if inst.variant == "circular":
        steps.append((cycle[-1], cycle[0]))
    if any(step not in arcset for step in steps):
        return None
    if sorted(cycle) != list(range(n)):
        return None
    return cycle
