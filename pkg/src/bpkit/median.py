"""Breakpoint median of k genomes in the general and mixed models.

The median graph weighs every candidate adjacency by the number of input
genomes containing it (telomeric candidates at half weight).  Any matching in
that graph is a partial genome whose weight equals its median score, so the
median reduces to maximum weight matching; for k <= 3 the weight-2 and
weight-3 edges can be committed up front, which leaves a unit-weight residual
solved by maximum cardinality matching.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from bpkit.genomes import Genome, GenomeError, SizeBoundError, TELOMERE, similarity_x2
from bpkit.matching import (
    Matching,
    WeightedGraph,
    max_weight_matching,
    maximum_cardinality_pairs,
)

SOLVABLE_MODELS = ("general", "mixed")

_HARD_MEDIAN = {
    "circular": "median is NP-hard in the unichromosomal circular model",
    "linear": "median is NP-hard in the unichromosomal linear model",
    "multilinear": "median is NP-hard in the multilinear model",
}


class ModelHardnessError(ValueError):
    """Request for a solver variant that is NP-hard in the chosen model."""


def _check_model(model: str, problem: str = "median"):
    if model in SOLVABLE_MODELS:
        return
    if model in _HARD_MEDIAN:
        raise ModelHardnessError(_HARD_MEDIAN[model].replace("median", problem))
    raise GenomeError(f"unknown model {model!r}")


def _require_inputs(genomes):
    if len(genomes) < 2:
        raise GenomeError("median needs at least 2 genomes")
    n = genomes[0].n
    for g in genomes:
        if g.n != n:
            raise GenomeError("gene set mismatch between input genomes")
        g.require_valid()
    return n


def adjacency_counts(genomes):
    """Count candidate adjacencies across genomes.

    Returns ``(u, v, cnt, tel_cnt)``: distinct non-telomeric pairs with their
    multiplicities, plus per-extremity telomere multiplicities.
    """
    n = genomes[0].n
    idx = np.arange(2 * n, dtype=np.int64)
    keys = []
    tel = np.zeros(2 * n, dtype=np.int64)
    for g in genomes:
        p = g.partner.astype(np.int64)
        xs = np.nonzero(p > idx)[0]
        keys.append(xs * (2 * n) + p[xs])
        tel += p == TELOMERE
    allk = np.concatenate(keys) if keys else np.empty(0, dtype=np.int64)
    uniq, cnt = np.unique(allk, return_counts=True)
    return uniq // (2 * n), uniq % (2 * n), cnt, tel


@dataclass(frozen=True)
class MedianGraph:
    """Weighted graph behind a median instance, with enough provenance to map
    matchings back to genomes.

    ``kind`` is "direct" (vertices = extremities, general model) or "doubled"
    (mixed model: two copies of the extremity graph with every telomeric
    candidate pair fused into a single cross edge, telomere vertices gone).
    The maximum matching weight of a doubled graph is exactly twice the
    maximum mixed-model median score.
    """

    graph: WeightedGraph
    kind: str
    n: int
    k: int

    def decode(self, matching: Matching) -> tuple[list[tuple[int, int]], list[int]]:
        """Translate a matching in this graph into adjacency pairs and
        telomeres over the 2n extremities (for doubled graphs, the better of
        the two copy projections)."""
        n2 = 2 * self.n
        if self.kind == "direct":
            return list(matching.pairs), []
        copy1, copy2, fused = [], [], []
        w1 = w2 = 0
        for a, b in matching.pairs:
            if b < n2:
                copy1.append((a, b))
                w1 += self.graph.weight_of(a, b)
            elif a >= n2:
                copy2.append((a - n2, b - n2))
                w2 += self.graph.weight_of(a, b)
            elif b - n2 == a:
                # fusion edges contribute equally to both projections
                fused.append(a)
        if w1 >= w2:
            return copy1, fused
        return copy2, fused


def build_median_graph(genomes, model: str = "general") -> MedianGraph:
    """The weighted median graph of the inputs (see :class:`MedianGraph`)."""
    _check_model(model)
    n = _require_inputs(genomes)
    u, v, cnt, tel = adjacency_counts(genomes)
    n2 = 2 * n
    if model == "general":
        edges = [(int(a), int(b), int(2 * c)) for a, b, c in zip(u, v, cnt)]
        return MedianGraph(WeightedGraph(n2, edges), "direct", n, len(genomes))
    edges = []
    for a, b, c in zip(u, v, cnt):
        edges.append((int(a), int(b), int(2 * c)))
        edges.append((int(a) + n2, int(b) + n2, int(2 * c)))
    for x in np.nonzero(tel)[0]:
        edges.append((int(x), int(x) + n2, int(2 * tel[x])))
    return MedianGraph(WeightedGraph(2 * n2, edges), "doubled", n, len(genomes))


def _complete_partner(arr: np.ndarray, n: int, model: str) -> Genome:
    """Fill the -2 (free) slots of a partner array deterministically and wrap
    it as a genome: the general model pairs free extremities in increasing
    index order, the mixed model closes each with its own telomere."""
    free = np.nonzero(arr == -2)[0]
    if model == "general":
        if len(free) % 2:
            raise GenomeError("odd number of free extremities")
        arr[free[0::2]] = free[1::2]
        arr[free[1::2]] = free[0::2]
    else:
        arr[free] = TELOMERE
    return Genome(n, arr, model)


def complete_matching_to_genome(pairs, n: int, model: str = "general",
                                telomeres=()) -> Genome:
    """Deterministic completion of a partial matching to a full genome (see
    :func:`_complete_partner` for the completion rule)."""
    arr = np.full(2 * n, -2, dtype=np.int32)
    for a, b in pairs:
        arr[a], arr[b] = b, a
    for x in telomeres:
        arr[x] = TELOMERE
    return _complete_partner(arr, n, model)


def _median_score(alpha: Genome, genomes) -> int:
    return sum(similarity_x2(alpha, g) for g in genomes)


def median(genomes, model: str = "general") -> tuple[Genome, int]:
    """A genome maximizing the summed similarity to the inputs, with its
    score in half-units.

    For up to three genomes the fast path commits every adjacency of raw
    weight >= 2 (and telomeric weight >= 1), then solves the unit-weight rest
    by maximum cardinality matching; with more genomes it falls back to
    maximum weight matching on the median graph.
    """
    _check_model(model)
    n = _require_inputs(genomes)
    k = len(genomes)
    if k <= 3:
        alpha = _median_fast(genomes, n, model)
    else:
        mg = build_median_graph(genomes, model)
        if model == "general":
            m = max_weight_matching(mg.graph)
            pairs, tels = m.pairs, []
        else:
            # weighted matching handles half-unit telomere weights directly
            # on the telomere stand-in graph (weights are already doubled)
            n2 = 2 * n
            u, v, cnt, tel = adjacency_counts(genomes)
            edges = [(int(a), int(b), int(2 * c)) for a, b, c in zip(u, v, cnt)]
            edges += [(int(x), n2 + int(x), int(tel[x])) for x in np.nonzero(tel)[0]]
            m = max_weight_matching(WeightedGraph(2 * n2, edges))
            pairs = [(a, b) for a, b in m.pairs if b < n2]
            tels = [a for a, b in m.pairs if b >= n2]
        alpha = complete_matching_to_genome(pairs, n, model, tels)
    alpha.require_valid()
    return alpha, _median_score(alpha, genomes)


def _median_fast(genomes, n: int, model: str) -> Genome:
    k = len(genomes)
    u, v, cnt, tel = adjacency_counts(genomes)
    n2 = 2 * n
    taken = np.zeros(n2, dtype=bool)
    forced_pairs = []
    forced = cnt >= 2
    for a, b in zip(u[forced], v[forced]):
        if taken[a] or taken[b]:
            raise AssertionError("forced median edges are not a matching")
        taken[a] = taken[b] = True
        forced_pairs.append((int(a), int(b)))
    forced_tels = []
    if model == "mixed":
        for x in np.nonzero(tel >= 2)[0]:
            if taken[x]:
                raise AssertionError("forced median edges are not a matching")
            taken[x] = True
            forced_tels.append(int(x))
    unit = cnt == 1
    uu, vv = u[unit], v[unit]
    open_edge = ~taken[uu] & ~taken[vv]
    uu, vv = uu[open_edge], vv[open_edge]
    if model == "general":
        mate = maximum_cardinality_pairs(n2, uu, vv)
        pairs = forced_pairs + [(int(x), int(mate[x])) for x in range(n2) if mate[x] > x]
        return complete_matching_to_genome(pairs, n, model)
    # mixed: double the unit residual, fusing half-weight telomere candidates
    # into unit cross edges; project the better copy of the matching back
    half_tel = np.nonzero((tel == 1) & ~taken)[0]
    du = np.concatenate([uu, uu + n2, half_tel])
    dv = np.concatenate([vv, vv + n2, half_tel + n2])
    mate = maximum_cardinality_pairs(2 * n2, du, dv)
    fused = [int(x) for x in range(n2) if mate[x] == x + n2]
    copy1 = [(int(x), int(mate[x])) for x in range(n2)
             if x < mate[x] < n2]
    copy2 = [(int(x) - n2, int(mate[x]) - n2) for x in range(n2, 2 * n2)
             if x < mate[x]]
    # all residual pair edges are unit weight, so cardinality decides
    chosen = copy1 if len(copy1) >= len(copy2) else copy2
    pairs = forced_pairs + chosen
    tels = forced_tels + fused
    return complete_matching_to_genome(pairs, n, model, tels)


# ---------------------------------------------------------------------------
# Brute-force oracle
# ---------------------------------------------------------------------------

def _all_perfect_matchings(items):
    """Yield all perfect matchings of the item list as lists of pairs."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for i, other in enumerate(rest):
        sub = rest[:i] + rest[i + 1:]
        for tail_pairs in _all_perfect_matchings(sub):
            yield [(first, other)] + tail_pairs


def _all_matchings_with_telomeres(items):
    """Yield (pairs, telomeres) over all matchings with unmatched items
    closed by telomeres."""
    if not items:
        yield [], []
        return
    first, rest = items[0], items[1:]
    for pairs, tels in _all_matchings_with_telomeres(rest):
        yield pairs, [first] + tels
    for i, other in enumerate(rest):
        sub = rest[:i] + rest[i + 1:]
        for pairs, tels in _all_matchings_with_telomeres(sub):
            yield [(first, other)] + pairs, tels


def enumerate_genomes(n: int, model: str):
    """All genomes over n genes in the given model (general: perfect
    matchings; mixed: matchings with telomere closure)."""
    exts = list(range(2 * n))
    if model == "general":
        for pairs in _all_perfect_matchings(exts):
            yield Genome.from_adjacencies(n, pairs, (), "general")
    elif model == "mixed":
        for pairs, tels in _all_matchings_with_telomeres(exts):
            yield Genome.from_adjacencies(n, pairs, tels, "mixed")
    else:
        raise GenomeError(f"enumeration not supported for model {model!r}")


def brute_force_median(genomes, model: str = "general", max_n: int = 6) -> tuple[Genome, int]:
    """Exact median by exhaustive enumeration (oracle)."""
    _check_model(model)
    n = _require_inputs(genomes)
    if n > max_n:
        raise SizeBoundError(f"brute-force median limited to n <= {max_n}, got {n}")
    partners = [g.partner for g in genomes]
    best_score = -1
    best = None
    for alpha in enumerate_genomes(n, model):
        pa = alpha.partner
        score = 0
        for p in partners:
            eq = pa == p
            score += int(np.count_nonzero(eq & (pa >= 0)))
            score += int(np.count_nonzero(eq & (pa == TELOMERE)))
        if score > best_score:
            best_score = score
            best = alpha
    return best, best_score
