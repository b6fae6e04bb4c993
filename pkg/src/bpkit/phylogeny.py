"""Small-phylogeny scoring and the Steinerization local search.

Given a tree with genomes at the leaves, the goal is an assignment of
genomes to internal nodes maximizing the summed similarity over tree edges.
Steinerization sweeps the internal nodes, replacing each by a median of its
neighbors whenever that strictly improves the local sum; the total score is
non-decreasing and integer-bounded, so the search terminates.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from bpkit.genomes import Genome, GenomeError, similarity_x2
from bpkit.median import median


class PhyloTree:
    """Unrooted tree with genomes bound to its leaves.

    Nodes are arbitrary hashable identifiers; every leaf (degree-1 node) must
    be bound to a genome and all genomes must share one gene set.
    """

    def __init__(self, edges, leaf_genomes: dict):
        self.edges = [tuple(e) for e in edges]
        self.leaf_genomes = dict(leaf_genomes)
        self.adj: dict = {}
        for a, b in self.edges:
            if a == b:
                raise GenomeError("tree edge loops on one node")
            self.adj.setdefault(a, []).append(b)
            self.adj.setdefault(b, []).append(a)
        self.nodes = sorted(self.adj, key=str)
        if len(self.edges) != len(self.nodes) - 1:
            raise GenomeError("tree must have exactly |nodes|-1 edges")
        self._check_connected()
        leaves = {v for v in self.nodes if len(self.adj[v]) == 1}
        missing = leaves - set(self.leaf_genomes)
        if missing:
            raise GenomeError(f"unbound leaves: {sorted(map(str, missing))}")
        extra = set(self.leaf_genomes) - set(self.nodes)
        if extra:
            raise GenomeError(f"leaf genomes for unknown nodes: {sorted(map(str, extra))}")
        ns = {g.n for g in self.leaf_genomes.values()}
        if len(ns) > 1:
            raise GenomeError("leaf genomes must share one gene set")
        self.n = ns.pop() if ns else 0

    def _check_connected(self):
        if not self.nodes:
            raise GenomeError("empty tree")
        seen = {self.nodes[0]}
        queue = deque(seen)
        while queue:
            v = queue.popleft()
            for w in self.adj[v]:
                if w not in seen:
                    seen.add(w)
                    queue.append(w)
        if len(seen) != len(self.nodes):
            raise GenomeError("tree is not connected")

    @property
    def internal_nodes(self):
        return [v for v in self.nodes if v not in self.leaf_genomes]

    def neighbors(self, v):
        return self.adj[v]


def tree_score(tree: PhyloTree, assignment: dict) -> int:
    """Summed similarity over tree edges, in half-units."""
    full = {**tree.leaf_genomes, **assignment}
    for v in tree.nodes:
        if v not in full:
            raise GenomeError(f"node {v!r} has no genome assigned")
    return sum(similarity_x2(full[a], full[b]) for a, b in tree.edges)


@dataclass(frozen=True)
class SteinerResult:
    assignment: dict
    score_x2: int
    rounds: int
    trace: tuple[int, ...]  # score after init and after each accepted move


def _random_genome(n: int, model: str, rng: random.Random) -> Genome:
    exts = list(range(2 * n))
    rng.shuffle(exts)
    pairs, tels = [], []
    while exts:
        x = exts.pop()
        if model == "mixed" and (rng.random() < 0.25 or not exts):
            tels.append(x)
        elif not exts:
            tels.append(x)  # cannot happen for even counts in general model
        else:
            pairs.append((x, exts.pop()))
    return Genome.from_adjacencies(n, pairs, tels, model)


def _nearest_leaf_init(tree: PhyloTree) -> dict:
    """Each internal node copies the genome of its nearest leaf (BFS order)."""
    assignment = {}
    queue = deque()
    source = {}
    for leaf in sorted(tree.leaf_genomes, key=str):
        source[leaf] = leaf
        queue.append(leaf)
    while queue:
        v = queue.popleft()
        for w in tree.neighbors(v):
            if w not in source:
                source[w] = source[v]
                queue.append(w)
    for v in tree.internal_nodes:
        assignment[v] = tree.leaf_genomes[source[v]]
    return assignment


def steinerize(tree: PhyloTree, model: str = "general",
               init: str = "nearest-leaf", seed: int | None = None,
               max_rounds: int | None = None) -> SteinerResult:
    """Local search: sweep internal nodes in sorted order, replacing each by
    a median of its neighbors on strict improvement of the local sum."""
    for v in tree.internal_nodes:
        if len(tree.neighbors(v)) < 2:
            raise GenomeError(f"internal node {v!r} has degree < 2")
    for g in tree.leaf_genomes.values():
        g.require_valid()
    if init == "nearest-leaf":
        assignment = _nearest_leaf_init(tree)
    elif init == "random":
        rng = random.Random(seed)
        assignment = {v: _random_genome(tree.n, model, rng)
                      for v in tree.internal_nodes}
    else:
        raise GenomeError(f"unknown init {init!r}")

    full = {**tree.leaf_genomes, **assignment}
    score = tree_score(tree, assignment)
    trace = [score]
    rounds = 0
    internal = sorted(tree.internal_nodes, key=str)
    while max_rounds is None or rounds < max_rounds:
        rounds += 1
        improved = False
        for v in internal:
            nbrs = [full[w] for w in tree.neighbors(v)]
            local_old = sum(similarity_x2(full[v], g) for g in nbrs)
            cand, local_new = median(nbrs, model)
            if local_new > local_old:
                full[v] = cand
                score += local_new - local_old
                trace.append(score)
                improved = True
        if not improved:
            break
    assignment = {v: full[v] for v in tree.internal_nodes}
    assert score == tree_score(tree, assignment)
    return SteinerResult(assignment, score, rounds, tuple(trace))


def quartet_tree(pi1: Genome, pi2: Genome, pi3: Genome, pi4: Genome) -> PhyloTree:
    """The 4-leaf tree ((pi1,pi2),(pi3,pi4)) with internal ancestors a1, a2."""
    edges = [("pi1", "a1"), ("pi2", "a1"), ("a1", "a2"), ("a2", "pi3"), ("a2", "pi4")]
    return PhyloTree(edges, {"pi1": pi1, "pi2": pi2, "pi3": pi3, "pi4": pi4})


def quartet_score(pi1: Genome, pi2: Genome, pi3: Genome, pi4: Genome,
                  a1: Genome, a2: Genome) -> int:
    """The five-term quartet score, in half-units: sim(pi1,a1) + sim(pi2,a1)
    + sim(a1,a2) + sim(a2,pi3) + sim(a2,pi4)."""
    return (similarity_x2(pi1, a1) + similarity_x2(pi2, a1)
            + similarity_x2(a1, a2)
            + similarity_x2(a2, pi3) + similarity_x2(a2, pi4))
