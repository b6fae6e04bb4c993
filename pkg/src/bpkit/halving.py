"""Genome halving and guided halving in the general and mixed models.

Halving minimizes the double distance from a duplicated genome; its weight
graph has degree at most 2 (each gene copy contributes one candidate), so
after committing the weight-2 edges the rest is a disjoint union of paths and
cycles matched by a linear pass.  Guided halving adds an outgroup genome,
which brings the weights to the 3-genome median profile and reuses the same
forced-edge pruning followed by maximum cardinality matching.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from bpkit.genomes import (
    DuplicatedGenome,
    Genome,
    GenomeError,
    SizeBoundError,
    TELOMERE,
    distance_x2,
    double_distance_x2,
    double_similarity_x2,
)
from bpkit.matching import maximum_cardinality_pairs
from bpkit.median import (
    ModelHardnessError,
    _complete_partner,
    complete_matching_to_genome,
    enumerate_genomes,
)

_HARD_HALVING = {
    "circular": "halving is NP-hard in the unichromosomal circular model",
    "linear": "halving is NP-hard in the unichromosomal linear model",
    "multilinear": "halving is NP-hard in the multilinear model",
}


def _check_model(model: str, problem: str):
    if model in ("general", "mixed"):
        return
    if model in _HARD_HALVING:
        raise ModelHardnessError(_HARD_HALVING[model].replace("halving", problem))
    raise GenomeError(f"unknown model {model!r}")


def halving_counts(delta: DuplicatedGenome, rho: Genome | None = None):
    """Candidate adjacency multiplicities projected to the base gene set.

    For each base pair {x, y} the count is the number of adjacencies among
    the four copy combinations present in delta (plus one if rho contains
    {x, y}); telomere counts work the same way per extremity.
    """
    n = delta.n
    n2 = 2 * n
    pd = delta.genome.partner.astype(np.int64)
    idx = np.arange(4 * n, dtype=np.int64)
    xs = np.nonzero(pd > idx)[0]
    ys = pd[xs]
    bu = np.where(xs >= n2, xs - n2, xs)
    bv = np.where(ys >= n2, ys - n2, ys)
    lo = np.minimum(bu, bv)
    hi = np.maximum(bu, bv)
    self_pair = lo == hi  # both copies of one extremity adjacent: no base candidate
    keys = (lo * n2 + hi)[~self_pair]
    tel = np.zeros(n2, dtype=np.int64)
    tel_ext = np.nonzero(pd == TELOMERE)[0]
    np.add.at(tel, np.where(tel_ext >= n2, tel_ext - n2, tel_ext), 1)
    if rho is not None:
        if rho.n != n:
            raise GenomeError("gene set mismatch between delta and rho")
        pr = rho.partner.astype(np.int64)
        ridx = np.arange(n2, dtype=np.int64)
        rx = np.nonzero(pr > ridx)[0]
        keys = np.concatenate([keys, rx * n2 + pr[rx]])
        tel += pr == TELOMERE
    uniq, cnt = np.unique(keys, return_counts=True)
    return uniq // n2, uniq % n2, cnt, tel


@njit(cache=True)
def _degree2_matching(nbr, mate):
    """Maximum matching on a graph of maximum degree 2 (paths and cycles).

    Paths are matched from an endpoint; odd cycles drop the lexicographically
    largest edge, even cycles keep the alternation class avoiding it.
    """
    n = nbr.shape[0]
    visited = np.zeros(n, dtype=np.uint8)
    deg = np.empty(n, dtype=np.int64)
    for v in range(n):
        d = 0
        for s in range(2):
            if nbr[v, s] != -1:
                d += 1
        deg[v] = d
    # paths
    for start in range(n):
        if deg[start] != 1 or visited[start]:
            continue
        prev = -1
        cur = start
        take = True
        while True:
            visited[cur] = 1
            nxt = -1
            for s in range(2):
                cand = nbr[cur, s]
                if cand != -1 and cand != prev and not visited[cand]:
                    nxt = cand
                    break
            if nxt == -1:
                break
            if take:
                mate[cur] = nxt
                mate[nxt] = cur
            take = not take
            prev = cur
            cur = nxt
    # cycles
    buf = np.empty(n, dtype=np.int64)
    for start in range(n):
        if deg[start] != 2 or visited[start]:
            continue
        cnt = 0
        prev = -1
        cur = start
        while True:
            visited[cur] = 1
            buf[cnt] = cur
            cnt += 1
            nxt = -1
            for s in range(2):
                cand = nbr[cur, s]
                if cand != -1 and cand != prev and not visited[cand]:
                    nxt = cand
                    break
            if nxt == -1:
                break
            prev = cur
            cur = nxt
        # locate the lexicographically largest edge and start after it
        drop = 0
        best_lo = -1
        best_hi = -1
        for i in range(cnt):
            a = buf[i]
            b = buf[(i + 1) % cnt]
            lo = a if a < b else b
            hi = b if a < b else a
            if lo > best_lo or (lo == best_lo and hi > best_hi):
                best_lo, best_hi, drop = lo, hi, i
        i = (drop + 1) % cnt
        steps = 0
        while steps + 1 < cnt:
            a = buf[i]
            b = buf[(i + 1) % cnt]
            mate[a] = b
            mate[b] = a
            i = (i + 2) % cnt
            steps += 2


def _build_degree2(n_vertices: int, us, vs) -> np.ndarray:
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    if (us == vs).any():
        raise AssertionError("self-loop in halving residual")
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    order = np.argsort(src, kind="stable")
    src, dst = src[order], dst[order]
    slot = np.arange(len(src)) - np.searchsorted(src, src, side="left")
    if (slot > 1).any():
        raise AssertionError("halving residual graph has degree > 2")
    nbr = np.full((n_vertices, 2), -1, dtype=np.int64)
    nbr[src, slot] = dst
    return nbr


def halve(delta: DuplicatedGenome, model: str = "general") -> tuple[Genome, int]:
    """An ordinary genome minimizing the double distance to delta, with that
    distance in half-units."""
    _check_model(model, "halving")
    delta.genome.require_valid()
    n = delta.n
    n2 = 2 * n
    u, v, cnt, tel = halving_counts(delta)
    if (cnt > 2).any():
        raise AssertionError("halving weights exceed 2")
    degree = tel.copy()
    np.add.at(degree, u, cnt)
    np.add.at(degree, v, cnt)
    if (degree > 2).any():
        raise AssertionError("halving weight graph has degree > 2")
    forced = cnt == 2
    fu, fv = u[forced], v[forced]
    taken = np.zeros(n2, dtype=bool)
    taken[fu] = True
    taken[fv] = True
    if len(fu) and 2 * len(fu) != int(taken.sum()):
        raise AssertionError("forced halving edges are not a matching")
    forced_tels = []
    if model == "mixed":
        for x in np.nonzero(tel >= 2)[0]:
            if taken[x]:
                raise AssertionError("forced halving edges are not a matching")
            taken[x] = True
            forced_tels.append(int(x))
    unit = cnt == 1
    uu, vv = u[unit], v[unit]
    keep = ~taken[uu] & ~taken[vv]
    uu, vv = uu[keep], vv[keep]
    if model == "general":
        arr = np.full(n2, -2, dtype=np.int32)
        arr[fu] = fv
        arr[fv] = fu
        if len(uu):
            mate = np.full(n2, -1, dtype=np.int64)
            _degree2_matching(_build_degree2(n2, uu, vv), mate)
            got = mate >= 0
            arr[got] = mate[got]
        alpha = _complete_partner(arr, n, model)
    else:
        half_tel = np.nonzero((tel == 1) & ~taken)[0]
        du = np.concatenate([uu, uu + n2, half_tel])
        dv = np.concatenate([vv, vv + n2, half_tel + n2])
        mate = np.full(2 * n2, -1, dtype=np.int64)
        if len(du):
            _degree2_matching(_build_degree2(2 * n2, du, dv), mate)
        fused = [int(x) for x in range(n2) if mate[x] == x + n2]
        copy1 = [(int(x), int(mate[x])) for x in range(n2) if x < mate[x] < n2]
        copy2 = [(int(x) - n2, int(mate[x]) - n2) for x in range(n2, 2 * n2)
                 if x < mate[x]]
        chosen = copy1 if len(copy1) >= len(copy2) else copy2
        forced_pairs = list(zip(fu.tolist(), fv.tolist()))
        alpha = complete_matching_to_genome(forced_pairs + chosen, n, model,
                                            forced_tels + fused)
    alpha.require_valid()
    return alpha, double_distance_x2(alpha, delta)


def guided_halve(delta: DuplicatedGenome, rho: Genome,
                 model: str = "general") -> tuple[Genome, int]:
    """A genome minimizing dd(alpha, delta) + d(alpha, rho); returns alpha and
    the minimized sum in half-units.  Solved like a 3-genome median: raw
    weights are at most 3, weight >= 2 edges (telomeric >= 1) are forced and
    the unit residual goes through maximum cardinality matching."""
    _check_model(model, "guided halving")
    delta.genome.require_valid()
    rho.require_valid()
    n = delta.n
    n2 = 2 * n
    u, v, cnt, tel = halving_counts(delta, rho)
    if (cnt > 3).any():
        raise AssertionError("guided halving weights exceed 3")
    taken = np.zeros(n2, dtype=bool)
    forced_pairs = []
    for a, b in zip(u[cnt >= 2], v[cnt >= 2]):
        if taken[a] or taken[b]:
            raise AssertionError("forced guided-halving edges are not a matching")
        taken[a] = taken[b] = True
        forced_pairs.append((int(a), int(b)))
    forced_tels = []
    if model == "mixed":
        for x in np.nonzero(tel >= 2)[0]:
            if taken[x]:
                raise AssertionError("forced guided-halving edges are not a matching")
            taken[x] = True
            forced_tels.append(int(x))
    unit = cnt == 1
    uu, vv = u[unit], v[unit]
    keep = ~taken[uu] & ~taken[vv]
    uu, vv = uu[keep], vv[keep]
    if model == "general":
        mate = maximum_cardinality_pairs(n2, uu, vv)
        pairs = forced_pairs + [(int(x), int(mate[x])) for x in range(n2) if mate[x] > x]
        alpha = complete_matching_to_genome(pairs, n, model)
    else:
        half_tel = np.nonzero((tel == 1) & ~taken)[0]
        du = np.concatenate([uu, uu + n2, half_tel])
        dv = np.concatenate([vv, vv + n2, half_tel + n2])
        mate = maximum_cardinality_pairs(2 * n2, du, dv)
        fused = [int(x) for x in range(n2) if mate[x] == x + n2]
        copy1 = [(int(x), int(mate[x])) for x in range(n2) if x < mate[x] < n2]
        copy2 = [(int(x) - n2, int(mate[x]) - n2) for x in range(n2, 2 * n2)
                 if x < mate[x]]
        chosen = copy1 if len(copy1) >= len(copy2) else copy2
        alpha = complete_matching_to_genome(forced_pairs + chosen, n, model,
                                            forced_tels + fused)
    alpha.require_valid()
    return alpha, double_distance_x2(alpha, delta) + distance_x2(alpha, rho)


# ---------------------------------------------------------------------------
# Brute-force oracles
# ---------------------------------------------------------------------------

def brute_force_halve(delta: DuplicatedGenome, model: str = "general",
                      max_n: int = 5) -> tuple[Genome, int]:
    """Exact halving by enumerating every candidate ancestor (oracle)."""
    _check_model(model, "halving")
    if delta.n > max_n:
        raise SizeBoundError(f"brute-force halving limited to n <= {max_n}")
    best = None
    best_dd = None
    for alpha in enumerate_genomes(delta.n, model):
        dd = double_distance_x2(alpha, delta)
        if best_dd is None or dd < best_dd:
            best, best_dd = alpha, dd
    return best, best_dd


def brute_force_guided(delta: DuplicatedGenome, rho: Genome,
                       model: str = "general", max_n: int = 4) -> tuple[Genome, int]:
    """Exact guided halving by enumeration (oracle)."""
    _check_model(model, "guided halving")
    if delta.n > max_n:
        raise SizeBoundError(f"brute-force guided halving limited to n <= {max_n}")
    best = None
    best_total = None
    for alpha in enumerate_genomes(delta.n, model):
        total = double_distance_x2(alpha, delta) + distance_x2(alpha, rho)
        if best_total is None or total < best_total:
            best, best_total = alpha, total
    return best, best_total


def circular_genomes(n: int):
    """All unichromosomal circular genomes over n genes (for the hardness
    reduction verifiers)."""
    import itertools
    if n == 1:
        yield Genome.from_chromosomes(1, [("circular", (1,))], "circular")
        return
    for perm in itertools.permutations(range(2, n + 1)):
        for signs in itertools.product((1, -1), repeat=n - 1):
            genes = (1,) + tuple(s * g for s, g in zip(signs, perm))
            yield Genome.from_chromosomes(n, [("circular", genes)], "circular")


def brute_force_circular_halving_similarity(delta: DuplicatedGenome,
                                            max_n: int = 6) -> int:
    """Maximum double similarity over unichromosomal circular ancestors, in
    half-units (oracle for the Hamiltonian reduction)."""
    if delta.n > max_n:
        raise SizeBoundError(f"circular halving oracle limited to n <= {max_n}")
    return max(double_similarity_x2(a, delta) for a in circular_genomes(delta.n))


def linear_genomes(n: int):
    """All unichromosomal linear genomes over n genes."""
    import itertools
    for perm in itertools.permutations(range(1, n + 1)):
        if n > 1 and perm[0] > perm[-1]:
            continue  # skip mirror duplicates
        for signs in itertools.product((1, -1), repeat=n):
            genes = tuple(s * g for s, g in zip(signs, perm))
            yield Genome.from_chromosomes(n, [("linear", genes)], "linear")


def brute_force_linear_halving_similarity(delta: DuplicatedGenome,
                                          max_n: int = 6) -> int:
    """Maximum double similarity over unichromosomal linear ancestors."""
    if delta.n > max_n:
        raise SizeBoundError(f"linear halving oracle limited to n <= {max_n}")
    return max(double_similarity_x2(a, delta) for a in linear_genomes(delta.n))
