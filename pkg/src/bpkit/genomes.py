"""Genomes as matchings over gene extremities, with breakpoint similarity scores.

A genome over genes 1..n is a set of adjacencies: an (unordered) pairing of
the 2n gene extremities.  Every extremity is either paired with exactly one
other extremity or marks the end of a linear chromosome, in which case it is
paired with its own telomere sentinel.  Together with the base matching that
joins each gene's head to its own tail, the adjacencies decompose the genome
into circular and linear chromosomes.

All similarity/distance scores are kept in integer half-units (the true score
times two) so that the half-weight of telomeric adjacencies stays exact.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

#: Partner value marking a telomeric extremity (end of a linear chromosome).
TELOMERE = -1

MODELS = ("general", "circular", "linear", "multilinear", "mixed")

#: Models whose genomes may contain telomeric adjacencies.
TELOMERIC_MODELS = ("linear", "multilinear", "mixed")


class GenomeError(ValueError):
    """Raised for structurally invalid genomes or incompatible gene sets."""


class SizeBoundError(ValueError):
    """An exhaustive oracle was asked to exceed its instance-size bound."""


# ---------------------------------------------------------------------------
# Extremity encoding: gene g in 1..n has tail 2*(g-1) and head 2*(g-1)+1.
# ---------------------------------------------------------------------------

def tail(gene: int) -> int:
    return 2 * (gene - 1)


def head(gene: int) -> int:
    return 2 * (gene - 1) + 1


def gene_of(ext: int) -> int:
    return ext // 2 + 1


def is_head(ext: int) -> bool:
    return ext % 2 == 1


def ext_name(ext: int) -> str:
    """Human-readable extremity name, e.g. '3h' or '3t'."""
    return f"{gene_of(ext)}{'h' if is_head(ext) else 't'}"


def base_matching(n: int) -> list[tuple[int, int]]:
    """The fixed matching pairing each gene's tail with its own head."""
    if n < 1:
        raise GenomeError("gene count must be >= 1")
    return [(tail(g), head(g)) for g in range(1, n + 1)]


@dataclass(frozen=True)
class Chromosome:
    """One chromosome as a canonical sequence of signed gene identifiers."""

    kind: str  # "circular" or "linear"
    genes: tuple[int, ...]

    def __post_init__(self):
        if self.kind not in ("circular", "linear"):
            raise GenomeError(f"bad chromosome kind {self.kind!r}")
        if not self.genes:
            raise GenomeError("empty chromosome")


def _reverse_complement(seq: Sequence[int]) -> tuple[int, ...]:
    return tuple(-g for g in reversed(seq))


def _seq_key(seq: Sequence[int]) -> tuple:
    """Ordering for signed gene sequences: by absolute id, positive first."""
    return tuple((abs(g), g < 0) for g in seq)


def canonical_chromosome(kind: str, genes: Sequence[int]) -> Chromosome:
    """Canonicalize: rotation/reflection-minimal (circular), direction-minimal
    (linear).  Gene identifiers are unique within a chromosome, so rotating a
    circular sequence to start at the smallest absolute identifier is enough.
    """
    seq = tuple(genes)
    if kind == "linear":
        return Chromosome(kind, min(seq, _reverse_complement(seq), key=_seq_key))
    # circular: rotate forward and reflected sequences to the minimal |gene|
    candidates = []
    for cand in (seq, _reverse_complement(seq)):
        pivot = min(range(len(cand)), key=lambda i: abs(cand[i]))
        candidates.append(cand[pivot:] + cand[:pivot])
    return Chromosome(kind, min(candidates, key=_seq_key))


class Genome:
    """An immutable genome: ``partner[x]`` is the extremity adjacent to
    extremity ``x`` (or TELOMERE).

    The constructor enforces the matching structure; conformance to the
    genome's *model* tag is checked separately by :func:`validate`.
    """

    __slots__ = ("n", "model", "partner")

    def __init__(self, n: int, partner, model: str = "general"):
        if model not in MODELS:
            raise GenomeError(f"unknown model {model!r}")
        if n < 1:
            raise GenomeError("gene count must be >= 1")
        arr = np.array(partner, dtype=np.int32)
        if arr.shape != (2 * n,):
            raise GenomeError(f"partner array must have length {2 * n}")
        _check_matching_structure(arr)
        arr.setflags(write=False)
        self.n = n
        self.model = model
        self.partner = arr

    def __setattr__(self, name, value):
        if hasattr(self, "partner") and name in self.__slots__:
            raise AttributeError("Genome is immutable")
        object.__setattr__(self, name, value)

    # -- constructors -------------------------------------------------------

    @classmethod
    def from_adjacencies(cls, n: int, pairs: Iterable[tuple[int, int]],
                         telomeres: Iterable[int] = (), model: str = "general") -> "Genome":
        arr = np.full(2 * n, -2, dtype=np.int32)
        for x, y in pairs:
            for e in (x, y):
                if not (0 <= e < 2 * n):
                    raise GenomeError(f"extremity {e} out of range")
                if arr[e] != -2:
                    raise GenomeError(f"extremity {ext_name(e)} used twice")
            if x == y:
                raise GenomeError(f"self-adjacency at {ext_name(x)}")
            arr[x], arr[y] = y, x
        for e in telomeres:
            if arr[e] != -2:
                raise GenomeError(f"extremity {ext_name(e)} used twice")
            arr[e] = TELOMERE
        if (arr == -2).any():
            missing = [ext_name(e) for e in np.nonzero(arr == -2)[0][:4]]
            raise GenomeError(f"unmatched extremities: {', '.join(missing)}")
        return cls(n, arr, model)

    @classmethod
    def from_chromosomes(cls, n: int, chromosomes: Iterable[Chromosome | tuple],
                         model: str | None = None) -> "Genome":
        chroms = [c if isinstance(c, Chromosome) else Chromosome(*c) for c in chromosomes]
        pairs: list[tuple[int, int]] = []
        tels: list[int] = []
        for chrom in chroms:
            ents = []
            exts = []
            for s in chrom.genes:
                g = abs(s)
                if not (1 <= g <= n):
                    raise GenomeError(f"gene {g} out of range 1..{n}")
                ents.append(tail(g) if s > 0 else head(g))
                exts.append(head(g) if s > 0 else tail(g))
            for i in range(len(chrom.genes) - 1):
                pairs.append((exts[i], ents[i + 1]))
            if chrom.kind == "circular":
                pairs.append((exts[-1], ents[0]))
            else:
                tels.append(ents[0])
                tels.append(exts[-1])
        if model is None:
            model = infer_model(chroms)
        return cls.from_adjacencies(n, pairs, tels, model)

    # -- views --------------------------------------------------------------

    def adjacencies(self) -> list[tuple[int, int]]:
        """Non-telomeric adjacencies as sorted (low, high) pairs."""
        p = self.partner
        xs = np.nonzero(p > np.arange(2 * self.n, dtype=np.int32))[0]
        return [(int(x), int(p[x])) for x in xs]

    def telomeres(self) -> list[int]:
        return [int(x) for x in np.nonzero(self.partner == TELOMERE)[0]]

    def adjacency_set(self) -> frozenset[tuple[int, int]]:
        return frozenset(self.adjacencies())

    def with_model(self, model: str) -> "Genome":
        return Genome(self.n, self.partner, model)

    def require_valid(self) -> "Genome":
        problems = validate(self)
        if problems:
            raise GenomeError("; ".join(problems))
        return self

    # -- equality (adjacency sets; the model tag is a view) -----------------

    def __eq__(self, other):
        if not isinstance(other, Genome):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.partner, other.partner)

    def __hash__(self):
        return hash((self.n, self.partner.tobytes()))

    def __repr__(self):
        chroms = " ".join(_format_chromosome(c) for c in decompose(self))
        return f"<Genome n={self.n} {self.model}: {chroms}>"


def _check_matching_structure(arr: np.ndarray) -> None:
    size = arr.shape[0]
    bad = (arr < TELOMERE) | (arr >= size)
    if bad.any():
        raise GenomeError("partner value out of range")
    idx = np.arange(size, dtype=np.int32)
    if (arr == idx).any():
        raise GenomeError("extremity adjacent to itself")
    real = arr >= 0
    if not np.array_equal(arr[arr[real]], idx[real]):
        raise GenomeError("partner array is not an involution")


def infer_model(chromosomes: Sequence[Chromosome]) -> str:
    """Model family inferred from chromosome kinds (file parsing default)."""
    kinds = {c.kind for c in chromosomes}
    if kinds == {"circular"}:
        return "circular" if len(chromosomes) == 1 else "general"
    if kinds == {"linear"}:
        return "linear" if len(chromosomes) == 1 else "multilinear"
    return "mixed"


def validate(genome: Genome) -> list[str]:
    """Check the genome against its model tag; return a list of violations
    (empty means conformant).
    """
    problems = []
    ntel = int(np.count_nonzero(genome.partner == TELOMERE))
    if genome.model in ("general", "circular") and ntel:
        problems.append(f"model {genome.model} forbids telomeric adjacencies "
                        f"({ntel} present)")
        return problems
    chroms = decompose(genome)
    if genome.model == "circular" and len(chroms) != 1:
        problems.append(f"circular model requires a single chromosome, found {len(chroms)}")
    if genome.model == "linear":
        if len(chroms) != 1 or chroms[0].kind != "linear":
            problems.append("linear model requires exactly one linear chromosome")
    if genome.model == "multilinear":
        bad = sum(1 for c in chroms if c.kind != "linear")
        if bad:
            problems.append(f"multilinear model forbids circular chromosomes ({bad} present)")
    return problems


def decompose(genome: Genome) -> list[Chromosome]:
    """Split a genome into canonical chromosomes by walking adjacency/base
    edges alternately."""
    p = genome.partner
    size = 2 * genome.n
    seen = np.zeros(size, dtype=bool)
    chroms: list[Chromosome] = []

    def walk(start: int, kind: str) -> Chromosome:
        seq = []
        e = start
        while True:
            seen[e] = seen[e ^ 1] = True
            g = gene_of(e)
            seq.append(g if not is_head(e) else -g)
            nxt = p[e ^ 1]  # leave through the gene's other end
            if nxt == TELOMERE or (kind == "circular" and nxt == start):
                break
            e = int(nxt)
        return canonical_chromosome(kind, seq)

    for x in range(size):
        if not seen[x] and p[x] == TELOMERE:
            chroms.append(walk(x, "linear"))
    for x in range(size):
        if not seen[x]:
            chroms.append(walk(x, "circular"))
    return sorted(chroms, key=lambda c: (_seq_key(c.genes), c.kind))


def _format_chromosome(c: Chromosome) -> str:
    mark = "@" if c.kind == "circular" else "$"
    return "(" + " ".join(str(g) for g in c.genes) + f"){mark}"


# ---------------------------------------------------------------------------
# Similarity and distance (half-unit scores)
# ---------------------------------------------------------------------------

def _require_same_genes(a: Genome, b: Genome) -> None:
    if a.n != b.n:
        raise GenomeError(f"gene set mismatch: {a.n} vs {b.n} genes")


def similarity_x2(a: Genome, b: Genome) -> int:
    """Twice the breakpoint similarity: common adjacencies count 2, common
    telomeric adjacencies count 1."""
    _require_same_genes(a, b)
    pa, pb = a.partner, b.partner
    common = pa == pb
    idx = np.arange(2 * a.n, dtype=np.int32)
    pairs = int(np.count_nonzero(common & (pa > idx)))
    tels = int(np.count_nonzero(common & (pa == TELOMERE)))
    return 2 * pairs + tels


def distance_x2(a: Genome, b: Genome) -> int:
    """Twice the breakpoint distance, d = n - sim."""
    return 2 * a.n - similarity_x2(a, b)


def similarity(a: Genome, b: Genome) -> float:
    return similarity_x2(a, b) / 2


def distance(a: Genome, b: Genome) -> float:
    return distance_x2(a, b) / 2


def score_str(score_x2: int) -> str:
    """Exact decimal rendering of a half-unit score (e.g. 5 -> '2.5')."""
    return str(score_x2 // 2) if score_x2 % 2 == 0 else f"{score_x2 // 2}.5"


# ---------------------------------------------------------------------------
# Duplicated genomes
# ---------------------------------------------------------------------------

class DuplicatedGenome:
    """A genome over two labeled copies of each gene.

    Copy 1 of gene g is stored as gene g, copy 2 as gene n+g, so the copy-2
    extremity of any copy-1 extremity ``x`` is ``x + 2n``.  Two duplicated
    genomes are equal when they agree up to swapping the copy labels of any
    subset of genes; equality goes through :meth:`canonical`.
    """

    __slots__ = ("n", "genome")

    def __init__(self, n: int, genome: Genome):
        if genome.n != 2 * n:
            raise GenomeError(f"duplicated genome needs {2 * n} genes, got {genome.n}")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "genome", genome)

    def __setattr__(self, name, value):
        raise AttributeError("DuplicatedGenome is immutable")

    @property
    def model(self) -> str:
        return self.genome.model

    def relabel(self, swap_genes: Iterable[int]) -> "DuplicatedGenome":
        """Swap the two copies of each listed base gene (same equivalence class)."""
        n = self.n
        perm = np.arange(4 * n, dtype=np.int32)
        for g in swap_genes:
            if not (1 <= g <= n):
                raise GenomeError(f"gene {g} out of range 1..{n}")
            a, b = tail(g), tail(n + g)
            perm[[a, a + 1]] = [b, b + 1]
            perm[[b, b + 1]] = [a, a + 1]
        old = self.genome.partner
        new = np.full(4 * n, TELOMERE, dtype=np.int32)
        vals = old[perm]  # perm is an involution, so it is its own inverse
        keep = vals >= 0
        new[keep] = perm[vals[keep]]
        return DuplicatedGenome(n, Genome(2 * n, new, self.genome.model))

    def canonical(self) -> "DuplicatedGenome":
        """Canonical representative of the copy-relabeling equivalence class.

        Chromosomes are keyed by their copy-insensitive canonical sequence,
        traversed in sorted key order, and copy labels are reassigned by
        order of appearance (first occurrence of a base gene becomes copy 1).
        The result is invariant under any input relabeling.
        """
        n = self.n
        walks = _base_canonical_walks(self)
        walks.sort(key=lambda w: (w[0], w[1]))
        assign: dict[int, list[int]] = {}
        chroms: list[Chromosome] = []
        for key, kind, signed_doubled in walks:
            out = []
            for s in signed_doubled:
                g = abs(s)
                base = g if g <= n else g - n
                slots = assign.setdefault(base, [])
                if not slots:
                    new_g = base
                elif len(slots) == 1:
                    new_g = base + n
                else:
                    raise GenomeError(f"gene {base} appears more than twice")
                slots.append(new_g)
                out.append(new_g if s > 0 else -new_g)
            chroms.append(Chromosome(kind, tuple(out)))
        genome = Genome.from_chromosomes(2 * n, chroms, self.genome.model)
        return DuplicatedGenome(n, genome)

    def __eq__(self, other):
        if not isinstance(other, DuplicatedGenome):
            return NotImplemented
        if self.n != other.n:
            return False
        return self.canonical().genome == other.canonical().genome

    def __hash__(self):
        c = self.canonical().genome
        return hash((self.n, c.partner.tobytes()))

    def __repr__(self):
        return f"<DuplicatedGenome n={self.n} over {self.genome!r}>"


def _base_canonical_walks(dup: DuplicatedGenome):
    """Chromosome walks of a duplicated genome, each rotated/oriented so its
    base-gene projection is canonical (label-invariant traversal choice)."""
    n = dup.n
    raw = decompose(dup.genome)
    out = []
    for c in raw:
        def project(seq):
            return tuple((abs(s) - n if abs(s) > n else abs(s)) * (1 if s > 0 else -1)
                         for s in seq)

        if c.kind == "linear":
            cands = [c.genes, _reverse_complement(c.genes)]
        else:
            cands = []
            for base in (c.genes, _reverse_complement(c.genes)):
                cands.extend(base[i:] + base[:i] for i in range(len(base)))
        best = min(cands, key=lambda s: _seq_key(project(s)))
        out.append((_seq_key(project(best)), c.kind, best))
    return out


def perfect_duplicate(pi: Genome) -> DuplicatedGenome:
    """The two-separate-copies perfect duplication of an ordinary genome."""
    n = pi.n
    p = pi.partner
    doubled = np.concatenate([p, np.where(p >= 0, p + 2 * n, TELOMERE)]).astype(np.int32)
    return DuplicatedGenome(n, Genome(2 * n, doubled, pi.model))


def double_similarity_x2(pi: Genome, delta: DuplicatedGenome) -> int:
    """Twice the similarity between an ordinary genome and a duplicated one:
    adjacencies twice in common count 2 (so 4 in half-units), telomeric
    adjacencies at half weight."""
    if pi.n != delta.n:
        raise GenomeError(f"gene set mismatch: {pi.n} vs {delta.n} genes")
    n = pi.n
    pa = pi.partner
    pd = delta.genome.partner
    shift = 2 * n
    idx = np.arange(2 * n, dtype=np.int32)
    xs = np.nonzero(pa > idx)[0]
    ys = pa[xs]
    hits = 0
    for copy_off in (0, shift):
        pdx = pd[xs + copy_off]
        hits += int(np.count_nonzero((pdx == ys) | (pdx == ys + shift)))
    tel = np.nonzero(pa == TELOMERE)[0]
    tel_hits = int(np.count_nonzero(pd[tel] == TELOMERE))
    tel_hits += int(np.count_nonzero(pd[tel + shift] == TELOMERE))
    return 2 * hits + tel_hits


def double_distance_x2(pi: Genome, delta: DuplicatedGenome) -> int:
    """dd = 2n - double similarity, in half-units."""
    return 4 * pi.n - double_similarity_x2(pi, delta)


def dup_similarity_bruteforce_x2(gamma: DuplicatedGenome, delta: DuplicatedGenome,
                                 max_n: int = 4) -> int:
    """Similarity between two duplicated genomes: the maximum ordinary
    similarity over all copy relabelings of one of them.  Exhaustive over
    2^n relabelings; only intended for tiny gene sets."""
    if gamma.n != delta.n:
        raise GenomeError("gene set mismatch")
    if gamma.n > max_n:
        raise SizeBoundError(f"brute-force duplicated similarity limited to n <= {max_n}")
    best = 0
    genes = range(1, gamma.n + 1)
    for r in range(gamma.n + 1):
        for combo in itertools.combinations(genes, r):
            cand = delta.relabel(combo)
            best = max(best, similarity_x2(gamma.genome, cand.genome))
    return best
