"""File formats: named genome files, Newick-style trees, and the on-disk
instance bundles written by the reduction commands.

Genome files hold one or more named genomes; each genome is a block of
chromosome lines of signed gene identifiers terminated by ``@`` (circular)
or ``$`` (linear)::

    >ancestor
    1 -2 3 @
    4 5 $

Every gene 1..n appears exactly once per ordinary genome and exactly twice
per duplicated genome; for duplicated genomes the copy labels are assigned
by order of appearance (first occurrence is copy 1).
"""

from __future__ import annotations

import json
from pathlib import Path

from bpkit.genomes import (
    Chromosome,
    DuplicatedGenome,
    Genome,
    decompose,
    infer_model,
)
from bpkit.phylogeny import PhyloTree


class ParseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# genome files
# ---------------------------------------------------------------------------

def parse_genomes(text: str):
    """Parse a genome file into a list of (name, Genome | DuplicatedGenome)."""
    blocks: list[tuple[str, int, list[tuple[str, tuple[int, ...]]]]] = []
    name = None
    chroms: list[tuple[str, tuple[int, ...]]] = []
    name_line = 0
    seen_names = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith(">"):
            if name is not None:
                blocks.append((name, name_line, chroms))
            name = line[1:].strip()
            name_line = lineno
            chroms = []
            if not name:
                raise ParseError(f"line {lineno}: empty genome name")
            if name in seen_names:
                raise ParseError(f"line {lineno}: duplicate genome name {name!r}")
            seen_names.add(name)
            continue
        if name is None:
            raise ParseError(f"line {lineno}: chromosome before any '>' header")
        tokens = line.split()
        if tokens[-1] not in ("@", "$"):
            raise ParseError(f"line {lineno}: unterminated chromosome "
                             "(expected trailing '@' or '$')")
        kind = "circular" if tokens[-1] == "@" else "linear"
        genes = []
        for tok in tokens[:-1]:
            try:
                g = int(tok)
            except ValueError:
                raise ParseError(f"line {lineno}: unknown token {tok!r}") from None
            if g == 0:
                raise ParseError(f"line {lineno}: gene identifier 0 is not allowed")
            genes.append(g)
        if not genes:
            raise ParseError(f"line {lineno}: empty chromosome")
        chroms.append((kind, tuple(genes)))
    if name is not None:
        blocks.append((name, name_line, chroms))
    if not blocks:
        raise ParseError("no genomes in file")

    out = []
    for name, lineno, chroms in blocks:
        if not chroms:
            raise ParseError(f"line {lineno}: genome {name!r} has no chromosomes")
        out.append((name, _build_genome(name, lineno, chroms)))
    return out


def _build_genome(name: str, lineno: int, chroms):
    counts: dict[int, int] = {}
    for _, genes in chroms:
        for g in genes:
            counts[abs(g)] = counts.get(abs(g), 0) + 1
    n = max(counts)
    missing = [g for g in range(1, n + 1) if g not in counts]
    if missing:
        raise ParseError(f"genome {name!r}: missing genes {missing[:5]} (of 1..{n})")
    occs = set(counts.values())
    if occs == {1}:
        kinds = [Chromosome(kind, genes) for kind, genes in chroms]
        return Genome.from_chromosomes(n, kinds)
    if occs == {2}:
        seen: dict[int, int] = {}
        doubled = []
        for kind, genes in chroms:
            row = []
            for g in genes:
                base = abs(g)
                copy = seen.get(base, 0) + 1
                seen[base] = copy
                if copy > 2:
                    raise ParseError(f"genome {name!r}: gene {base} appears more than twice")
                ident = base if copy == 1 else base + n
                row.append(ident if g > 0 else -ident)
            doubled.append(Chromosome(kind, tuple(row)))
        genome = Genome.from_chromosomes(2 * n, doubled)
        return DuplicatedGenome(n, genome)
    bad = sorted(g for g, c in counts.items() if c not in (1, 2))
    raise ParseError(f"genome {name!r}: gene {bad[0]} appears {counts[bad[0]]} times "
                     "(genomes must be all-single or all-double)")


def serialize_genomes(named) -> str:
    """Inverse of parse_genomes, writing canonical chromosome forms."""
    lines = []
    for name, genome in named:
        lines.append(f">{name}")
        if isinstance(genome, DuplicatedGenome):
            canon = genome.canonical()
            n = genome.n
            for c in decompose(canon.genome):
                projected = [(abs(g) - n if abs(g) > n else abs(g)) * (1 if g > 0 else -1)
                             for g in c.genes]
                mark = "@" if c.kind == "circular" else "$"
                lines.append(" ".join(str(g) for g in projected) + f" {mark}")
        else:
            for c in decompose(genome):
                mark = "@" if c.kind == "circular" else "$"
                lines.append(" ".join(str(g) for g in c.genes) + f" {mark}")
    return "\n".join(lines) + "\n"


def genomes_by_name(named) -> dict:
    return dict(named)


# ---------------------------------------------------------------------------
# trees
# ---------------------------------------------------------------------------

def parse_tree_edges(text: str):
    """Parse Newick-style notation into (edges, leaf names).

    Branch lengths and internal labels are accepted and ignored; a degree-2
    root (the usual artifact of rooted notation for an unrooted tree) is
    spliced out.
    """
    s = text.strip()
    if s.endswith(";"):
        s = s[:-1]
    if not s:
        raise ParseError("empty tree")
    pos = 0
    counter = 0
    edges = []
    leaves = []

    def fail(msg):
        raise ParseError(f"tree position {pos}: {msg}")

    def skip_ws():
        nonlocal pos
        while pos < len(s) and s[pos].isspace():
            pos += 1

    def parse_label():
        nonlocal pos
        start = pos
        while pos < len(s) and s[pos] not in "(),:;":
            pos += 1
        return s[start:pos].strip()

    def skip_length():
        nonlocal pos
        skip_ws()
        if pos < len(s) and s[pos] == ":":
            pos += 1
            parse_label()

    def parse_subtree():
        nonlocal pos, counter
        skip_ws()
        if pos < len(s) and s[pos] == "(":
            pos += 1
            node = f"#{counter}"
            counter += 1
            children = [parse_subtree()]
            skip_ws()
            while pos < len(s) and s[pos] == ",":
                pos += 1
                children.append(parse_subtree())
                skip_ws()
            if pos >= len(s) or s[pos] != ")":
                fail("expected ')' or ','")
            pos += 1
            parse_label()  # internal label, ignored
            skip_length()
            for child in children:
                edges.append((node, child))
            return node
        label = parse_label()
        if not label:
            fail("expected a leaf name")
        skip_length()
        if label in leaves:
            fail(f"duplicate leaf name {label!r}")
        leaves.append(label)
        return label

    root = parse_subtree()
    skip_ws()
    if pos != len(s):
        fail("trailing characters after tree")
    # splice out a degree-2 root
    deg = {}
    for a, b in edges:
        deg[a] = deg.get(a, 0) + 1
        deg[b] = deg.get(b, 0) + 1
    if deg.get(root, 0) == 2:
        nbrs = [b if a == root else a for a, b in edges if root in (a, b)]
        edges = [e for e in edges if root not in e]
        edges.append((nbrs[0], nbrs[1]))
    return edges, leaves


def build_tree(text: str, genome_map: dict) -> PhyloTree:
    edges, leaves = parse_tree_edges(text)
    missing = [name for name in leaves if name not in genome_map]
    if missing:
        raise ParseError(f"tree leaves without genomes: {missing}")
    bindings = {}
    for name in leaves:
        g = genome_map[name]
        if isinstance(g, DuplicatedGenome):
            raise ParseError(f"leaf {name!r} is a duplicated genome")
        bindings[name] = g
    return PhyloTree(edges, bindings)


# ---------------------------------------------------------------------------
# instance bundles
# ---------------------------------------------------------------------------

GENOME_FILE = "genomes.bp"
GRAPH_FILE = "graph.txt"
META_FILE = "instance.json"


def write_bundle(directory, named_genomes, graph_text: str, meta: dict):
    path = Path(directory)
    path.mkdir(parents=True, exist_ok=True)
    (path / GENOME_FILE).write_text(serialize_genomes(named_genomes))
    (path / GRAPH_FILE).write_text(graph_text)
    (path / META_FILE).write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def read_bundle(directory):
    path = Path(directory)
    for fname in (GENOME_FILE, GRAPH_FILE, META_FILE):
        if not (path / fname).exists():
            raise ParseError(f"instance bundle is missing {fname}")
    named = parse_genomes((path / GENOME_FILE).read_text())
    graph_text = (path / GRAPH_FILE).read_text()
    meta = json.loads((path / META_FILE).read_text())
    return named, graph_text, meta
