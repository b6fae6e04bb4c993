"""Command-line surface tying the solvers and reductions together.

Exit codes: 0 success, 2 malformed input, 3 request for an NP-hard model
variant, 4 oracle size bound exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from bpkit.genomes import (
    DuplicatedGenome,
    Genome,
    GenomeError,
    SizeBoundError,
    decompose,
    distance_x2,
    perfect_duplicate,
    score_str,
    similarity_x2,
)
from bpkit.halving import (
    brute_force_halve,
    guided_halve,
    halve,
)
from bpkit.io import (
    ParseError,
    build_tree,
    parse_genomes,
    read_bundle,
    serialize_genomes,
    write_bundle,
)
from bpkit.matching import (
    MatchingError,
    WeightedGraph,
    brute_force_max_cardinality,
    brute_force_max_weight,
)
from bpkit.median import ModelHardnessError, brute_force_median, median
from bpkit.phylogeny import steinerize, tree_score
from bpkit.reductions import (
    decode_solution,
    encode_cut,
    halving_to_hamiltonian,
    hamiltonian_to_halving,
    matching_to_median,
    maxcut_to_quartet,
    median_to_matching,
    normalize,
    parse_digraph,
    parse_graph,
    verify_instance,
)
from bpkit.reductions.graphs import GraphError, serialize_graph
from bpkit.reductions.quartet import cut_size, max_cut_bruteforce, score_encoded

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_HARD = 3
EXIT_BOUND = 4


def _genome_lines(genome) -> list[str]:
    text = serialize_genomes([("x", genome)])
    return text.splitlines()[1:]


def _emit(args, payload: dict, human: list[str]):
    if args.json:
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for line in human:
            print(line)


def _score_fields(score_x2: int) -> dict:
    return {"score_x2": score_x2, "score": score_x2 / 2}


def _load_genomes(path: str):
    return parse_genomes(Path(path).read_text())


def _named_map(named):
    return dict(named)


def _ordinary(named_map, name: str) -> Genome:
    if name not in named_map:
        raise ParseError(f"no genome named {name!r} in file")
    g = named_map[name]
    if isinstance(g, DuplicatedGenome):
        raise ParseError(f"genome {name!r} is duplicated; an ordinary genome is required")
    return g


def _duplicated(named_map, name: str) -> DuplicatedGenome:
    if name not in named_map:
        raise ParseError(f"no genome named {name!r} in file")
    g = named_map[name]
    if not isinstance(g, DuplicatedGenome):
        raise ParseError(f"genome {name!r} is not duplicated")
    return g


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_dist(args) -> int:
    named = _load_genomes(args.file)
    gmap = _named_map(named)
    a = _ordinary(gmap, args.a)
    b = _ordinary(gmap, args.b)
    if args.model:
        a = a.with_model(args.model).require_valid()
        b = b.with_model(args.model).require_valid()
    sim = similarity_x2(a, b)
    dist = distance_x2(a, b)
    payload = {
        "command": "dist",
        "inputs": {"file": args.file, "a": args.a, "b": args.b, "model": args.model},
        "score_x2": sim,
        "score": sim / 2,
        "genomes": {},
        "diagnostics": {"n": a.n, "distance_x2": dist, "distance": dist / 2},
    }
    human = [f"n = {a.n}", f"sim = {score_str(sim)}", f"d = {score_str(dist)}"]
    _emit(args, payload, human)
    return EXIT_OK


def _pick_medians(args, named):
    gmap = _named_map(named)
    if args.names:
        names = [s for s in args.names.split(",") if s]
        return [(_ordinary(gmap, name)) for name in names], names
    # default: every ordinary genome in file order
    genomes = []
    names = []
    for name, g in named:
        if not isinstance(g, DuplicatedGenome):
            genomes.append(g)
            names.append(name)
    if not genomes:
        raise ParseError("no ordinary genomes in file")
    return genomes, names


def cmd_median(args) -> int:
    named = _load_genomes(args.file)
    genomes, names = _pick_medians(args, named)
    genomes = [g.with_model(args.model).require_valid() if args.model != g.model else g
               for g in genomes]
    alpha, score = median(genomes, args.model)
    payload = {
        "command": "median",
        "inputs": {"file": args.file, "model": args.model, "names": names},
        **_score_fields(score),
        "genomes": {"median": _genome_lines(alpha)},
        "diagnostics": {"k": len(genomes), "n": alpha.n},
    }
    human = [f"score = {score_str(score)}"] + [">median"] + _genome_lines(alpha)
    _emit(args, payload, human)
    return EXIT_OK


def cmd_halving(args) -> int:
    named = _load_genomes(args.file)
    delta = _duplicated(_named_map(named), args.dup)
    alpha, dd = halve(delta, args.model)
    payload = {
        "command": "halving",
        "inputs": {"file": args.file, "dup": args.dup, "model": args.model},
        **_score_fields(dd),
        "genomes": {"ancestor": _genome_lines(alpha)},
        "diagnostics": {"n": delta.n, "double_distance_x2": dd},
    }
    human = [f"dd = {score_str(dd)}", ">ancestor"] + _genome_lines(alpha)
    _emit(args, payload, human)
    return EXIT_OK


def cmd_guided_halving(args) -> int:
    named = _load_genomes(args.file)
    gmap = _named_map(named)
    delta = _duplicated(gmap, args.dup)
    rho = _ordinary(gmap, args.guide)
    alpha, total = guided_halve(delta, rho, args.model)
    payload = {
        "command": "guided-halving",
        "inputs": {"file": args.file, "dup": args.dup, "guide": args.guide,
                   "model": args.model},
        **_score_fields(total),
        "genomes": {"ancestor": _genome_lines(alpha)},
        "diagnostics": {"n": delta.n},
    }
    human = [f"dd + d = {score_str(total)}", ">ancestor"] + _genome_lines(alpha)
    _emit(args, payload, human)
    return EXIT_OK


def cmd_phylogeny(args) -> int:
    named = _load_genomes(args.genomes)
    tree = build_tree(Path(args.tree).read_text(), _named_map(named))
    result = steinerize(tree, model=args.model, init=args.init, seed=args.seed,
                        max_rounds=args.max_rounds)
    genomes = {str(v): _genome_lines(g) for v, g in sorted(result.assignment.items(),
                                                           key=lambda kv: str(kv[0]))}
    payload = {
        "command": "phylogeny",
        "inputs": {"genomes": args.genomes, "tree": args.tree, "init": args.init,
                   "seed": args.seed, "max_rounds": args.max_rounds},
        **_score_fields(result.score_x2),
        "genomes": genomes,
        "diagnostics": {"rounds": result.rounds, "trace_x2": list(result.trace)},
    }
    human = [f"score = {score_str(result.score_x2)}", f"rounds = {result.rounds}"]
    for v, lines in genomes.items():
        human.append(f">{v}")
        human.extend(lines)
    _emit(args, payload, human)
    return EXIT_OK


def _default_out(args, kind: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(Path(args.graph).stem + "-" + kind)


def cmd_reduce_matching_median(args) -> int:
    g = parse_graph(Path(args.graph).read_text())
    inst = matching_to_median(g)
    out = _default_out(args, "matching-median")
    meta = {
        "kind": "matching-median",
        "vertex_count": g.vertex_count,
        "edge_count": g.edge_count,
        "n_genes": inst.n_genes,
        "subdivided_edges": list(inst.subdivided),
        "edge_repr": [list(r[1]) if r[0] == "subdiv" else list(r[1])
                      for r in inst.edge_repr],
        "edge_kind": [r[0] for r in inst.edge_repr],
        "extremities_per_edge": inst.extremities_per_edge,
    }
    write_bundle(out, [(f"pi{i+1}", g_) for i, g_ in enumerate(inst.genomes)],
                 serialize_graph(g), meta)
    payload = {
        "command": "reduce matching-median",
        "inputs": {"graph": args.graph},
        "score_x2": None,
        "score": None,
        "genomes": {},
        "diagnostics": {"out": str(out), **meta},
    }
    human = [f"wrote {out}/ (genes = {inst.n_genes}, "
             f"subdivided = {len(inst.subdivided)}, "
             f"extremities/edge = {inst.extremities_per_edge:.2f})"]
    _emit(args, payload, human)
    return EXIT_OK


def cmd_reduce_hamiltonian_halving(args) -> int:
    d = parse_digraph(Path(args.digraph).read_text())
    variant = "linear" if args.linear else "circular"
    removed = None
    if args.drop:
        parts = args.drop.split(",")
        if len(parts) != 2:
            raise ParseError("--drop expects 'u,v'")
        removed = (int(parts[0]) - 1, int(parts[1]) - 1)
    inst = hamiltonian_to_halving(d, variant, removed)
    out = Path(args.out) if args.out else Path(Path(args.digraph).stem + "-halving")
    meta = {
        "kind": "hamiltonian-halving",
        "variant": variant,
        "removed_arc": None if inst.removed_arc is None
        else [inst.removed_arc[0] + 1, inst.removed_arc[1] + 1],
        "vertex_count": d.vertex_count,
        "similarity_threshold_x2": inst.similarity_threshold_x2(),
        "visit_order": [[v + 1, c] for v, c in inst.visit_order],
    }
    write_bundle(out, [("delta", inst.delta)], serialize_graph(d), meta)
    payload = {
        "command": "reduce hamiltonian-halving",
        "inputs": {"digraph": args.digraph, "variant": variant},
        "score_x2": None,
        "score": None,
        "genomes": {"delta": _genome_lines(inst.delta)},
        "diagnostics": {"out": str(out), **meta},
    }
    human = [f"wrote {out}/ (n = {d.vertex_count}, variant = {variant}, "
             f"similarity threshold = {score_str(inst.similarity_threshold_x2())})"]
    _emit(args, payload, human)
    return EXIT_OK


def cmd_reduce_maxcut_quartet(args) -> int:
    g = parse_graph(Path(args.graph).read_text())
    inst = maxcut_to_quartet(g)
    out = _default_out(args, "quartet")
    classes = inst.class_sets()
    meta = {
        "kind": "maxcut-quartet",
        "vertex_count": g.vertex_count,
        "edge_count": inst.m,
        "n_genes": inst.n_genes,
        "offset": 20 * inst.m,
        "offset_x2": inst.offset_x2,
        "class_sizes": {name: len(s) for name, s in classes.items()},
        "edge_slots": [list(s) for s in inst.edge_slots],
    }
    write_bundle(out, [(f"pi{i+1}", g_) for i, g_ in enumerate(inst.genomes)],
                 serialize_graph(g), meta)
    payload = {
        "command": "reduce maxcut-quartet",
        "inputs": {"graph": args.graph},
        "score_x2": None,
        "score": None,
        "genomes": {},
        "diagnostics": {"out": str(out), **meta},
    }
    human = [f"wrote {out}/ (m = {inst.m}, offset = {20 * inst.m}, "
             f"genes = {inst.n_genes})"]
    _emit(args, payload, human)
    return EXIT_OK


def _load_quartet_bundle(directory):
    named, graph_text, meta = read_bundle(directory)
    if meta.get("kind") != "maxcut-quartet":
        raise ParseError(f"{directory} is not a maxcut-quartet bundle")
    g = parse_graph(graph_text)
    inst = maxcut_to_quartet(g)
    gmap = dict(named)
    for i in range(4):
        name = f"pi{i+1}"
        if name not in gmap:
            raise ParseError(f"bundle is missing genome {name}")
        if gmap[name] != inst.genomes[i]:
            raise ParseError(f"bundle genome {name} does not match the graph's construction")
    return inst


def cmd_verify_quartet(args) -> int:
    inst = _load_quartet_bundle(args.instance)
    report = verify_instance(inst, exhaustive=True if args.exhaustive else None)
    diag = {
        "ok": report.ok,
        "failures": report.failures,
        "colorings_checked": report.colorings_checked,
        "offset": 20 * inst.m,
        "max_encode_score_x2": report.max_encode_score_x2,
    }
    human = []
    if report.ok:
        human.append(f"all identities hold; offset {20 * inst.m}")
    else:
        human.append("verification FAILED:")
        human.extend("  " + f for f in report.failures)
    if report.ok and inst.graph.vertex_count <= 16:
        mc, _ = max_cut_bruteforce(inst.graph)
        diag["maxcut"] = mc
        diag["optimum_encode_score"] = 20 * inst.m + mc
        human[-1] = (f"all identities hold; offset {20 * inst.m}; maxcut {mc}; "
                     f"optimum encode score {20 * inst.m + mc}")
    payload = {
        "command": "verify quartet",
        "inputs": {"instance": args.instance, "exhaustive": bool(args.exhaustive)},
        "score_x2": report.max_encode_score_x2,
        "score": None if report.max_encode_score_x2 is None
        else report.max_encode_score_x2 / 2,
        "genomes": {},
        "diagnostics": diag,
    }
    _emit(args, payload, human)
    return EXIT_OK if report.ok else EXIT_PARSE


def _load_solution(path, inst, need_alpha2: bool):
    named = parse_genomes(Path(path).read_text())
    gmap = dict(named)
    if "alpha1" in gmap:
        a1 = gmap["alpha1"]
    elif named:
        a1 = named[0][1]
    else:
        raise ParseError("solution file has no genomes")
    a2 = gmap.get("alpha2")
    if need_alpha2 and a2 is None:
        if len(named) >= 2:
            a2 = named[1][1]
        else:
            raise ParseError("solution file needs alpha1 and alpha2")
    for g in (a1, a2):
        if g is not None and (isinstance(g, DuplicatedGenome) or g.n != inst.n_genes):
            raise ParseError("solution genomes must be ordinary genomes over the "
                             f"instance universe ({inst.n_genes} genes)")
    return a1, a2


def cmd_decode_quartet(args) -> int:
    inst = _load_quartet_bundle(args.instance)
    a1, a2 = _load_solution(args.solution, inst, need_alpha2=False)
    coloring = decode_solution(inst, a1)
    cut = cut_size(inst.graph, coloring)
    diag = {"coloring": {str(u + 1): c for u, c in coloring.items()},
            "cut_size": cut}
    score = None
    if a2 is not None:
        score = score_encoded(inst, a1, a2)
        diag["solution_score_x2"] = score
    payload = {
        "command": "decode quartet",
        "inputs": {"instance": args.instance, "solution": args.solution},
        "score_x2": score,
        "score": None if score is None else score / 2,
        "genomes": {},
        "diagnostics": diag,
    }
    human = [f"cut size = {cut}"]
    human += [f"vertex {u + 1}: {c}" for u, c in sorted(coloring.items())]
    if score is not None:
        human.append(f"solution score = {score_str(score)}")
    _emit(args, payload, human)
    return EXIT_OK


def cmd_normalize_quartet(args) -> int:
    inst = _load_quartet_bundle(args.instance)
    a1, a2 = _load_solution(args.solution, inst, need_alpha2=True)
    before = score_encoded(inst, a1, a2)
    b1, b2 = normalize(inst, a1, a2)
    after = score_encoded(inst, b1, b2)
    payload = {
        "command": "normalize quartet",
        "inputs": {"instance": args.instance, "solution": args.solution},
        **_score_fields(after),
        "genomes": {"alpha1": _genome_lines(b1), "alpha2": _genome_lines(b2)},
        "diagnostics": {"score_before_x2": before, "score_after_x2": after},
    }
    human = [f"score: {score_str(before)} -> {score_str(after)}",
             ">alpha1"] + _genome_lines(b1) + [">alpha2"] + _genome_lines(b2)
    _emit(args, payload, human)
    return EXIT_OK


def cmd_oracle_median(args) -> int:
    named = _load_genomes(args.file)
    genomes, names = _pick_medians(args, named)
    alpha, score = brute_force_median(genomes, args.model)
    payload = {
        "command": "oracle median",
        "inputs": {"file": args.file, "model": args.model, "names": names},
        **_score_fields(score),
        "genomes": {"median": _genome_lines(alpha)},
        "diagnostics": {},
    }
    human = [f"score = {score_str(score)}", ">median"] + _genome_lines(alpha)
    _emit(args, payload, human)
    return EXIT_OK


def cmd_oracle_halving(args) -> int:
    named = _load_genomes(args.file)
    delta = _duplicated(_named_map(named), args.dup)
    alpha, dd = brute_force_halve(delta, args.model)
    payload = {
        "command": "oracle halving",
        "inputs": {"file": args.file, "dup": args.dup, "model": args.model},
        **_score_fields(dd),
        "genomes": {"ancestor": _genome_lines(alpha)},
        "diagnostics": {},
    }
    human = [f"dd = {score_str(dd)}", ">ancestor"] + _genome_lines(alpha)
    _emit(args, payload, human)
    return EXIT_OK


def cmd_oracle_matching(args) -> int:
    g = parse_graph(Path(args.graph).read_text())
    wg = WeightedGraph(g.vertex_count, [(a, b, 2) for a, b in g.edges])
    m = brute_force_max_cardinality(wg)
    payload = {
        "command": "oracle matching",
        "inputs": {"graph": args.graph},
        "score_x2": None,
        "score": None,
        "genomes": {},
        "diagnostics": {"size": m.size,
                        "edges": [[a + 1, b + 1] for a, b in m.pairs]},
    }
    human = [f"maximum matching size = {m.size}"]
    human += [f"{a + 1} {b + 1}" for a, b in m.pairs]
    _emit(args, payload, human)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bpkit",
        description="Breakpoint-distance genome rearrangement toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_json(p):
        p.add_argument("--json", action="store_true",
                       help="emit a machine-readable JSON report")

    p = sub.add_parser("dist", help="breakpoint similarity and distance")
    p.add_argument("file")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--model", choices=["general", "circular", "linear",
                                       "multilinear", "mixed"])
    add_json(p)
    p.set_defaults(func=cmd_dist)

    p = sub.add_parser("median", help="breakpoint median of k genomes")
    p.add_argument("file")
    p.add_argument("--model", choices=["general", "mixed", "circular",
                                       "linear", "multilinear"],
                   default="general")
    p.add_argument("--names", help="comma-separated genome names (default: all)")
    add_json(p)
    p.set_defaults(func=cmd_median)

    p = sub.add_parser("halving", help="genome halving")
    p.add_argument("file")
    p.add_argument("--dup", required=True)
    p.add_argument("--model", choices=["general", "mixed", "circular",
                                       "linear", "multilinear"],
                   default="general")
    add_json(p)
    p.set_defaults(func=cmd_halving)

    p = sub.add_parser("guided-halving", help="guided genome halving")
    p.add_argument("file")
    p.add_argument("--dup", required=True)
    p.add_argument("--guide", required=True)
    p.add_argument("--model", choices=["general", "mixed", "circular",
                                       "linear", "multilinear"],
                   default="general")
    add_json(p)
    p.set_defaults(func=cmd_guided_halving)

    p = sub.add_parser("phylogeny", help="small phylogeny by Steinerization")
    p.add_argument("genomes")
    p.add_argument("--tree", required=True)
    p.add_argument("--init", choices=["nearest-leaf", "random"],
                   default="nearest-leaf")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-rounds", type=int)
    p.add_argument("--model", choices=["general", "mixed"], default="general")
    add_json(p)
    p.set_defaults(func=cmd_phylogeny)

    p = sub.add_parser("reduce", help="build hardness-reduction instances")
    rsub = p.add_subparsers(dest="reduction", required=True)

    rp = rsub.add_parser("matching-median",
                         help="cubic matching -> breakpoint median")
    rp.add_argument("graph")
    rp.add_argument("--out")
    add_json(rp)
    rp.set_defaults(func=cmd_reduce_matching_median)

    rp = rsub.add_parser("hamiltonian-halving",
                         help="directed Hamiltonicity -> halving")
    rp.add_argument("digraph")
    rp.add_argument("--linear", action="store_true",
                    help="linear variant (Hamiltonian path)")
    rp.add_argument("--drop", help="arc 'u,v' removed in the linear variant")
    rp.add_argument("--out")
    add_json(rp)
    rp.set_defaults(func=cmd_reduce_hamiltonian_halving)

    rp = rsub.add_parser("maxcut-quartet",
                         help="cubic max-cut -> breakpoint quartet")
    rp.add_argument("graph")
    rp.add_argument("--out")
    add_json(rp)
    rp.set_defaults(func=cmd_reduce_maxcut_quartet)

    p = sub.add_parser("verify", help="verify a reduction instance")
    vsub = p.add_subparsers(dest="what", required=True)
    vp = vsub.add_parser("quartet")
    vp.add_argument("instance")
    vp.add_argument("--exhaustive", action="store_true")
    add_json(vp)
    vp.set_defaults(func=cmd_verify_quartet)

    p = sub.add_parser("decode", help="decode a solution of a reduction instance")
    dsub = p.add_subparsers(dest="what", required=True)
    dp = dsub.add_parser("quartet")
    dp.add_argument("instance")
    dp.add_argument("--solution", required=True)
    add_json(dp)
    dp.set_defaults(func=cmd_decode_quartet)

    p = sub.add_parser("normalize", help="normalize a quartet solution")
    nsub = p.add_subparsers(dest="what", required=True)
    np_ = nsub.add_parser("quartet")
    np_.add_argument("instance")
    np_.add_argument("--solution", required=True)
    add_json(np_)
    np_.set_defaults(func=cmd_normalize_quartet)

    p = sub.add_parser("oracle", help="size-guarded brute-force solvers")
    osub = p.add_subparsers(dest="what", required=True)

    op = osub.add_parser("median")
    op.add_argument("file")
    op.add_argument("--model", choices=["general", "mixed"], default="general")
    op.add_argument("--names")
    add_json(op)
    op.set_defaults(func=cmd_oracle_median)

    op = osub.add_parser("halving")
    op.add_argument("file")
    op.add_argument("--dup", required=True)
    op.add_argument("--model", choices=["general", "mixed"], default="general")
    add_json(op)
    op.set_defaults(func=cmd_oracle_halving)

    op = osub.add_parser("matching")
    op.add_argument("graph")
    add_json(op)
    op.set_defaults(func=cmd_oracle_matching)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModelHardnessError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HARD
    except SizeBoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BOUND
    except (ParseError, GenomeError, GraphError, MatchingError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
