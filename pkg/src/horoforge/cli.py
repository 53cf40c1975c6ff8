"""Command-line surface tying the pipeline together.

Exit codes: 0 success, 1 usage error, 2 validation failure, 3 internal
invariant violation, 4 oracle mismatch.
"""
from __future__ import annotations

import argparse
import itertools
import sys

from .analysis import close_successors_oracle, graph_metrics, rips_edges_oracle
from .divergence import DivergenceContext, generate_divergence_graph
from .exports import (
    ParseError,
    parse_graph_text,
    read_json,
    validation_report_text,
    write_distortion_csv,
    write_dot,
    write_graphml,
    write_json,
)
from .fsm import Fsm
from .graphdef import DefiningGraph, GraphError, max_clique_size
from .machines import MachineBundle
from .rays import Ray, assemble_word
from .rips import generate_rips_graph
from .words import WordError, normalize

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VALIDATION = 2
EXIT_INTERNAL = 3
EXIT_ORACLE = 4


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


class UsageError(Exception):
    pass


def _load_graph(path: str) -> DefiningGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph_text(fh.read(), path)


def _ray(g: DefiningGraph, spec: str) -> Ray:
    names = [p.strip() for p in spec.split(",")]
    if len(names) != 2:
        raise UsageError(f"--ray wants two comma-separated vertex names, got {spec!r}")
    try:
        i, j = g.letters_named(*names)
    except KeyError as exc:
        raise UsageError(f"unknown ray vertex {exc.args[0]!r}") from None
    return Ray(i, j).validate(g)


def _export(h, fmt: str, path: str) -> None:
    if fmt == "graphml":
        write_graphml(h, path)
    elif fmt == "dot":
        write_dot(h, path)
    elif fmt == "json":
        write_json(h, path)
    else:
        raise UsageError(f"unknown format {fmt!r}")


def _dump_fsm(machine: Fsm, g: DefiningGraph, name: str, path: str) -> None:
    lines = [f"# machine {name}: {machine.num_states} states over {' '.join(g.names)}"]
    lines.append(f"start {machine.start}")
    lines.append("accepting " + " ".join(str(s) for s in sorted(machine.accepting)))
    for s in range(machine.num_states):
        lines.append(f"state {s} payload={machine.describe_payload(s, g.names)}")
        for a in sorted(machine.transitions[s]):
            lines.append(f"  {g.names[a]} -> {machine.transitions[s][a]}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _build_parser() -> _Parser:
    p = _Parser(prog="horoforge", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("validate", help="check the standing assumptions")
    v.add_argument("graph")

    f = sub.add_parser("fsm", help="build a machine and dump it")
    f.add_argument("graph")
    f.add_argument(
        "--machine",
        required=True,
        choices=["geodesic", "shortlex", "suffix", "geosuffix", "horo-odd", "horo-even"],
    )
    f.add_argument("--ray", help="A,B ray letters (needed for ray machines)")
    f.add_argument("--dump", help="write the machine to this path")
    f.add_argument("--stats", action="store_true", help="print the state-count report")

    for kind in ("rips", "divergence"):
        r = sub.add_parser(kind, help=f"generate the {kind} graph on a horosphere")
        r.add_argument("graph")
        r.add_argument("--ray", required=True)
        r.add_argument("--busemann", type=int, required=True)
        r.add_argument("--max-suffix", type=int, required=True)
        r.add_argument("--out", required=True)
        r.add_argument("--format", default="graphml", choices=["graphml", "dot", "json"])
        r.add_argument("--threads", type=int, default=1)
        if kind == "divergence":
            r.add_argument(
                "--allow-small-states",
                action="store_true",
                help="keep vertices at small states instead of warning and filtering",
            )

    s = sub.add_parser("stats", help="metrics for an exported graph (json format)")
    s.add_argument("graph")
    s.add_argument("--growth", action="store_true")
    s.add_argument("--distortion", action="store_true")
    s.add_argument("--connectivity", action="store_true")
    s.add_argument("--csv", help="write distortion/growth rows to this path")
    s.add_argument("--sample-seed", type=int, default=0)
    s.add_argument("--sample-size", type=int, default=10_000)

    o = sub.add_parser("oracle-check", help="verify generated edges against brute force")
    o.add_argument("graph")
    o.add_argument("--ray", required=True)
    o.add_argument("--busemann", type=int, required=True)
    o.add_argument("--max-suffix", type=int, required=True)
    o.add_argument("--kind", required=True, choices=["rips", "divergence"])
    o.add_argument("--depth", type=int, default=8)
    return p


def _cmd_validate(args) -> int:
    g = _load_graph(args.graph)
    ok, text = validation_report_text(g)
    print(text)
    return EXIT_OK if ok else EXIT_VALIDATION


def _cmd_fsm(args) -> int:
    g = _load_graph(args.graph)
    ok, text = validation_report_text(g)
    if not ok:
        print(text, file=sys.stderr)
        return EXIT_VALIDATION
    needs_ray = args.machine not in ("geodesic", "shortlex")
    if needs_ray and not args.ray:
        raise UsageError(f"--machine {args.machine} needs --ray")
    if needs_ray:
        bundle = MachineBundle(g, _ray(g, args.ray))
        machine = {
            "suffix": lambda: bundle.suffix,
            "geosuffix": lambda: bundle.geo_suffix,
            "horo-odd": lambda: bundle.horocyclic.m_odd,
            "horo-even": lambda: bundle.horocyclic.m_even,
        }[args.machine]()
        if args.stats:
            for name, count in bundle.state_report().items():
                print(f"{name}: {count} states")
    else:
        bundle = None
        from .machines import build_geodesic_machine, build_shortlex_machine

        machine = (build_geodesic_machine if args.machine == "geodesic" else build_shortlex_machine)(g)
        if args.stats:
            print(f"{args.machine}: {machine.num_states} states")
    if args.dump:
        _dump_fsm(machine, g, args.machine, args.dump)
        print(f"wrote {args.dump}")
    return EXIT_OK


def _cmd_generate(args, kind: str) -> int:
    g = _load_graph(args.graph)
    ok, text = validation_report_text(g)
    if not ok:
        print(text, file=sys.stderr)
        return EXIT_VALIDATION
    ray = _ray(g, args.ray)
    if kind == "rips":
        h = generate_rips_graph(g, ray, args.busemann, args.max_suffix, threads=args.threads)
    else:
        h = generate_divergence_graph(
            g,
            ray,
            args.busemann,
            args.max_suffix,
            allow_small_states=args.allow_small_states,
            threads=args.threads,
        )
    _export(h, args.format, args.out)
    print(f"{kind}: {h.vertex_count} vertices, {h.edge_count} edges -> {args.out}")
    return EXIT_OK


def _cmd_stats(args) -> int:
    h = read_json(args.graph)
    metrics = graph_metrics(h, sample_size=args.sample_size, seed=args.sample_seed)
    everything = not (args.growth or args.distortion or args.connectivity)
    if args.connectivity or everything:
        print(f"components: {metrics.component_count}")
    if args.growth or everything:
        print("growth:", " ".join(str(c) for c in metrics.growth))
    if args.distortion or everything:
        bad = metrics.distortion.violations(metrics.edge_step_bound)
        print(f"distortion rows: {len(metrics.distortion.rows)}, step bound {metrics.edge_step_bound}, violations {len(bad)}")
        if bad:
            return EXIT_INTERNAL
    if args.csv:
        write_distortion_csv(metrics, args.csv)
        print(f"wrote {args.csv}")
    return EXIT_OK


def _cmd_oracle_check(args) -> int:
    g = _load_graph(args.graph)
    ok, text = validation_report_text(g)
    if not ok:
        print(text, file=sys.stderr)
        return EXIT_VALIDATION
    ray = _ray(g, args.ray)
    bundle = MachineBundle(g, ray)
    k = args.busemann
    if args.kind == "rips":
        h = generate_rips_graph(g, ray, k, args.max_suffix, bundle=bundle)
        got = {
            tuple(sorted((h.vertices[i], h.vertices[j]), key=lambda w: (len(w), w)))
            for i, j in h.edges
        }
        want = rips_edges_oracle(g, ray, k, list(h.vertices))
        extra, missing = got - want, want - got
        print(f"rips check: {h.vertex_count} vertices, {len(got)} edges, oracle {len(want)}")
        if extra or missing:
            print(f"MISMATCH: {len(extra)} extra, {len(missing)} missing", file=sys.stderr)
            return EXIT_ORACLE
        return EXIT_OK
    ctx = DivergenceContext(bundle)
    h = generate_divergence_graph(g, ray, k, args.max_suffix, ctx=ctx)
    edges = {(h.vertices[i], h.vertices[j]) for i, j in h.edges}
    bound = 2 * max_clique_size(g) - 2
    assembled = {w: normalize(g, assemble_word(g, ray, normalize(g, w), k)) for w in h.vertices}
    bad = 0
    for u, v in itertools.combinations(h.vertices, 2):
        verdict = close_successors_oracle(bundle, assembled[u], assembled[v], args.depth, bound)
        is_edge = (u, v) in edges or (v, u) in edges
        if is_edge and not verdict.is_close:
            bad += 1
        if not is_edge and verdict.is_close:
            bad += 1
    print(f"divergence check: {h.vertex_count} vertices, {h.edge_count} edges, mismatches {bad}")
    return EXIT_OK if bad == 0 else EXIT_ORACLE


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        if args.command == "validate":
            return _cmd_validate(args)
        if args.command == "fsm":
            return _cmd_fsm(args)
        if args.command in ("rips", "divergence"):
            return _cmd_generate(args, args.command)
        if args.command == "stats":
            return _cmd_stats(args)
        if args.command == "oracle-check":
            return _cmd_oracle_check(args)
        raise UsageError(f"unknown command {args.command}")
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, GraphError, WordError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AssertionError as exc:
        print(f"internal invariant violation: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
