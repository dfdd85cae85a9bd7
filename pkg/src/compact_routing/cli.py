"""Command line: compact-routing {generate,check,build,route,verify,report}."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .bitcodec import read_graph, write_graph
from .errors import CompactRoutingError
from .graphs import PortAssignment, generate_uniform, lemma_summary
from .harness import (
    SCHEME_ORDER,
    ExperimentConfig,
    emit_report,
    run_experiments,
    shipped_config,
    verify_scheme,
)
from .schemes import BUILDERS, NEEDS_PORTS, ModelSpec, build, load_scheme, measure_size, save_scheme
from .simulator import result_dict, route, trace_lines


def _graph(args):
    if args.graph:
        return read_graph(args.graph)
    if args.n is None:
        raise SystemExit("give --graph FILE or --n N")
    return generate_uniform(args.n, args.seed)


def _scheme(args, g):
    if getattr(args, "scheme_file", None):
        return load_scheme(args.scheme_file, g)
    model = ModelSpec.parse(args.model) if args.model else None
    ports = None
    if args.scheme in NEEDS_PORTS:
        ports = PortAssignment.random(g, args.seed if args.port_seed is None else args.port_seed)
    return build(args.scheme, g, args.c, model, ports)


def _emit(text: str, out) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_generate(args) -> int:
    g = generate_uniform(args.n, args.seed)
    if args.out:
        write_graph(args.out, g)
    print(json.dumps({"n": g.n, "seed": args.seed, "edges": g.edge_count}))
    return 0


def cmd_check(args) -> int:
    g = _graph(args)
    res = lemma_summary(g, args.c, args.k)
    print(json.dumps({"n": g.n, "c": args.c, **res}))
    return 0 if all(res.values()) else 1


def cmd_build(args) -> int:
    g = _graph(args)
    s = _scheme(args, g)
    size = measure_size(s)
    if args.out:
        save_scheme(args.out, s)
    print(json.dumps({
        "scheme": s.name,
        "model": str(s.model),
        "n": s.n,
        "total_bits": size.total_bits,
        "max_node_bits": size.max_node_bits,
        "label_bits": sum(size.label_bits),
        "breakdown": size.breakdown,
    }))
    return 0


def cmd_route(args) -> int:
    g = _graph(args)
    s = _scheme(args, g)
    r = route(g, s, args.src, args.dst, trace=args.trace)
    if args.trace:
        for line in trace_lines(r):
            print(line)
    d = result_dict(r)
    d["hops"] = r.hops
    d["stretch"] = None if r.stretch is None else f"{r.stretch.numerator}/{r.stretch.denominator}"
    print(json.dumps(d))
    return 0 if r.delivered else 1


def cmd_verify(args) -> int:
    g = _graph(args)
    s = _scheme(args, g)
    failures, stats = verify_scheme(g, s)
    print(json.dumps({
        "scheme": s.name,
        "model": str(s.model),
        "pairs": stats.pairs,
        "max_stretch": f"{stats.max_stretch.numerator}/{stats.max_stretch.denominator}",
        "max_traversals": stats.max_traversals,
        "failures": failures,
    }))
    return 1 if failures else 0


def cmd_report(args) -> int:
    if args.config:
        p = Path(args.config)
        cfg = ExperimentConfig.from_json(p) if p.exists() else shipped_config(args.config)
    else:
        cfg = ExperimentConfig(
            n_values=args.n_list or [128],
            seeds=args.seeds or [args.seed],
            c=args.c,
            schemes=args.scheme_list or list(SCHEME_ORDER),
            models=dict(m.split("=", 1) for m in args.model_list or []),
        )
    rows = run_experiments(cfg)
    _emit(emit_report(rows, args.format, timing=args.timing), args.out)
    return 0 if all(r.ok and r.budget_ok for r in rows) else 1


def parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="compact-routing", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, graph=True):
        sp.add_argument("--c", type=float, default=3)
        sp.add_argument("--seed", type=int, default=1)
        if graph:
            sp.add_argument("--n", type=int)
            sp.add_argument("--graph", help="graph file written by 'generate --out'")

    def scheme_args(sp):
        sp.add_argument("--scheme", choices=sorted(BUILDERS), default="sp_neighbor_known")
        sp.add_argument("--model", help="e.g. II,alpha or IB")
        sp.add_argument("--port-seed", type=int, help="seed for the fixed port assignment (default: --seed)")
        sp.add_argument("--scheme-file", help="load a scheme saved by 'build --out' instead of building")

    sp = sub.add_parser("generate", help="sample a uniform random graph")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--seed", type=int, default=1)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_generate)

    sp = sub.add_parser("check", help="run the degree, diameter and coverage checks")
    common(sp)
    sp.add_argument("--k", type=float, default=2.0, help="degree deviation constant")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("build", help="build a scheme and print its size")
    common(sp)
    scheme_args(sp)
    sp.add_argument("--out", help="write the scheme file here")
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("route", help="route one message")
    common(sp)
    scheme_args(sp)
    sp.add_argument("--src", type=int, required=True)
    sp.add_argument("--dst", type=int, required=True)
    sp.add_argument("--trace", action="store_true")
    sp.set_defaults(func=cmd_route)

    sp = sub.add_parser("verify", help="check every route against BFS")
    common(sp)
    scheme_args(sp)
    sp.set_defaults(func=cmd_verify)

    sp = sub.add_parser("report", help="run an experiment grid and write the report")
    common(sp, graph=False)
    sp.add_argument("--config", help="JSON config path or shipped config name (acceptance, table1, smoke)")
    sp.add_argument("--n", dest="n_list", type=int, action="append")
    sp.add_argument("--seeds", type=int, nargs="+")
    sp.add_argument("--scheme", dest="scheme_list", choices=sorted(BUILDERS), action="append")
    sp.add_argument("--model", dest="model_list", action="append", metavar="SCHEME=MODEL")
    sp.add_argument("--format", choices=["csv", "json"], default="csv")
    sp.add_argument("--out")
    sp.add_argument("--timing", action="store_true", help="include the runtime column")
    sp.set_defaults(func=cmd_report)
    return p


def main(argv=None) -> int:
    args = parser().parse_args(argv)
    try:
        return args.func(args)
    except (CompactRoutingError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
