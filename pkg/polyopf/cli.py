"""Command-line front end.

Exit codes: 0 certified global optimum, 2 bound only, 3 solver failure,
1 configuration or input error.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import config
from .casedata import corpus_dir, list_corpus, load_case
from .errors import PolyOpfError
from .pipeline import build_relaxation, prepare, run, sweep
from .relax import build_csp, chordal_cliques, relaxation_order
from .reports import render, render_history_csv, render_json, render_sweep
from .run_config import FORMULATIONS, METHODS, OUTPUTS, RunConfig, parse_override
from .sdp import write_sdpa

logger = logging.getLogger(__name__)

EXIT_CONFIG_ERROR = 1


def _run_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("case", nargs="?", help="Corpus case name or path to a .m file")
    parser.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="Override a case field, e.g. V2max=1.022 or S2-3max=28.35 (repeatable)",
    )
    parser.add_argument("--formulation", choices=FORMULATIONS)
    parser.add_argument("--method", choices=METHODS)
    parser.add_argument("--level", type=int, help="Hierarchy level (1 = first admissible)")
    parser.add_argument("--eps", type=float, help="DIGS relative stopping tolerance ('inf' stops after one master)")
    parser.add_argument("--max-iter", type=int, help="DIGS iteration cap")
    parser.add_argument("--time-budget", type=float, help="DIGS time budget in seconds")
    parser.add_argument("--merge-threshold", type=int, help="Clique merging threshold on basis size")
    parser.add_argument("--decompose", action="store_true", default=None,
                        help="Split the largest PSD block along its chordal cliques")
    parser.add_argument("--output", choices=OUTPUTS)
    parser.add_argument("-c", "--config", type=Path, help="Run configuration file (key = value)")


def build_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < config file < command-line flags."""
    cfg = RunConfig.load(args.config) if args.config else RunConfig()
    updates = {
        "case": args.case,
        "formulation": args.formulation,
        "method": args.method,
        "level": args.level,
        "eps": args.eps,
        "max_iter": args.max_iter,
        "time_budget": args.time_budget,
        "merge_threshold": args.merge_threshold,
        "decompose": args.decompose,
        "output": args.output,
        "jobs": getattr(args, "jobs", None),
    }
    for key, value in updates.items():
        if value is not None:
            setattr(cfg, key, value)
    for text in args.overrides:
        key, value = parse_override(text)
        cfg.overrides[key] = value
    return cfg.validate()


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    report = run(cfg)
    text = render([report], cfg.output)
    print(text if text.endswith("\n") else text + "\n", end="")
    if args.history:
        if report.history:
            Path(args.history).write_text(render_history_csv(report.history))
            print(f"History written to {args.history}", file=sys.stderr)
        else:
            logger.warning("no iteration history for method %s", cfg.method)
    if args.save:
        args.save.write_text(render_json([report]) + "\n")
    return report.exit_code


def cmd_sweep(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    values = [float(v) for v in args.values.split(",") if v.strip()] if args.values else []
    methods = [m.strip() for m in args.methods.split(",") if m.strip()] if args.methods else [cfg.spec]
    table = sweep(cfg, args.parameter, values, methods, jobs=cfg.jobs)
    if cfg.output == "json":
        print(json.dumps(table.to_dict(), indent=2))
    else:
        print(render_sweep(table), end="")
    return 0 if not values else table.exit_code


def cmd_export_sdpa(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    sdp = build_relaxation(prepare(cfg))
    text = write_sdpa(sdp)
    if args.out:
        args.out.write_text(text)
        print(f"Wrote {sdp.describe()} to {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_dump_cliques(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    pp = prepare(cfg).pp
    order = relaxation_order(pp, cfg.level)
    cd = chordal_cliques(build_csp(pp), order=order, merge_threshold=cfg.merge_threshold)
    print(cd.dump(pp.var_names if args.names else None), end="")
    return 0


def cmd_cases(args: argparse.Namespace) -> int:
    directory = corpus_dir()
    print(f"Corpus: {directory}")
    for name in list_corpus(directory):
        info = load_case(directory / f"{name}.m").summary()
        print(
            f"  {name:<10} {info['buses']:>4} buses {info['generators']:>4} gens "
            f"{info['branches']:>4} branches {info['flow_limited']:>4} flow limits"
        )
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .web import create_app

    app = create_app()
    print("=" * 50)
    print("  polyopf - ACOPF bound server")
    print("=" * 50)
    print(f"  Corpus: {corpus_dir()}")
    print(f"  Open http://{args.host}:{args.port}/api for the endpoint list")
    print("=" * 50)
    app.run(host=args.host, port=args.port)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="polyopf", description="Polynomial-optimization bounds for ACOPF")
    parser.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logs")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="Run one relaxation and report the bound")
    _run_options(p)
    p.add_argument("--history", type=Path, help="Write the DIGS iteration history as CSV")
    p.add_argument("--save", type=Path, help="Also write the report as JSON")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="Sweep one override over several values and methods")
    _run_options(p)
    p.add_argument("--parameter", required=True, help="Override key, e.g. V2max")
    p.add_argument("--values", default="", help="Comma-separated values")
    p.add_argument("--methods", default="", help="Comma-separated METHOD-FORMULATION-LEVEL specs")
    p.add_argument("--jobs", type=int, help="Parallel sweep cells")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("export-sdpa", help="Write the configured relaxation in SDPA sparse format")
    _run_options(p)
    p.add_argument("-o", "--out", type=Path, help="Output file (default: stdout)")
    p.set_defaults(func=cmd_export_sdpa)

    p = sub.add_parser("dump-cliques", help="Print the clique decomposition of the formulation")
    _run_options(p)
    p.add_argument("--names", action="store_true", help="Print variable names instead of indices")
    p.set_defaults(func=cmd_dump_cliques)

    p = sub.add_parser("cases", help="List the case corpus")
    p.set_defaults(func=cmd_cases)

    p = sub.add_parser("serve", help="Start the HTTP API")
    p.add_argument("--host", default=config.HOST)
    p.add_argument("-p", "--port", type=int, default=config.PORT)
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    level = (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except PolyOpfError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG_ERROR


if __name__ == "__main__":
    raise SystemExit(main())
