"""Command-line entry points: simulate, sensitivity, gen-kernel."""

from __future__ import annotations

import argparse
import os
import sys

from . import corpus
from .engine import simulate
from .machine import (ConfigError, UnknownKind, UnknownParameter, UnknownResource,
                      accelerable_parameters, dump_config, load_config)
from .report import (emit_heatmap, format_instruction_table, format_run_report,
                     format_sensitivity, render_instruction_table, run_report_json)
from .sensitivity import (DEFAULT_THRESHOLD, DEFAULT_WEIGHTS, classify,
                          power_subsets, sweep_single, sweep_subsets)
from .trace import TraceError, parse_trace, write_trace


class _Parser(argparse.ArgumentParser):
    # input mistakes exit 1, not argparse's default 2
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="sensim",
                     description="Abstract out-of-order CPU model with "
                                 "sensitivity-based bottleneck analysis.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="estimate one trace on one machine")
    sim.add_argument("trace", help="trace file (one record per line)")
    sim.add_argument("--config", required=True, help="machine configuration file")
    sim.add_argument("--report", choices=("json", "table"), default="table")
    sim.add_argument("--per-instruction", action="store_true",
                     help="include the per-pc resource usage table")

    sens = sub.add_parser("sensitivity", help="sweep accelerations to find bottlenecks")
    sens.add_argument("trace")
    sens.add_argument("--config", required=True)
    sens.add_argument("--weights", default=",".join(str(w) for w in DEFAULT_WEIGHTS),
                      help="comma-separated acceleration weights (all >= 1)")
    sens.add_argument("--resources", default="all",
                      help="'all' or a comma-separated parameter list")
    sens.add_argument("--subsets", default=None,
                      help="semicolon-separated groups (a,b;c,d) or 'auto[:k]' "
                           "for the power set up to size k; swept at the "
                           "largest weight")
    sens.add_argument("--threshold", type=float, default=DEFAULT_THRESHOLD)
    sens.add_argument("--heatmap", default=None, metavar="OUT.csv|OUT.svg",
                      help="write the (parameter, weight) grid to a file")
    sens.add_argument("--workers", type=int, default=min(4, os.cpu_count() or 1),
                      help="worker processes for the sweep fan-out")

    gen = sub.add_parser("gen-kernel", help="write a built-in kernel trace + config")
    gen.add_argument("name", choices=sorted(corpus.KERNELS))
    gen.add_argument("--iters", type=int, default=None)
    gen.add_argument("--footprint", type=int, default=None,
                     help="buffer bytes for the stream kernel")
    gen.add_argument("--out", default=None,
                     help="trace file path (default <name>.trace); the config "
                          "goes next to it with a .cfg suffix")
    return parser


def _load_inputs(args):
    with open(args.trace, "r", encoding="utf-8") as fh:
        trace = list(parse_trace(fh))
    with open(args.config, "r", encoding="utf-8") as fh:
        config = load_config(fh.read())
    return trace, config


def _cmd_simulate(args) -> int:
    trace, config = _load_inputs(args)
    result = simulate(trace, config)
    rows = None
    if args.per_instruction:
        rows = render_instruction_table(result) if result.total_cycles > 0 else []
    if args.report == "json":
        sys.stdout.write(run_report_json(result, rows))
    else:
        sys.stdout.write(format_run_report(result))
        if rows:
            sys.stdout.write("\n" + format_instruction_table(rows))
    return 0


def _parse_subsets(raw: str, parameters: list[str]) -> list[tuple[str, ...]]:
    if raw.startswith("auto"):
        _, _, k = raw.partition(":")
        return power_subsets(parameters, max_size=int(k) if k else 3)
    groups = [tuple(p.strip() for p in group.split(",") if p.strip())
              for group in raw.split(";")]
    return [g for g in groups if g]


def _cmd_sensitivity(args) -> int:
    trace, config = _load_inputs(args)
    weights = [float(w) for w in args.weights.split(",") if w.strip()]
    if not weights or any(w < 1 for w in weights):
        raise ConfigError("weights must be numbers >= 1")
    if args.resources == "all":
        parameters = accelerable_parameters(config)
    else:
        parameters = [p.strip() for p in args.resources.split(",") if p.strip()]

    if args.subsets:
        subsets = _parse_subsets(args.subsets, parameters)
        report = sweep_subsets(trace, config, subsets, max(weights),
                               workers=args.workers)
    else:
        report = sweep_single(trace, config, parameters, weights,
                              workers=args.workers)
    report.verdicts = classify(report, args.threshold)
    sys.stdout.write(format_sensitivity(report))
    if args.heatmap:
        fmt = "svg" if args.heatmap.endswith(".svg") else "csv"
        with open(args.heatmap, "w", encoding="utf-8") as fh:
            fh.write(emit_heatmap(report, fmt))
        print(f"heatmap written to {args.heatmap}")
    return 0


def _cmd_gen_kernel(args) -> int:
    trace, config = corpus.generate(args.name, iters=args.iters,
                                    footprint=args.footprint)
    out = args.out or f"{args.name}.trace"
    stem, dot, _ = out.rpartition(".")
    cfg_path = (stem if dot else out) + ".cfg"
    with open(out, "w", encoding="utf-8") as fh:
        fh.write(write_trace(trace))
    with open(cfg_path, "w", encoding="utf-8") as fh:
        fh.write(dump_config(config))
    print(f"wrote {len(trace)} events to {out} and the machine to {cfg_path}")
    return 0


_INPUT_ERRORS = (TraceError, ConfigError, UnknownKind, UnknownResource,
                 UnknownParameter, OSError, ValueError)


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    handlers = {
        "simulate": _cmd_simulate,
        "sensitivity": _cmd_sensitivity,
        "gen-kernel": _cmd_gen_kernel,
    }
    try:
        return handlers[args.command](args)
    except _INPUT_ERRORS as exc:
        print(f"sensim: error: {exc}", file=sys.stderr)
        return 1
    except AssertionError as exc:
        print(f"sensim: internal invariant violated: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
