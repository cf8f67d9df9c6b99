"""Command line interface.

Subcommands mirror the harness run modes:

    elastica solve   --config cfg [--set k=v ...] [--dump-matrices DIR]
    elastica bounds  --config cfg [--set k=v ...]
    elastica verify  --config cfg [--set k=v ...]
    elastica cap     --config cfg [--set k=v ...]
    elastica report  R1.json [R2.json ...] [--csv F] [--table F] [--svg-dir D]

Exit status: 0 all records pass or skip, 2 any marginal, 1 any fail or a
runtime error.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

from .eigensolve import ConvergenceError
from .harness import (ConfigError, RunConfig, SpectrumFileError,
                      apply_overrides, load_config, run_cap, run_solve,
                      run_verify)
from .report import (ReportFormatError, load_report, render_csv, render_svg,
                     render_table, svg_series_for)


def _add_common(parser):
    parser.add_argument("--config", help="path to a key = value config file")
    parser.add_argument("--set", dest="overrides", action="append",
                        default=[], metavar="KEY=VALUE",
                        help="override one config key (repeatable)")
    parser.add_argument("--output", help="override output.path")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="elastica",
        description="verify universal eigenvalue bounds against computed "
                    "spectra of the vector elasticity operator and of "
                    "spherical-cap biharmonic problems")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, helptext in (
            ("solve", "compute a spectrum and write a spectrum file"),
            ("bounds", "evaluate all bounds on a spectrum file"),
            ("verify", "solve and verify with the configured slack policy"),
            ("cap", "first-eigenvalue suite on a spherical cap")):
        p = sub.add_parser(name, help=helptext)
        _add_common(p)
        if name == "solve":
            p.add_argument("--dump-matrices", metavar="DIR",
                           help="write K.mtx/M.mtx (Matrix Market, "
                                "round-trip checked)")
    rep = sub.add_parser("report", help="render saved reports")
    rep.add_argument("reports", nargs="+", help="report JSON files")
    rep.add_argument("--csv", help="write merged CSV here")
    rep.add_argument("--table", help="write the aligned table here "
                                     "(default: stdout)")
    rep.add_argument("--svg-dir", help="write per-inequality SVG charts here")
    return parser


def _config_from_args(args, mode):
    cfg = RunConfig(mode=mode)
    if args.config:
        cfg = load_config(args.config, base=cfg)
        cfg = replace(cfg, mode=mode)
    if args.overrides:
        cfg = apply_overrides(cfg, args.overrides)
    if args.output:
        cfg = replace(cfg, output_path=args.output)
    if mode == "solve" and getattr(args, "dump_matrices", None):
        cfg = replace(cfg, dump_matrices=args.dump_matrices)
    if mode == "bounds" and cfg.spectrum_path is None:
        raise ConfigError("bounds mode needs spectrum.path")
    return cfg.validate()


def _run_report(args):
    reports = [load_report(p) for p in args.reports]
    if args.csv:
        rows = [rec for rep in reports for rec in rep.records]
        with open(args.csv, "w", encoding="ascii") as fh:
            fh.write(render_csv(rows))
    table = render_table(reports)
    if args.table:
        with open(args.table, "w", encoding="ascii") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    if args.svg_dir:
        os.makedirs(args.svg_dir, exist_ok=True)
        for rep in reports:
            label = rep.label().replace(" ", "_").replace("=", "")
            for name in dict.fromkeys(r.name for r in rep.records):
                series = svg_series_for(rep, name)
                path = os.path.join(args.svg_dir, f"{label}_{name}.svg")
                with open(path, "w", encoding="ascii") as fh:
                    fh.write(render_svg(f"{name} ({rep.label()})", series))
    return max(rep.exit_code() for rep in reports)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            return _run_report(args)
        cfg = _config_from_args(args, args.command)
        if args.command == "solve":
            spectrum, result = run_solve(cfg)
            dest = cfg.output_path or "<stdout>"
            if not cfg.output_path:
                for i, v in enumerate(spectrum.values, 1):
                    print(f"{i} {v:.17g}")
            print(f"solved: {len(spectrum)} eigenvalues "
                  f"(mesh {spectrum.mesh}, {result.iterations} iterations) "
                  f"-> {dest}", file=sys.stderr)
            return 0
        runner = run_cap if args.command == "cap" else run_verify
        report = runner(cfg)
        counts = report.summary
        print(f"{args.command}: pass={counts['pass']} "
              f"marginal={counts['marginal']} fail={counts['fail']} "
              f"skip={counts['skip']}"
              + (f" -> {cfg.output_path}" if cfg.output_path else ""))
        return report.exit_code()
    except (ConfigError, SpectrumFileError, ReportFormatError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    except ConvergenceError as err:
        print(f"solver error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
