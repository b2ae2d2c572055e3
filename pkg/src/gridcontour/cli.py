"""Command-line interface.

Exit codes: 0 success, 1 data error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import __version__
from .bench import (
    BenchConfig,
    Gaussian,
    Poisson,
    run_sensitivity,
    run_simulation_study,
)
from .density import PRESETS, mixture_sample, preset
from .grid import read_grid
from .levels import (
    ContourLevels,
    DivisorMode,
    density_levels_grid,
    diverging_levels,
    equal_length_levels,
    jenks_levels,
    levels_from_json,
    naive_quantile_levels,
)
from .regions import extract_region, region_area, region_mass, regions_to_geojson
from .render import render_continuous, render_discrete, scale_by_name

METHOD_CHOICES = ("density", "naive-quantile", "equal-length", "natural")
DIVISOR_CHOICES = {"m-plus-one": DivisorMode.M_PLUS_ONE, "paper-m": DivisorMode.PAPER_M}


class DataError(Exception):
    pass


def _tau_list(text):
    try:
        taus = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid tau list {text!r}") from None
    if not taus:
        raise argparse.ArgumentTypeError("empty tau list")
    for t in taus:
        if not 0.0 < t < 1.0:
            raise argparse.ArgumentTypeError("tau must be in (0,1)")
    return sorted(set(taus))


def _int_list(text):
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer list {text!r}") from None


def _dims_list(text):
    out = []
    for part in text.split(","):
        try:
            c, r = part.lower().split("x")
            out.append((int(c), int(r)))
        except ValueError:
            raise argparse.ArgumentTypeError(f"grid size must look like 51x51, got {part!r}")
    return out


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _default_jobs():
    env = os.environ.get("GRIDCONTOUR_JOBS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def _add_input(p):
    p.add_argument("input", help="grid file (.csv, .asc or .json)")
    p.add_argument(
        "--input-format",
        choices=("csv", "asc", "json"),
        help="override format sniffing by file extension",
    )
    p.add_argument(
        "--cell-size",
        type=float,
        nargs=2,
        metavar=("DX", "DY"),
        help="cell size for CSV input (default: smallest center spacing)",
    )


def _add_method(p, required=True):
    p.add_argument("--method", choices=METHOD_CHOICES, required=required)
    p.add_argument("--tau", type=_tau_list, help="comma-separated probabilities in (0,1)")
    p.add_argument("--m", type=_positive_int, help="number of levels (equal-length, natural)")
    p.add_argument("--diverging", action="store_true", help="sign-split density levels")
    p.add_argument("--divisor-mode", choices=tuple(DIVISOR_CHOICES), default="m-plus-one")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gridcontour", description="Density contour levels for gridded data."
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("levels", help="compute contour levels, print JSON")
    _add_input(p)
    _add_method(p)

    p = sub.add_parser("regions", help="density contour regions as GeoJSON or JSON")
    _add_input(p)
    p.add_argument("--tau", type=_tau_list, required=True)
    p.add_argument("--format", choices=("geojson", "json"), default="geojson")
    p.add_argument("--out", help="output file (default: stdout)")

    p = sub.add_parser("render", help="render a heat map to SVG")
    _add_input(p)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--levels", help="levels JSON file, or - for stdin")
    src.add_argument("--continuous", action="store_true")
    src.add_argument("--method", choices=METHOD_CHOICES)
    p.add_argument("--tau", type=_tau_list)
    p.add_argument("--m", type=_positive_int)
    p.add_argument("--diverging", action="store_true")
    p.add_argument("--divisor-mode", choices=tuple(DIVISOR_CHOICES), default="m-plus-one")
    p.add_argument("--scale", choices=("heat", "redblue"), default="heat")
    p.add_argument("--width", type=_positive_int, default=600)
    p.add_argument("--height", type=_positive_int, default=400)
    p.add_argument("--no-legend", action="store_true")
    p.add_argument("--out", required=True, help="output SVG path, or - for stdout")

    p = sub.add_parser("simulate", help="draw a sample from a mixture preset")
    p.add_argument("--preset", choices=sorted(PRESETS), required=True)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("bench", help="simulation study against proxy contours")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--full", action="store_true", help="published design (slow)")
    p.add_argument("--densities", help="comma-separated preset names")
    p.add_argument("--n", type=_int_list, help="sample sizes, e.g. 1000,10000")
    p.add_argument("--grid", type=_dims_list, help="grid sizes, e.g. 51x51,151x151")
    p.add_argument("--tau", type=_tau_list)
    p.add_argument("--replicates", type=_positive_int)
    p.add_argument("--proxy-n", type=_positive_int)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--jobs", type=_positive_int, default=None)
    p.add_argument("--table", action="store_true", help="print a readable table instead of CSV")
    p.add_argument("--out", help="output CSV (default: stdout)")

    p = sub.add_parser("sensitivity", help="noise sensitivity on observed data")
    _add_input(p)
    p.add_argument("--model", choices=("poisson", "gaussian"), required=True)
    p.add_argument("--sd", type=float, help="Gaussian noise SD")
    p.add_argument("--tau", type=_tau_list, default=None)
    p.add_argument("--replicates", type=_positive_int, default=100)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--reference", choices=("density", "own"), default="density")
    p.add_argument("--name", default=None, help="label for the density column")
    p.add_argument("--table", action="store_true")
    p.add_argument("--out", help="output CSV (default: stdout)")
    return parser


def _load(args):
    try:
        return read_grid(args.input, args.input_format, args.cell_size)
    except OSError as exc:
        raise DataError(f"cannot read {args.input}: {exc.strerror or exc}") from None


def _compute_levels(parser, grid, args):
    method = args.method
    if args.diverging:
        if method != "density":
            parser.error("--diverging is only supported with --method density")
        if not args.tau:
            parser.error("--tau is required for --method density")
        return diverging_levels(grid, args.tau)
    if method in ("density", "naive-quantile"):
        if not args.tau:
            parser.error(f"--tau is required for --method {method}")
        fn = density_levels_grid if method == "density" else naive_quantile_levels
        return fn(grid, args.tau)
    if args.m is None:
        parser.error(f"--m is required for --method {method}")
    if method == "equal-length":
        return equal_length_levels(grid, args.m, DIVISOR_CHOICES[args.divisor_mode])
    return jenks_levels(grid, args.m)


def _levels_doc(levels):
    if isinstance(levels, ContourLevels):
        return levels.to_json()
    neg, pos = levels
    return {"neg": neg.to_json(), "pos": pos.to_json()}


def _levels_from_doc(doc):
    if "neg" in doc and "pos" in doc:
        return levels_from_json(doc["neg"]), levels_from_json(doc["pos"])
    return levels_from_json(doc)


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_levels(parser, args):
    grid = _load(args)
    levels = _compute_levels(parser, grid, args)
    _write(json.dumps(_levels_doc(levels)) + "\n", None)


def cmd_regions(parser, args):
    grid = _load(args)
    levels = density_levels_grid(grid, args.tau)
    regions = [extract_region(grid, lev, tau) for tau, lev in levels.pairs()]
    if args.format == "geojson":
        doc = regions_to_geojson(regions)
    else:
        doc = {
            "levels": levels.to_json(),
            "regions": [
                {
                    "tau": r.tau,
                    "level": r.level,
                    "cells": sorted(r.cells),
                    "mass": region_mass(grid, r),
                    "area": region_area(grid, r),
                }
                for r in regions
            ],
        }
    _write(json.dumps(doc) + "\n", args.out)


def cmd_render(parser, args):
    grid = _load(args)
    scale = scale_by_name(args.scale)
    opts = dict(width=args.width, height=args.height, legend=not args.no_legend)
    if args.continuous:
        svg = render_continuous(grid, scale, **opts)
    else:
        if args.levels is not None:
            try:
                if args.levels == "-":
                    doc = json.load(sys.stdin)
                else:
                    with open(args.levels, encoding="utf-8") as fh:
                        doc = json.load(fh)
                levels = _levels_from_doc(doc)
            except OSError as exc:
                raise DataError(f"cannot read levels: {exc}") from None
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise DataError(f"malformed levels JSON: {exc}") from None
        else:
            levels = _compute_levels(parser, grid, args)
        svg = render_discrete(grid, levels, scale, **opts)
    _write(svg, args.out)


def cmd_simulate(parser, args):
    mix = preset(args.preset)
    x, labels = mixture_sample(mix, args.n, args.seed, return_labels=True)
    lines = ["x,y,component"]
    lines += [f"{a!r},{b!r},{int(k)}" for (a, b), k in zip(x.tolist(), labels)]
    _write("\n".join(lines) + "\n", args.out)


def cmd_bench(parser, args):
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise DataError(f"cannot read config: {exc}") from None
    else:
        cfg = BenchConfig.paper().to_json() if args.full else {}
    overrides = {
        "densities": args.densities.split(",") if args.densities else None,
        "sample_sizes": args.n,
        "grid_sizes": args.grid,
        "taus": args.tau,
        "replicates": args.replicates,
        "proxy_N": args.proxy_n,
        "base_seed": args.seed,
    }
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    for name in cfg.get("densities", []):
        preset(name)
    config = BenchConfig.from_json(cfg)
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    report = run_simulation_study(config, jobs=jobs)
    _write(report.format_table() if args.table else report.to_csv(), args.out)


def cmd_sensitivity(parser, args):
    grid = _load(args)
    if args.model == "poisson":
        if args.sd is not None:
            parser.error("--sd only applies to --model gaussian")
        model = Poisson()
    else:
        if args.sd is None or args.sd < 0:
            parser.error("--model gaussian needs --sd >= 0")
        model = Gaussian(args.sd)
    diverging = bool(np.any(grid.values < 0))
    taus = args.tau or ([0.25, 0.5, 0.75] if diverging else [0.1, 0.3, 0.5, 0.7, 0.9])
    name = args.name or os.path.splitext(os.path.basename(args.input))[0]
    report = run_sensitivity(
        grid, model, taus, args.replicates, args.seed, name=name, reference=args.reference
    )
    _write(report.format_table() if args.table else report.to_csv(), args.out)


COMMANDS = {
    "levels": cmd_levels,
    "regions": cmd_regions,
    "render": cmd_render,
    "simulate": cmd_simulate,
    "bench": cmd_bench,
    "sensitivity": cmd_sensitivity,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        COMMANDS[args.command](parser, args)
    except (DataError, ValueError, KeyError, np.linalg.LinAlgError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"gridcontour: error: {msg}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
