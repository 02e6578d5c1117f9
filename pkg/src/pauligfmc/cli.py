"""Command line driver.

Subcommands: run (single run at the configured delta), sweep (delta
ladder), extrapolate (linear fit of an existing sweep.csv), oracle (exact
level table and fermionic sums for the configured well).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import logging
import sys
from pathlib import Path

from .engine import EngineError
from .model import ConfigError, load_config, validate_spec
from .oracle import bound_states_1d, bound_states_radial, fermi_ground_energy
from .experiments import (
    extrapolate_linear,
    report_fit,
    run_single,
    sweep_delta,
)

DEFAULT_DELTAS = (0.0005, 0.001, 0.002, 0.004, 0.008)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="pauligfmc",
        description="Green's function Monte Carlo for spinless fermions "
        "in a finite square well, with Pauli exchange weights.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="single run at the configured delta")
    p_run.add_argument("-c", "--config", required=True, help="JSON config file")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("-o", "--out", default=None, help="output directory")
    p_run.add_argument("--overwrite", action="store_true")

    p_sweep = sub.add_parser("sweep", help="runs over a delta ladder")
    p_sweep.add_argument("-c", "--config", required=True, help="JSON config file")
    p_sweep.add_argument(
        "--deltas",
        default=",".join(str(d) for d in DEFAULT_DELTAS),
        help="comma-separated delta values",
    )
    p_sweep.add_argument("-o", "--out", default=None, help="output directory")
    p_sweep.add_argument("--overwrite", action="store_true")

    p_ext = sub.add_parser("extrapolate", help="linear delta -> 0 fit of a sweep")
    p_ext.add_argument("-i", "--in", dest="infile", required=True, help="sweep.csv path")

    p_oracle = sub.add_parser("oracle", help="exact levels and fermionic sums")
    p_oracle.add_argument("-c", "--config", required=True, help="JSON config file")

    return parser


def _load(path):
    return validate_spec(*load_config(path))


def _cmd_run(args):
    spec, cfg = _load(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
        validate_spec(spec, cfg)
    series, _ = run_single(spec, cfg, out_dir=args.out, overwrite=args.overwrite)
    print(
        f"energy = {series.energy:.6f} +/- {series.stderr:.6f} "
        f"(delta={series.delta:g}, generations={series.generations}, "
        f"burn_in={series.burn_in})"
    )
    return 0


def _cmd_sweep(args):
    spec, cfg = _load(args.config)
    deltas = [float(tok) for tok in args.deltas.split(",") if tok.strip()]
    result = sweep_delta(spec, cfg, deltas, out_dir=args.out, overwrite=args.overwrite)
    print("delta,energy,stderr,killed_fraction,crossing_fraction,generations")
    for row in result:
        print(
            f"{row.delta:g},{row.energy!r},{row.stderr!r},"
            f"{row.killed_fraction!r},{row.crossing_fraction!r},{row.generations}"
        )
    for delta, message in result.failures:
        print(f"failed delta={delta:g}: {message}", file=sys.stderr)
    fit = extrapolate_linear(result)
    _print_fit(fit)
    if args.out is not None:
        report_fit(fit, Path(args.out) / "fit.json", overwrite=args.overwrite)
    return 0


def _cmd_extrapolate(args):
    rows = []
    with open(args.infile, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = {"delta", "energy", "stderr"} - set(reader.fieldnames or ())
        if missing:
            raise ValueError(
                f"{args.infile}: missing columns {sorted(missing)}"
            )
        for record in reader:
            rows.append(
                (float(record["delta"]), float(record["energy"]), float(record["stderr"]))
            )
    _print_fit(extrapolate_linear(rows))
    return 0


def _print_fit(fit):
    print(f"intercept = {fit.intercept:.6f} +/- {fit.intercept_stderr:.6f}")
    print(f"slope = {fit.slope:.6f}")
    print(
        f"window = [{fit.window[0]:g}, {fit.window[1]:g}] ({fit.n_used} points), "
        f"r_squared = {fit.r_squared:.4f}, "
        f"max_studentized_residual = {fit.max_studentized_residual:.2f}"
    )


def _cmd_oracle(args):
    spec, cfg = _load(args.config)
    if spec.dimension == 1:
        table = bound_states_1d(spec.well_depth, spec.well_radius, spec.mass)
    elif spec.dimension == 3:
        table = bound_states_radial(spec.well_depth, spec.well_radius, spec.mass)
    else:
        raise ValueError(
            f"no exact well spectrum for dimension {spec.dimension}; use 1 or 3"
        )
    print("label,nodes,ell,energy,degeneracy")
    for level in table:
        ell = "" if level.ell is None else level.ell
        print(f"{level.label},{level.nodes},{ell},{level.energy!r},{level.degeneracy}")
    print()
    print("n_fermions,ground_energy")
    for n in range(1, table.total_degeneracy + 1):
        print(f"{n},{fermi_ground_energy(table, n)!r}")
    return 0


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    handler = {
        "run": _cmd_run,
        "sweep": _cmd_sweep,
        "extrapolate": _cmd_extrapolate,
        "oracle": _cmd_oracle,
    }[args.command]
    try:
        return handler(args)
    except (ConfigError, EngineError, FileExistsError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
