"""Command-line entry point.

Subcommands map one-to-one onto the pipeline drivers:

    antenna-raman params   --scenario run.txt --out results/
    antenna-raman spectrum --scenario run.txt --out results/ --method eig
    antenna-raman sweep    --scenario run.txt --out results/ --mode stokes
    antenna-raman em       --scenario run.txt --out results/

Exit codes: 0 success, 2 bad configuration, 3 numerical failure,
4 model pushed outside its validity domain.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import pipelines
from .constants import TWO_PI
from .errors import ConfigError, ModelValidityError, NumericalError
from .scenario import Scenario, load_scenario, with_updates


def _add_common(p):
    p.add_argument("--scenario", help="scenario file (defaults to built-in)")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument(
        "--strict",
        action="store_true",
        help="escalate validity warnings to errors (exit 4)",
    )


def _add_engine(p):
    p.add_argument(
        "--method",
        choices=("auto", "eig", "resolvent", "grid"),
        default="auto",
        help="spectrum evaluation route",
    )
    p.add_argument(
        "--truncation",
        metavar="NA,NB",
        help="cavity,phonon Fock levels, e.g. 8,8",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="antenna-raman",
        description="Atomic-antenna surface-enhanced Raman simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("params", help="derived parameter table")
    _add_common(p)

    p = sub.add_parser("spectrum", help="emission spectrum for one scenario")
    _add_common(p)
    _add_engine(p)
    p.add_argument(
        "--model",
        choices=("numeric", "linearized", "mollow"),
        default="numeric",
        help="full master-equation solve, or a closed-form sideband model",
    )
    p.add_argument("--points", type=int, default=2001, help="frequency grid size")
    p.add_argument(
        "--window",
        metavar="LO,HI",
        help="frequency window in Hz (ordinary frequency), e.g. 4.5e14,5.5e14",
    )

    p = sub.add_parser("sweep", help="intensity sweep")
    _add_common(p)
    _add_engine(p)
    p.add_argument(
        "--mode", choices=("saturation", "stokes"), default="stokes", help="sweep family"
    )
    p.add_argument(
        "--intensities", metavar="I1,I2,...", help="explicit intensity list in uW/um^2"
    )
    p.add_argument(
        "--log-grid",
        metavar="MIN,MAX,N",
        help="log-spaced intensity grid in uW/um^2, e.g. 6.8e-4,0.17,30",
    )
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")

    p = sub.add_parser("em", help="electromagnetic correction sweep over gap")
    _add_common(p)
    p.add_argument(
        "--gap-grid", metavar="MIN,MAX,N", help="gap grid in nm, e.g. 1,20,20"
    )

    return parser


def _load(args) -> Scenario:
    scenario = load_scenario(args.scenario) if args.scenario else Scenario()
    if getattr(args, "truncation", None):
        parts = args.truncation.split(",")
        if len(parts) != 2:
            raise ConfigError("--truncation expects NA,NB")
        try:
            na, nb = (int(x) for x in parts)
        except ValueError as exc:
            raise ConfigError(f"bad --truncation value {args.truncation!r}") from exc
        scenario = with_updates(scenario, cavity_levels=na, phonon_levels=nb)
    return scenario


def _parse_grid(text, what):
    parts = text.split(",")
    if len(parts) != 3:
        raise ConfigError(f"--{what} expects MIN,MAX,N")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"bad --{what} value {text!r}") from exc
    if lo <= 0 or hi <= lo or n < 2:
        raise ConfigError(f"--{what} needs 0 < MIN < MAX and N >= 2")
    return lo, hi, n


def _run_params(args, scenario):
    result = pipelines.run_params(scenario, strict=args.strict)
    pipelines.write_csv(
        os.path.join(args.out, "params.csv"),
        ["name", "value", "unit"],
        pipelines.params_csv_rows(result),
    )
    pipelines.write_meta(
        os.path.join(args.out, "params.meta.json"),
        scenario,
        {"command": "params", "warnings": result.warnings},
    )
    for w in result.warnings:
        print(f"warning: {w}", file=sys.stderr)


def _run_spectrum(args, scenario):
    window = None
    if args.window:
        parts = args.window.split(",")
        if len(parts) != 2:
            raise ConfigError("--window expects LO,HI in Hz")
        try:
            lo, hi = float(parts[0]), float(parts[1])
        except ValueError as exc:
            raise ConfigError(f"bad --window value {args.window!r}") from exc
        if hi <= lo:
            raise ConfigError("--window needs LO < HI")
        window = np.linspace(lo * TWO_PI, hi * TWO_PI, args.points)
    if args.model == "numeric":
        outcome = pipelines.run_spectrum(
            scenario, method=args.method, window=window, points=args.points,
            strict=args.strict,
        )
    else:
        outcome = pipelines.run_closed_form_spectrum(
            scenario, args.model, window=window, points=args.points,
            strict=args.strict,
        )
    pipelines.write_csv(
        os.path.join(args.out, "spectrum.csv"),
        ["frequency_hz", "spectral_density"],
        pipelines.spectrum_csv_rows(outcome),
    )
    peaks_payload = {
        name: {"omega": pk.omega, "height": pk.height}
        for name, pk in outcome.peaks.items()
        if isinstance(pk, pipelines.PeakInfo)
    }
    pipelines.write_meta(
        os.path.join(args.out, "spectrum.meta.json"),
        scenario,
        {
            "command": "spectrum",
            "model": args.model,
            "method": args.method,
            "truncation": [scenario.cavity_levels, scenario.phonon_levels],
            "peaks": peaks_payload,
            "population": outcome.population,
            "coherence_sq": outcome.coherence_sq,
            "warnings": outcome.warnings,
        },
    )
    for w in outcome.warnings:
        print(f"warning: {w}", file=sys.stderr)


def _run_sweep(args, scenario):
    intensities = None
    if args.intensities and args.log_grid:
        raise ConfigError("give either --intensities or --log-grid, not both")
    if args.intensities:
        try:
            intensities = [float(x) for x in args.intensities.split(",")]
        except ValueError as exc:
            raise ConfigError(f"bad --intensities value {args.intensities!r}") from exc
        if not intensities or any(i <= 0 for i in intensities):
            raise ConfigError("--intensities needs positive values")
    elif args.log_grid:
        lo, hi, n = _parse_grid(args.log_grid, "log-grid")
        intensities = list(np.geomspace(lo, hi, n))
    rows = pipelines.run_sweep(
        scenario,
        args.mode,
        intensities=intensities,
        method=args.method,
        workers=args.workers,
        strict=args.strict,
    )
    pipelines.write_csv(
        os.path.join(args.out, "sweep.csv"),
        pipelines.SWEEP_HEADERS[args.mode],
        pipelines.sweep_csv_rows(rows, args.mode),
    )
    pipelines.write_meta(
        os.path.join(args.out, "sweep.meta.json"),
        scenario,
        {
            "command": "sweep",
            "mode": args.mode,
            "method": args.method,
            "intensities_uw_um2": [r.intensity_uw_um2 for r in rows],
            "workers": args.workers,
        },
    )


def _run_em(args, scenario):
    gap_grid = None
    if args.gap_grid:
        lo, hi, n = _parse_grid(args.gap_grid, "gap-grid")
        gap_grid = np.linspace(lo * 1e-9, hi * 1e-9, n)
    rows = pipelines.run_em(scenario, gap_grid=gap_grid)
    pipelines.write_csv(
        os.path.join(args.out, "em.csv"),
        pipelines.EM_HEADER,
        pipelines.em_csv_rows(rows, scenario.gamma_total_over_gamma0),
    )
    pipelines.write_meta(
        os.path.join(args.out, "em.meta.json"),
        scenario,
        {"command": "em", "gap_count": len(rows)},
    )


_RUNNERS = {
    "params": _run_params,
    "spectrum": _run_spectrum,
    "sweep": _run_sweep,
    "em": _run_em,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        scenario = _load(args)
        os.makedirs(args.out, exist_ok=True)
        _RUNNERS[args.command](args, scenario)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except ModelValidityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
