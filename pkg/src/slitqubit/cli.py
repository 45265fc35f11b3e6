"""Command-line front end.

Five workflows: ``simulate`` synthesizes a coincidence record from a
config, ``reconstruct`` inverts a record to a density matrix,
``compare`` reports metrics between two saved states, ``oracle`` checks
the stationary-phase closed form against adaptive quadrature, and
``sweep`` maps reconstruction fidelity against counts or trial budget.

Exit codes: 0 success, 2 validation or usage error, 3 numerical failure
(quadrature or optimizer non-convergence), 4 oracle bound violation.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from .config import ConfigError, load_config
from .geometry import GeometryError, derive_params
from .measurement import (
    _arm_to_text,
    expected_rates,
    load_record,
    record_to_csv,
    save_record,
    simulate_counts,
    standard_settings,
)
from .propagation import QuadratureError, fresnel_factor, i_integral_closed, i_integral_quadrature
from .states import build_state, concurrence, fidelity, metrics, purity, to_density, trace_distance
from .tomography import MleConfig, reconstruct, rho_from_json, save_result

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_BOUND = 4

ORACLE_BOUND = 0.05


def _fail(code, message):
    print(f"error: {message}", file=sys.stderr)
    return code


def _figure_path(out_path, cfg, suffix):
    if not cfg.output.figures:
        return None
    out = Path(out_path)
    directory = Path(cfg.output.figure_dir) if cfg.output.figure_dir else out.parent
    directory.mkdir(parents=True, exist_ok=True)
    return directory / f"{out.stem}_{suffix}.png"


def _load_rho_file(path):
    """Accept either a reconstruction-result file or a bare {"rho": ...}."""
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if "rho" not in data:
        raise ValueError(f"{path}: no 'rho' key found")
    return rho_from_json(data["rho"])


def cmd_simulate(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg = dataclasses.replace(cfg, seed=args.seed)
    if args.noiseless:
        cfg = dataclasses.replace(cfg, noiseless=True)
    geom = cfg.geometry
    rho = to_density(build_state(cfg.pump, geom))
    settings = standard_settings(geom)
    record = simulate_counts(
        rho, settings, geom, cfg.R0, cfg.time, seed=cfg.seed, noiseless=cfg.noiseless
    )
    save_record(record, args.out)
    csv_path = Path(args.out).with_suffix(".csv")
    record_to_csv(record, csv_path)

    rates = expected_rates(rho, settings, geom, cfg.R0)
    print(f"{'id':>3} {'signal':>10} {'idler':>10} {'time_s':>12} {'rate_hz':>14} {'counts':>10}")
    for setting, rate, time, count in zip(settings, rates, record.times, record.counts):
        print(
            f"{setting.id:>3} {_arm_to_text(setting.arm_s):>10} {_arm_to_text(setting.arm_i):>10}"
            f" {time:>12.6g} {rate:>14.6g} {count:>10d}"
        )
    print(f"wrote {args.out} and {csv_path}")

    figure = _figure_path(args.out, cfg, "counts")
    if figure is not None:
        from .plots import plot_counts

        plot_counts(record, figure)
        print(f"wrote {figure}")
    return EXIT_OK


def cmd_reconstruct(args):
    cfg = load_config(args.config)
    geom = cfg.geometry
    record = load_record(args.counts)
    mle_cfg = cfg.mle if cfg.mle is not None else MleConfig()
    result = reconstruct(record, geom, args.method, config=mle_cfg)
    save_result(result, args.out)

    print(f"method              {result.method}")
    print(f"residual (counts)   {result.residual:.6g}")
    print(f"condition number    {result.condition_number:.6g}")
    print(f"physical            {result.rho_hat.is_physical}")
    if result.log_likelihood is not None:
        print(f"log likelihood      {result.log_likelihood:.6g}")
    if result.converged is not None:
        print(f"converged           {result.converged} ({result.iterations} iterations)")

    if args.reference is not None:
        ref = _load_rho_file(args.reference)
        label = "reference file"
    else:
        ref = to_density(build_state(cfg.pump, geom)).matrix
        label = "config state"
    print(f"fidelity vs {label}  {fidelity(result.rho_hat, ref):.9f}")
    print(f"wrote {args.out}")

    figure = _figure_path(args.out, cfg, "rho")
    if figure is not None:
        from .plots import plot_density_matrix

        plot_density_matrix(result.rho_hat.matrix, figure, title=f"{result.method} estimate")
        print(f"wrote {figure}")
    if result.converged is False:
        return _fail(EXIT_NUMERICAL, "optimizer did not converge (result still written)")
    return EXIT_OK


def cmd_compare(args):
    rho_a = _load_rho_file(args.state_a)
    rho_b = _load_rho_file(args.state_b)
    print(f"fidelity        {fidelity(rho_a, rho_b):.9f}")
    print(f"trace distance  {trace_distance(rho_a, rho_b):.9f}")
    print(f"purity A        {purity(rho_a):.9f}")
    print(f"purity B        {purity(rho_b):.9f}")
    print(f"concurrence A   {concurrence(rho_a):.9f}")
    print(f"concurrence B   {concurrence(rho_b):.9f}")
    return EXIT_OK


def _parse_grid(text, derived, b):
    """Grid spec "x0,x1,...:q0,q1,..." in mm and rad/mm; None for the default."""
    if text is None:
        x1_mm = derived.x1 / 1e-3
        q_mm = math.pi / (4.0 * b) * 1e-3
        xs = [0.0, x1_mm, -x1_mm, 2 * x1_mm, -2 * x1_mm]
        qs = [0.0, q_mm, -q_mm]
        return xs, qs
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError("grid must be 'x_mm,...:q_per_mm,...'")
    xs = [float(v) for v in parts[0].split(",") if v.strip() != ""]
    qs = [float(v) for v in parts[1].split(",") if v.strip() != ""]
    if not xs or not qs:
        raise ValueError("grid must contain at least one x and one q value")
    return xs, qs


def cmd_oracle(args):
    cfg = load_config(args.config)
    geom = cfg.geometry
    derived = derive_params(geom)
    xs, qs = _parse_grid(args.grid, derived, geom.b)
    cf = fresnel_factor(derived.alpha)

    rows = []
    violations = []
    for x_mm in xs:
        for q_mm in qs:
            for sign in ("+", "-"):
                x = x_mm * 1e-3
                q = q_mm / 1e-3
                closed = i_integral_closed(x, sign, q, geom)
                quad = i_integral_quadrature(x, sign, q, geom) / cf
                scale = max(abs(quad), abs(closed), 1e-30)
                rel = abs(quad - closed) / scale
                rows.append(
                    {
                        "x_mm": x_mm,
                        "q_per_mm": q_mm,
                        "sign": sign,
                        "re_closed": closed.real,
                        "im_closed": closed.imag,
                        "re_quad": quad.real,
                        "im_quad": quad.imag,
                        "rel_err": rel,
                    }
                )
                if rel > ORACLE_BOUND:
                    violations.append((x_mm, q_mm, sign, rel))

    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=[
                "x_mm", "q_per_mm", "sign",
                "re_closed", "im_closed", "re_quad", "im_quad", "rel_err",
            ],
        )
        writer.writeheader()
        for row in rows:
            writer.writerow({k: v if k == "sign" else repr(float(v)) for k, v in row.items()})
    worst = max(row["rel_err"] for row in rows)
    print(f"{len(rows)} grid points, worst relative error {worst:.4%} (bound {ORACLE_BOUND:.0%})")
    print(f"wrote {args.out}")

    figure = _figure_path(args.out, cfg, "oracle")
    if figure is not None:
        from .plots import plot_oracle

        plot_oracle(rows, figure)
        print(f"wrote {figure}")

    if violations:
        for x_mm, q_mm, sign, rel in violations:
            print(
                f"bound exceeded: x={x_mm:g} mm q={q_mm:g} /mm sign={sign} rel_err={rel:.4%}",
                file=sys.stderr,
            )
        return EXIT_BOUND
    return EXIT_OK


def _trial_seed(base, point_index, trial_index):
    """Deterministic per-trial seed from the base seed and indices."""
    ss = np.random.SeedSequence([base, point_index, trial_index])
    return int(ss.generate_state(1, np.uint64)[0])


def cmd_sweep(args):
    cfg = load_config(args.config)
    geom = cfg.geometry
    if args.var not in ("counts_per_setting", "seed-trials"):
        raise ValueError(f"unknown sweep variable {args.var!r}")
    values = [float(v) for v in args.range.split(",") if v.strip() != ""]
    if not values:
        raise ValueError("range must contain at least one value")
    if args.trials < 1:
        raise ValueError(f"trials must be >= 1, got {args.trials}")

    rho_true = to_density(build_state(cfg.pump, geom))
    settings = standard_settings(geom)
    base_seed = cfg.seed if cfg.seed is not None else 0
    methods = ["exact", "paper"] + (["mle"] if cfg.mle is not None else [])

    points = []
    for i, value in enumerate(values):
        if args.var == "counts_per_setting":
            time = value / cfg.R0
            trials = args.trials
        else:
            time = cfg.time
            trials = int(value)
            if trials < 1:
                raise ValueError(f"seed-trials values must be >= 1, got {value!r}")
        fids = {m: [] for m in methods}
        for j in range(trials):
            record = simulate_counts(
                rho_true, settings, geom, cfg.R0, time,
                seed=_trial_seed(base_seed, i, j), noiseless=cfg.noiseless,
            )
            for method in methods:
                result = reconstruct(record, geom, method, config=cfg.mle)
                fids[method].append(fidelity(result.rho_hat, rho_true))
        point = {args.var: value}
        for method in methods:
            arr = np.array(fids[method])
            point[f"{method}_mean"] = float(arr.mean())
            point[f"{method}_min"] = float(arr.min())
            point[f"{method}_max"] = float(arr.max())
        points.append(point)
        summary = "  ".join(f"{m}={point[f'{m}_mean']:.6f}" for m in methods)
        print(f"{args.var}={value:g}: mean fidelity {summary}")

    fieldnames = [args.var]
    for method in methods:
        fieldnames += [f"{method}_mean", f"{method}_min", f"{method}_max"]
    with open(args.out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fieldnames)
        writer.writeheader()
        for point in points:
            writer.writerow({k: repr(v) if isinstance(v, float) else v for k, v in point.items()})
    print(f"wrote {args.out}")

    figure = _figure_path(args.out, cfg, "sweep")
    if figure is not None:
        from .plots import plot_sweep

        plot_sweep(points, figure, args.var)
        print(f"wrote {figure}")
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="slitqubit",
        description="Simulate and reconstruct two-spatial-qubit states from double-slit coincidence measurements.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="synthesize a coincidence record from a config")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--out", required=True, help="output CountRecord JSON path (CSV written alongside)")
    p.add_argument("--noiseless", action="store_true", help="store rounded exact rates instead of sampling")
    p.add_argument("--seed", type=int, default=None, help="override the config RNG seed")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="estimate the density matrix from a record")
    p.add_argument("--counts", required=True, help="CountRecord JSON path")
    p.add_argument("--method", required=True, choices=["exact", "paper", "mle"])
    p.add_argument("--config", required=True, help="JSON run config (geometry and reference state)")
    p.add_argument("--out", required=True, help="output ReconstructionResult JSON path")
    p.add_argument("--reference", default=None, help="JSON file with a 'rho' key to compare against")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("compare", help="print metrics between two saved states")
    p.add_argument("state_a", help="JSON file with a 'rho' key")
    p.add_argument("state_b", help="JSON file with a 'rho' key")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("oracle", help="closed form vs quadrature validity report")
    p.add_argument("--config", required=True, help="JSON run config (geometry)")
    p.add_argument("--grid", default=None, help="grid as 'x_mm,...:q_per_mm,...' (default: paper grid)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("sweep", help="fidelity statistics across counts or trials")
    p.add_argument("--config", required=True, help="JSON run config")
    p.add_argument("--var", required=True, help="counts_per_setting or seed-trials")
    p.add_argument("--range", required=True, help="comma-separated values")
    p.add_argument("--trials", type=int, default=20, help="trials per point (counts_per_setting)")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except QuadratureError as exc:
        return _fail(EXIT_NUMERICAL, f"quadrature did not converge: {exc}")
    except (ConfigError, GeometryError) as exc:
        return _fail(EXIT_VALIDATION, str(exc))
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        return _fail(EXIT_VALIDATION, str(exc))


if __name__ == "__main__":
    sys.exit(main())
