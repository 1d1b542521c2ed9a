"""Command-line front door.

Subcommands wrap the library one-to-one and emit machine-readable
output: single-line JSON on stdout for scalar queries, CSV files plus a
JSON run record for sweeps.  Exit codes: 0 success (warnings included),
2 usage or domain errors, 3 numerical failures.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time

import numpy as np

from .annulus import AnnulusOracle
from .bubbles import ansatz_profile, slice_grid
from .cliconfig import (
    SCHEMA_VERSION,
    ExperimentConfig,
    RunRecord,
    content_hash,
    fmt17,
    read_config_file,
    _parse_point,
)
from .errors import BrlError, ConfigError, DomainError
from .interaction import as_point_gradients, lambda1_gradient
from .reduced import (
    eval_f1,
    eval_f2,
    lambda1_fd_hessian,
    residual_c0_bracket,
    residual_report,
    solve_d_lambda,
)
from .constants import OMEGA
from .rings import (
    RingConfig,
    circulant_coeffs,
    discrepancy_report,
    lambda1_ring_shortcut,
    min_over_r,
    threshold_rho,
)

__all__ = ["main", "build_parser"]


def _emit(payload: dict) -> None:
    print(json.dumps(payload, sort_keys=True))


def _record(command: str, cfg: ExperimentConfig, started: float,
            outputs: list) -> RunRecord:
    snap = cfg.snapshot()
    return RunRecord(command, snap, content_hash(snap),
                     time.perf_counter() - started, outputs)


def _merged_config(args, **extra) -> ExperimentConfig:
    file_map = read_config_file(args.config) if getattr(args, "config", None) else None
    return ExperimentConfig.from_sources(file_map, **extra)


def cmd_green(args) -> int:
    cfg = _merged_config(args, rho_in=args.rho, max_terms=args.max_terms,
                         target_tol=args.tol)
    oracle = AnnulusOracle(cfg.geometry(), cfg.control())
    x = _parse_point(args.x, "--x")
    y = _parse_point(args.y, "--y")
    res = oracle.green(x, y)
    _emit({
        "schema_version": SCHEMA_VERSION,
        "value": res.value,
        "tail_bound": res.tail_bound,
        "terms_used": res.terms_used,
        "degraded": res.degraded,
    })
    return 0


def cmd_robin(args) -> int:
    cfg = _merged_config(args, rho_in=args.rho, max_terms=args.max_terms,
                         target_tol=args.tol)
    oracle = AnnulusOracle(cfg.geometry(), cfg.control())
    if (args.r is None) == (args.x is None):
        raise ConfigError("give exactly one of --r or --x")
    res = oracle.robin_radial(args.r) if args.r is not None else oracle.robin(
        _parse_point(args.x, "--x"))
    _emit({
        "schema_version": SCHEMA_VERSION,
        "value": res.value,
        "tail_bound": res.tail_bound,
        "terms_used": res.terms_used,
        "degraded": res.degraded,
    })
    return 0


def _write_csv(path: str, header: list, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([c if isinstance(c, str) else fmt17(c) for c in row])


def cmd_ring_scan(args) -> int:
    started = time.perf_counter()
    cfg = _merged_config(args, rho_in=args.rho, max_terms=args.max_terms,
                         target_tol=args.tol, grid_n=args.grid,
                         workers=args.workers, out=args.out, k=args.k)
    k = args.k
    geom = cfg.geometry()
    ctrl = cfg.control()
    n_grid = cfg.grid_n or 512
    workers = cfg.workers if cfg.workers is not None else (os.cpu_count() or 1)
    scan = min_over_r(k, geom, ctrl, n_grid=n_grid, workers=workers)
    out = cfg.out or f"ring_scan_k{k}.csv"

    header = ["r"] + [f"lambda_{ell}" for ell in range(1, k + 1)] + ["tail_bound"]
    rows = []
    if k == 4:
        header += ["lambda1_shortcut", "g_perp_series", "g_perp_shortcut"]
        oracle = AnnulusOracle(geom, ctrl)
        for i, r in enumerate(scan.r_grid):
            ring = RingConfig(4, float(r))
            coeffs = circulant_coeffs(ring, geom, oracle=oracle)
            shortcut = lambda1_ring_shortcut(ring, geom, oracle=oracle)
            sing_perp = 1.0 / (4.0 * OMEGA * float(r) ** 2)
            rows.append([float(r)] + [float(v) for v in scan.lambda_by_ell[i]]
                        + [float(scan.tail_bounds[i]), shortcut,
                           float(-coeffs.values[1]), sing_perp])
    else:
        for i, r in enumerate(scan.r_grid):
            rows.append([float(r)] + [float(v) for v in scan.lambda_by_ell[i]]
                        + [float(scan.tail_bounds[i])])
    _write_csv(out, header, rows)

    record = _record("ring-scan", cfg, started, [out])
    extra = {
        "k": k,
        "rho_in": geom.rho_in,
        "rows": len(rows),
        "argmin_r": scan.argmin_r,
        "min_value": scan.min_value,
        "min_tail_bound": scan.min_tail_bound,
        "degraded": scan.degraded,
    }
    if k == 4:
        extra["discrepancy"] = discrepancy_report(geom, ctrl, n_grid=min(n_grid, 128),
                                                  workers=1)
    print(record.to_json(**extra))
    return 0


def cmd_threshold(args) -> int:
    started = time.perf_counter()
    cfg = _merged_config(args, max_terms=args.max_terms,
                         target_tol=args.tol, grid_n=args.grid,
                         workers=args.workers, k=args.k)
    workers = cfg.workers if cfg.workers is not None else 1
    n_grid = cfg.grid_n or 256
    result = threshold_rho(args.k, cfg.control(), tol=args.bisect_tol,
                           rho_lo=args.rho_lo, rho_hi=args.rho_hi,
                           n_grid=n_grid, workers=workers)
    record = _record("threshold", cfg, started, [])
    print(record.to_json(
        k=result.k,
        rho_star=None if result.one_signed else result.rho_star,
        bracket_width=result.bracket_width,
        lo_value=result.lo_value,
        hi_value=result.hi_value,
        one_signed=result.one_signed,
        degraded=result.degraded,
        evaluations=result.evaluations,
    ))
    return 0


def cmd_reduce(args) -> int:
    started = time.perf_counter()
    cfg = _merged_config(args, rho_in=args.rho, epsilon=args.epsilon,
                         max_terms=args.max_terms, target_tol=args.tol)
    configuration = cfg.configuration()
    oracle = AnnulusOracle(cfg.geometry(), cfg.control())
    sol = solve_d_lambda(configuration, oracle)
    report = residual_report(configuration, sol.d, sol.lambda1, cfg.epsilon, oracle)
    bracket = residual_c0_bracket(configuration, sol.d, sol.lambda1, oracle)
    grad = lambda1_gradient(configuration, oracle)
    hess_eigs, _ = lambda1_fd_hessian(configuration, oracle)
    record = _record("reduce", cfg, started, [])
    print(record.to_json(
        k=configuration.k,
        rho_in=cfg.rho_in,
        epsilon=cfg.epsilon,
        **{"lambda": sol.lambda1},
        d=[float(v) for v in sol.d],
        deltas=[float(v) for v in report.deltas],
        underflow=report.underflow,
        residuals={
            "eig_residual": sol.eig_residual,
            "det_check": sol.det_check,
            "f1": eval_f1(configuration, sol.d, sol.lambda1, oracle),
            "f2_norm": float(max(np.abs(eval_f2(configuration, sol.d,
                                                sol.lambda1, oracle)),
                                 default=0.0)),
            "c0": [float(v) for v in report.c0],
            "c0_bracket_max": float(np.abs(bracket).max()),
            "ci_frobenius": float(np.linalg.norm(report.ci)),
        },
        gradient_norm=float(np.linalg.norm(grad)),
        gradient_by_point=[[float(c) for c in row]
                           for row in as_point_gradients(grad, configuration.k)],
        hessian_spectrum=[float(v) for v in hess_eigs],
    ))
    return 0


def cmd_profile(args) -> int:
    started = time.perf_counter()
    cfg = _merged_config(args, epsilon=args.epsilon, rho_in=args.rho,
                         max_terms=args.max_terms, grid_n=args.grid,
                         extent=args.extent, out=args.out)
    configuration = cfg.configuration()
    oracle = AnnulusOracle(cfg.geometry(), cfg.control())
    sol = solve_d_lambda(configuration, oracle)
    n = cfg.grid_n or 41
    profile = ansatz_profile(configuration, sol, cfg.epsilon, oracle,
                             grid=slice_grid(n, cfg.extent))
    out = cfg.out or "profile.csv"
    rows = [list(p) + [w] for p, w in zip(profile.points, profile.values)]
    _write_csv(out, ["x1", "x2", "x3", "x4", "W"], rows)

    sidecar = out + ".meta.json"
    record = _record("profile", cfg, started, [out, sidecar])
    meta = {
        "schema_version": SCHEMA_VERSION,
        "input_hash": record.input_hash,
        "grid_points": int(profile.points.shape[0]) + profile.skipped,
        "skipped": profile.skipped,
        "bubbles": [
            {"delta": b.delta, "xi": [float(c) for c in b.xi]}
            for b in profile.bubbles
        ],
        "meta": profile.meta,
    }
    with open(sidecar, "w", encoding="utf-8") as handle:
        json.dump(meta, handle, sort_keys=True, indent=2)
        handle.write("\n")
    print(record.to_json(rows=len(rows), skipped=profile.skipped))
    return 0


def _add_series_flags(sub) -> None:
    sub.add_argument("--max-terms", dest="max_terms", type=int, default=None,
                     help="series budget (default 200, or BRL_MAX_TERMS)")
    sub.add_argument("--tol", dest="tol", type=float, default=None,
                     help="series tail target (default 1e-10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brl",
        description="Green-function series, ring spectra, and bubble "
                    "profiles on the 4d annulus",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("green", help="evaluate the Green function at a pair")
    p.add_argument("--rho", type=float, required=True, help="inner radius")
    p.add_argument("--x", required=True, help="first point, 4 comma-separated")
    p.add_argument("--y", required=True, help="second point")
    _add_series_flags(p)
    p.set_defaults(func=cmd_green, config=None)

    p = subs.add_parser("robin", help="evaluate the Robin function")
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--r", type=float, default=None, help="radius shorthand")
    p.add_argument("--x", default=None, help="full point alternative")
    _add_series_flags(p)
    p.set_defaults(func=cmd_robin, config=None)

    p = subs.add_parser("ring-scan", help="sweep ring spectra over radius")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--rho", type=float, required=True)
    p.add_argument("--grid", type=int, default=None, help="radius count (512)")
    p.add_argument("--workers", type=int, default=None,
                   help="process count (default: machine)")
    p.add_argument("--out", default=None, help="CSV path")
    _add_series_flags(p)
    p.set_defaults(func=cmd_ring_scan, config=None)

    p = subs.add_parser("threshold", help="bisect the positivity threshold")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--bisect-tol", dest="bisect_tol", type=float, default=1e-3)
    p.add_argument("--rho-lo", dest="rho_lo", type=float, default=0.01)
    p.add_argument("--rho-hi", dest="rho_hi", type=float, default=0.99)
    p.add_argument("--grid", type=int, default=None, help="radius count (256)")
    p.add_argument("--workers", type=int, default=None)
    _add_series_flags(p)
    p.set_defaults(func=cmd_threshold, config=None)

    p = subs.add_parser("reduce", help="solve the reduced system for a config")
    p.add_argument("--config", required=True, help="experiment config file")
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    _add_series_flags(p)
    p.set_defaults(func=cmd_reduce)

    p = subs.add_parser("profile", help="sample the multi-bubble profile")
    p.add_argument("--config", required=True)
    p.add_argument("--epsilon", type=float, default=None)
    p.add_argument("--rho", type=float, default=None)
    p.add_argument("--grid", type=int, default=None, help="slice edge count (41)")
    p.add_argument("--extent", type=float, default=None, help="slice half-width")
    p.add_argument("--out", default=None, help="CSV path (default profile.csv)")
    _add_series_flags(p)
    p.set_defaults(func=cmd_profile)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BrlError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
