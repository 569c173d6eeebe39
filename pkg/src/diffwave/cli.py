"""Command-line surface: profile | simulate | rates | verify.

Exit codes: 0 success, 1 criterion failure, 2 usage or configuration
error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import configparser
import json
import os
import sys

import numpy as np

from .config import ConfigError, build_scenario, parse_config
from .diagnostics import BASE_TARGETS, IMPROVED_TARGETS, FitError, fit_decay_rate
from .diffusion_wave import solve_profile
from .output import emit_loglog_svg, read_series_csv, write_rates_csv, write_series_csv
from .solver import BlowUpError, run
from .verify import AcceptanceTolerances, run_acceptance

EXIT_OK = 0
EXIT_CRITERION = 1
EXIT_USAGE = 2
EXIT_BLOWUP = 3


def _load_config(path: str):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return parse_config(fh.read())
    except OSError as exc:
        raise ConfigError([f"cannot read config {path!r}: {exc}"]) from exc


def _fmt(x) -> str:
    return format(float(x), ".17g")


def cmd_profile(args) -> int:
    cfg = _load_config(args.config)
    spec, corr = build_scenario(cfg)
    profile = solve_profile(
        spec.closure, cfg.v_minus, cfg.v_plus, spec.closure.alpha, n_cells=cfg.n_cells
    )
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "profile.csv")
    lines = ["xi,phi,dphi,d2phi,d3phi,d4phi"]
    for i in range(len(profile.xi_grid)):
        lines.append(
            ",".join(
                _fmt(a[i])
                for a in (
                    profile.xi_grid,
                    profile.phi,
                    profile.dphi,
                    profile.d2phi,
                    profile.d3phi,
                    profile.d4phi,
                )
            )
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    print(f"wrote {path} ({len(profile.xi_grid)} nodes, residual {profile.residual:.3e})")
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    spec, corr = build_scenario(cfg)
    profile = solve_profile(
        spec.closure, cfg.v_minus, cfg.v_plus, spec.closure.alpha, n_cells=8192
    )
    if spec.end_time > 0.0:
        samples = np.linspace(0.0, spec.end_time, 101)
    else:
        samples = np.array([0.0])
    series = run(spec, profile, corr, samples, store_z=False)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "series.csv")
    write_series_csv(path, series)
    print(f"wrote {path} ({len(series.t)} samples, x0 = {series.x0:.6g})")
    if not series.complete:
        print("warning: run flagged incomplete (wall-clock budget)")
    return EXIT_OK


def cmd_rates(args) -> int:
    data = read_series_csv(args.series)
    t = data["t"]
    if len(t) == 0:
        print("error: empty series", file=sys.stderr)
        return EXIT_USAGE
    window = (t[-1] / 10.0, t[-1])
    targets = IMPROVED_TARGETS if args.targets == "improved" else BASE_TARGETS
    tol = {
        "l2_V": 0.10, "l2_Vx": 0.10, "l2_Vxx": 0.20, "l2_Vxxx": 0.30,
        "l2_z": 0.15, "l2_zx": 0.25, "l2_zxx": 0.40,
    }
    rows = []
    for key, target in targets.items():
        fit = fit_decay_rate(t, data[key], window, target, tol[key])
        if args.targets == "improved":
            passed = fit.passed
        else:
            passed = fit.exponent <= target + tol[key] and fit.r_squared >= 0.98
        rows.append(
            {
                "quantity": key,
                "exponent": fit.exponent,
                "target": target,
                "tolerance": tol[key],
                "r_squared": fit.r_squared,
                "passed": passed,
            }
        )
    os.makedirs(args.out, exist_ok=True)
    write_rates_csv(os.path.join(args.out, "rates.csv"), rows)
    emit_loglog_svg(
        os.path.join(args.out, "rates.svg"),
        t,
        {k: data[k] for k in targets},
    )
    for row in rows:
        mark = "ok " if row["passed"] else "BAD"
        print(
            f"{mark} {row['quantity']:8s} exponent {row['exponent']:+.4f} "
            f"target {row['target']:+.3f} (tol {row['tolerance']:.2f}, "
            f"r2 {row['r_squared']:.4f})"
        )
    print(f"wrote {os.path.join(args.out, 'rates.csv')} and rates.svg")
    return EXIT_OK if all(r["passed"] for r in rows) else EXIT_CRITERION


def _read_acceptance_overrides(path: str) -> AcceptanceTolerances:
    parser = configparser.ConfigParser(
        comment_prefixes=("#",), inline_comment_prefixes=("#",)
    )
    try:
        with open(path, "r", encoding="utf-8") as fh:
            parser.read_string(fh.read())
    except (OSError, configparser.Error) as exc:
        raise ConfigError([f"cannot read verify config {path!r}: {exc}"]) from exc
    updates = {}
    if parser.has_section("acceptance"):
        for key, raw in parser.items("acceptance"):
            try:
                updates[key] = int(raw) if key.endswith("_steps") else float(raw)
            except ValueError as exc:
                raise ConfigError([f"bad acceptance value {key} = {raw!r}"]) from exc
    try:
        return AcceptanceTolerances().override(updates)
    except ValueError as exc:
        raise ConfigError([str(exc)]) from exc


def cmd_verify(args) -> int:
    tol = AcceptanceTolerances()
    if args.config:
        tol = _read_acceptance_overrides(args.config)
    results, _ = run_acceptance(fast=args.fast, tolerances=tol, out_dir=args.out)
    for res in results:
        print(res.line())
        for key, val in res.details.items():
            print(f"         {key} = {val}")
    report = {
        "criteria": [
            {
                "id": r.cid,
                "name": r.name,
                "passed": r.passed,
                "skipped": r.skipped,
                "details": r.details,
            }
            for r in results
        ],
        "overall_pass": all(r.passed for r in results if not r.skipped),
    }
    path = os.path.join(args.out, "verify.json")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {path}")
    ok = report["overall_pass"]
    print("acceptance:", "PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_CRITERION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="diffwave",
        description="damped p-system laboratory: diffusion waves and decay rates",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("profile", help="solve the self-similar profile, write CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="out")
    p.set_defaults(fn=cmd_profile)

    p = sub.add_parser("simulate", help="run a scenario, write the norm series CSV")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default="out")
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("rates", help="fit decay exponents from a series CSV")
    p.add_argument("--series", required=True)
    p.add_argument("--targets", choices=("improved", "base"), default="improved")
    p.add_argument("--out", default="out")
    p.set_defaults(fn=cmd_rates)

    p = sub.add_parser("verify", help="run the acceptance suite")
    p.add_argument("--fast", action="store_true",
                   help="skip the long decay scenarios")
    p.add_argument("--config", default=None,
                   help="optional INI with [acceptance] tolerance overrides")
    p.add_argument("--out", default="verify_out")
    p.set_defaults(fn=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except BlowUpError as exc:
        print(f"numerical blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except FitError as exc:
        print(f"rate-fit failure: {exc}", file=sys.stderr)
        return EXIT_CRITERION


if __name__ == "__main__":
    sys.exit(main())
