"""Command-line front end: ``rfk verify|profile|completeness|sweep``.

Exit codes: 0 overall PASS, 1 any FAIL, 2 usage or parameter error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from . import __version__
from .completeness import analyze_completeness, theoretical_growth_exponent
from .errors import DomainError, ParameterError, RFKError
from .registry import RadialParams
from .report import CHECKS, DEFAULT_GRID, DEFAULT_SEED, GridSpec, RunConfig, emit_profile_csv, \
    emit_report_json, parse_sweep, report_json, run_verify, seed_from_env, sweep_configs, sweep_filename

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

log = logging.getLogger("rfkahler")


class UsageError(Exception):
    pass


def _tol_pair(text: str):
    key, sep, val = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected NAME=VALUE, got {text!r}")
    try:
        return key.strip(), float(val)
    except ValueError:
        raise argparse.ArgumentTypeError(f"malformed number in {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON file with RunConfig fields; flags override it")
    common.add_argument("--space", help="sphere, rpn, cpn, hpn or cayley")
    common.add_argument("--n", type=int, help="rank parameter of the space")
    common.add_argument("--C", type=float, help="C > 0")
    common.add_argument("--C1", type=float, help="C1 >= 0")
    common.add_argument("--cZ", type=float, help="cZ (complex projective spaces only)")
    common.add_argument("--grid", help=f"min:max:count[:log|linear] (default {DEFAULT_GRID})")
    common.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECKS)}")
    common.add_argument("--tol", type=_tol_pair, action="append", metavar="NAME=VALUE",
                        help="tolerance override, repeatable")
    common.add_argument("--seed", type=lambda s: int(s, 0), help=f"RNG seed (default {DEFAULT_SEED:#x}, env RFK_SEED)")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(prog="rfk", description="Verify Ricci-flat Kaehler metrics on T(G/K) "
                                "for compact rank-one symmetric spaces.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the verification suite, emit a JSON report")
    sub.add_parser("profile", parents=[common], help="emit the radial profile table as CSV")
    sub.add_parser("completeness", parents=[common], help="distance growth analysis, emit JSON")
    sw = sub.add_parser("sweep", parents=[common], help="verify over a cartesian parameter product")
    sw.add_argument("--sweep", action="append", metavar="KEY=V1,V2,...", required=True,
                    help="parameter list, repeatable (keys C, C1, cZ)")
    sw.add_argument("--out-dir", help="directory for one report per combination")
    return p


def _load_file(path):
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return data


def parse_config(args) -> RunConfig:
    """Merge the optional config file with command-line flags (flags win)."""
    data = _load_file(args.config) if args.config else {}
    allowed = {"space", "n", "C", "C1", "cZ", "grid", "checks", "tolerances", "seed", "out"}
    unknown = set(data) - allowed
    if unknown:
        raise UsageError(f"unknown config keys {sorted(unknown)}")
    for key in ("space", "n", "C", "C1", "cZ", "grid", "out"):
        val = getattr(args, key, None)
        if val is not None:
            data[key] = val
    if args.checks is not None:
        data["checks"] = [c.strip() for c in args.checks.split(",") if c.strip()]
    tols = dict(data.get("tolerances") or {})
    for k, v in args.tol or []:
        tols[k] = v
    if "space" not in data or "n" not in data:
        raise UsageError("--space and --n are required (on the command line or in --config)")
    try:
        params = RadialParams(float(data.get("C", 1.0)), float(data.get("C1", 0.0)), float(data.get("cZ", 0.0)))
        n = data["n"]
        if isinstance(n, float) and n.is_integer():
            n = int(n)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"malformed number in config: {exc}") from None
    grid = data.get("grid", DEFAULT_GRID)
    grid = GridSpec.parse(grid) if isinstance(grid, str) else GridSpec(**grid)
    checks = data.get("checks", CHECKS)
    if isinstance(checks, str):
        checks = [c.strip() for c in checks.split(",") if c.strip()]
    # precedence: --seed, then RFK_SEED, then the config file, then the default
    if args.seed is not None:
        seed = args.seed
    else:
        seed = seed_from_env(default=int(data.get("seed", DEFAULT_SEED)))
    return RunConfig(data["space"], n, params, grid, tols, tuple(checks), data.get("out"), int(seed))


def _open_out(path):
    if not path or path == "-":
        return sys.stdout, False
    return open(path, "w", newline="\n"), True


def _write(path, text: str):
    fh, close = _open_out(path)
    try:
        fh.write(text)
    finally:
        if close:
            fh.close()


def _summary(report, stream):
    for c in report.checks:
        stream.write(f"{c.name:<14} {c.verdict}\n")
    stream.write(f"{'overall':<14} {report.overall}\n")


def cmd_verify(cfg: RunConfig) -> int:
    report = run_verify(cfg)
    if cfg.out:
        _write(cfg.out, report_json(report))
        _summary(report, sys.stdout)
    else:
        emit_report_json(report, sys.stdout)
    return EXIT_PASS if report.overall == "PASS" else EXIT_FAIL


def cmd_profile(cfg: RunConfig) -> int:
    fh, close = _open_out(cfg.out)
    try:
        emit_profile_csv(cfg, fh)
    finally:
        if close:
            fh.close()
    return EXIT_PASS


def cmd_completeness(cfg: RunConfig) -> int:
    rep = analyze_completeness(cfg.desc, cfg.params)
    payload = {
        "space": cfg.desc.name,
        "params": {"C": cfg.params.C, "C1": cfg.params.C1, "cZ": cfg.params.cZ},
        "h_1_30": format(rep.h_end, ".17g"),
        "growth_exponent": format(rep.growth_exponent, ".17g"),
        "theoretical_exponent": format(theoretical_growth_exponent(cfg.desc), ".17g"),
        "divergent": rep.divergent,
        "table": [[format(x, ".17g"), format(fu, ".17g"), format(h, ".17g")]
                  for x, fu, h in zip(rep.grid, rep.f_U, rep.h)],
    }
    _write(cfg.out, json.dumps(payload, indent=2) + "\n")
    return EXIT_PASS if rep.divergent else EXIT_FAIL


def cmd_sweep(cfg: RunConfig, specs, out_dir) -> int:
    sweep = parse_sweep(specs)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
    worst = EXIT_PASS
    for sub in sweep_configs(cfg, sweep):
        report = run_verify(sub)
        if out_dir:
            _write(os.path.join(out_dir, sweep_filename(sub)), report_json(report))
        p = sub.params
        sys.stdout.write(f"C={p.C:g} C1={p.C1:g} cZ={p.cZ:g} {report.overall}\n")
        if report.overall != "PASS":
            worst = EXIT_FAIL
    return worst


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(args)
        if args.command == "verify":
            return cmd_verify(cfg)
        if args.command == "profile":
            return cmd_profile(cfg)
        if args.command == "completeness":
            return cmd_completeness(cfg)
        return cmd_sweep(cfg, args.sweep, args.out_dir)
    except (UsageError, DomainError, ParameterError) as exc:
        sys.stderr.write(f"rfk: error: {exc}\n")
        return EXIT_USAGE
    except OSError as exc:
        sys.stderr.write(f"rfk: I/O error: {exc}\n")
        return EXIT_IO
    except RFKError as exc:
        sys.stderr.write(f"rfk: {type(exc).__name__}: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
