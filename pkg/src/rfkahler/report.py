"""Run configuration, the verification suite for one (space, params) pair, and its outputs."""
from __future__ import annotations

import csv
import itertools
import json
import logging
import math
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .algebra import build_model, structure_residuals
from .completeness import analyze_completeness, bernoulli_ode_check, f_U, h_distance, theoretical_growth_exponent, \
    verify_geodesic_field
from .delta import check_extension, check_z2_invariance
from .errors import DomainError, ParameterError, RFKError
from .kahler import check_commutation, check_det_constancy, check_positivity, compare_blocks, w_closed_form, \
    w_structural_oracle
from .radial import RadialProfile
from .registry import Family, RadialParams, SpaceDescriptor, lookup_space, validate_params

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_SEED = 0x2F4C
DEFAULT_GRID = "1e-3:8:50:log"
PASS, FAIL, SKIPPED = "PASS", "FAIL", "SKIPPED"

CHECKS = ("structure", "commutation", "positivity", "w_oracle", "det_constancy", "extension",
          "z2_invariance", "completeness", "bernoulli")

DEFAULT_TOLERANCES = {
    "structure": 1e-10,
    "commutation": 1e-10,
    "w_oracle": 1e-9,
    "det_constancy": 1e-8,
    "extension": 1e-6,
    "z2_invariance": 1e-10,
    "geodesic": 1e-9,
    "bernoulli": 1e-6,
}


@dataclass(frozen=True)
class GridSpec:
    xmin: float = 1e-3
    xmax: float = 8.0
    count: int = 50
    spacing: str = "log"

    @classmethod
    def parse(cls, text: str) -> "GridSpec":
        """Parse ``min:max:count:spacing``, e.g. ``1e-3:8:50:log``."""
        parts = str(text).split(":")
        if len(parts) not in (3, 4):
            raise ParameterError(f"grid must look like min:max:count[:log|linear], got {text!r}")
        try:
            lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError as exc:
            raise ParameterError(f"malformed grid {text!r}: {exc}") from None
        spacing = parts[3] if len(parts) == 4 else "log"
        return cls(lo, hi, count, spacing).validated()

    def validated(self) -> "GridSpec":
        if not (self.xmin > 0 and math.isfinite(self.xmax) and self.xmax > self.xmin):
            raise ParameterError(f"grid needs 0 < min < max, got {self.xmin}, {self.xmax}")
        if self.count < 2:
            raise ParameterError(f"grid count must be >= 2, got {self.count}")
        if self.spacing not in ("log", "linear"):
            raise ParameterError(f"grid spacing must be log or linear, got {self.spacing!r}")
        return self

    def points(self) -> np.ndarray:
        if self.spacing == "log":
            return np.geomspace(self.xmin, self.xmax, self.count)
        return np.linspace(self.xmin, self.xmax, self.count)

    def __str__(self) -> str:
        return f"{self.xmin:g}:{self.xmax:g}:{self.count}:{self.spacing}"


@dataclass
class RunConfig:
    family: Family
    n: int
    params: RadialParams = RadialParams()
    grid: GridSpec = GridSpec()
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    checks: tuple = CHECKS
    out: str | None = None
    seed: int = DEFAULT_SEED

    def __post_init__(self):
        self.desc = lookup_space(self.family, self.n)
        self.family = self.desc.family
        self.params = validate_params(self.desc, self.params)
        self.grid = self.grid.validated()
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise ParameterError(f"unknown checks {sorted(unknown)}; choose from {', '.join(CHECKS)}")
        tol = dict(DEFAULT_TOLERANCES)
        for k, v in self.tolerances.items():
            if k not in DEFAULT_TOLERANCES:
                raise ParameterError(f"unknown tolerance {k!r}; choose from {', '.join(DEFAULT_TOLERANCES)}")
            if not float(v) > 0:
                raise ParameterError(f"tolerance {k} must be > 0, got {v}")
            tol[k] = float(v)
        self.tolerances = tol

    def echo(self) -> dict:
        return {
            "space": self.family.value,
            "n": self.n,
            "params": {"C": self.params.C, "C1": self.params.C1, "cZ": self.params.cZ},
            "grid": str(self.grid),
            "tolerances": dict(self.tolerances),
            "checks": list(self.checks),
        }


@dataclass
class CheckResult:
    name: str
    verdict: str
    residuals: dict = field(default_factory=dict)
    diagnostic: str = ""
    wall_time: float = 0.0


@dataclass
class VerificationReport:
    config: RunConfig
    checks: list

    @property
    def overall(self) -> str:
        verdicts = [c.verdict for c in self.checks]
        if FAIL in verdicts or PASS not in verdicts:
            return FAIL
        return PASS

    def verdicts(self) -> dict:
        return {c.name: c.verdict for c in self.checks}

    def to_dict(self, timings: bool = True) -> dict:
        checks = {}
        for c in self.checks:
            entry = {
                "verdict": c.verdict,
                "residuals": {k: _fmt(v) for k, v in c.residuals.items()},
                "diagnostic": c.diagnostic,
            }
            if timings:
                entry["wall_time"] = round(c.wall_time, 6)
            checks[c.name] = entry
        return {
            "schema_version": SCHEMA_VERSION,
            "version": __version__,
            "seed": self.config.seed,
            "config": self.config.echo(),
            "checks": checks,
            "verdicts": self.verdicts(),
            "overall": self.overall,
        }


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    return format(float(v), ".17g")


# -- individual checks --------------------------------------------------------------------
# Each returns (verdict, residuals, diagnostic).

def _check_structure(cfg, model, prof, grid):
    res = structure_residuals(model)
    bad = {k: v for k, v in res.items() if v >= cfg.tolerances["structure"]}
    return (FAIL if bad else PASS), res, (f"identities violated: {sorted(bad)}" if bad else "")


def _check_commutation(cfg, model, prof, grid):
    worst1 = worst2 = 0.0
    for x in grid:
        r1, r2 = check_commutation(model, cfg.params, x)
        worst1, worst2 = max(worst1, r1), max(worst2, r2)
    tol = cfg.tolerances["commutation"]
    ok = worst1 < tol and worst2 < tol
    return (PASS if ok else FAIL), {"first_line": worst1, "second_line": worst2}, ""


def _check_positivity(cfg, model, prof, grid):
    eH = eS = math.inf
    minors = True
    for x in grid:
        r = check_positivity(w_closed_form(cfg.desc, cfg.params, x, prof))
        eH = min(eH, r.wH_min_eig)
        if not math.isnan(r.wStar_min_eig):
            eS = min(eS, r.wStar_min_eig)
        minors = minors and r.minors_positive
    ok = eH > 0 and eS > 0 and minors
    res = {"wH_min_eig": eH, "wStar_min_eig": eS if eS < math.inf else math.nan}
    return (PASS if ok else FAIL), res, ("" if ok else "w is not positive definite on the grid")


def _check_oracle(cfg, model, prof, grid):
    diff = holo = off = 0.0
    for x in grid:
        ora = w_structural_oracle(model, cfg.params, x, prof)
        diff = max(diff, compare_blocks(w_closed_form(cfg.desc, cfg.params, x, prof), ora))
        holo = max(holo, ora.residuals["holomorphic"])
        off = max(off, ora.residuals["off_block"])
    tol = cfg.tolerances["w_oracle"]
    ok = max(diff, holo, off) < tol
    return (PASS if ok else FAIL), {"max_entry_deviation": diff, "holomorphic": holo, "off_block": off}, ""


def _check_det(cfg, model, prof, grid):
    r = check_det_constancy(cfg.desc, cfg.params, grid, cfg.tolerances["det_constancy"])
    res = {"constant": r.constant, "expected": r.expected, "max_rel_deviation": r.max_rel_deviation,
           "constant_rel_error": abs(r.constant - r.expected) / r.expected}
    if r.grouped_rel_error is not None:
        res["grouped_rel_error"] = r.grouped_rel_error
    ok = r.passed and res["constant_rel_error"] < cfg.tolerances["det_constancy"]
    return (PASS if ok else FAIL), res, ""


def _check_extension(cfg, model, prof, grid):
    r = check_extension(cfg.desc, cfg.params)
    res = {"min_limit_eig": float(np.min(r.limit_eigs)), "fp_over_x_growth": float(r.fp_over_x[-1] / r.fp_over_x[-2])}
    if r.converged:
        err = float(np.max(np.abs(r.limit_eigs - r.expected_eigs)))
        res["limit_eig_error"] = err
        if err >= cfg.tolerances["extension"]:
            return FAIL, res, f"limit eigenvalues deviate from the closed form by {err:.3g}"
    return (PASS if r.passed else FAIL), res, r.diagnostic


def _check_z2(cfg, model, prof, grid):
    r = check_z2_invariance(model, cfg.params, seed=cfg.seed, tol=cfg.tolerances["z2_invariance"])
    return (PASS if r.passed else FAIL), {"max_defect": r.max_defect}, ""


def _check_completeness(cfg, model, prof, grid):
    rep = analyze_completeness(cfg.desc, cfg.params)
    res = {"h_1_30": rep.h_end, "growth_exponent": rep.growth_exponent,
           "theoretical_exponent": theoretical_growth_exponent(cfg.desc)}
    ok = rep.divergent
    diag = "" if ok else "h(1, 30) does not exceed 50 with positive growth"
    if model is not None:
        worst = 0.0
        for x in grid:
            worst = max(worst, verify_geodesic_field(model, cfg.params, x, seed=cfg.seed).max_residual)
        res["geodesic_field"] = worst
        if worst >= cfg.tolerances["geodesic"]:
            ok, diag = False, f"geodesic field residual {worst:.3g}"
    return (PASS if ok else FAIL), res, diag


def _check_bernoulli(cfg, model, prof, grid):
    dev = bernoulli_ode_check(cfg.params, cfg.desc.n, 0.5, 3.0)
    return (PASS if dev < cfg.tolerances["bernoulli"] else FAIL), {"max_rel_deviation": dev}, ""


_RUNNERS = {
    "structure": _check_structure,
    "commutation": _check_commutation,
    "positivity": _check_positivity,
    "w_oracle": _check_oracle,
    "det_constancy": _check_det,
    "extension": _check_extension,
    "z2_invariance": _check_z2,
    "completeness": _check_completeness,
    "bernoulli": _check_bernoulli,
}
_NEEDS_MODEL = {"structure", "commutation", "w_oracle", "z2_invariance"}


def _skip_reason(name: str, desc: SpaceDescriptor) -> str:
    if name in _NEEDS_MODEL and not desc.has_matrix_model:
        return f"{desc.name} has no matrix model"
    if name == "z2_invariance" and not desc.is_sphere_like:
        return "defined for sphere-type models only"
    if name == "bernoulli" and not desc.is_complex_proj:
        return "the Bernoulli reduction applies to complex projective spaces"
    return ""


def run_verify(cfg: RunConfig) -> VerificationReport:
    """Run the selected checks in canonical order; a failing computation yields FAIL, not an abort."""
    desc = cfg.desc
    model = build_model(desc) if desc.has_matrix_model else None
    prof = RadialProfile(desc, cfg.params)
    grid = cfg.grid.points()
    results = []
    for name in CHECKS:
        if name not in cfg.checks:
            continue
        reason = _skip_reason(name, desc)
        if reason:
            results.append(CheckResult(name, SKIPPED, diagnostic=reason))
            continue
        t0 = time.perf_counter()
        try:
            verdict, res, diag = _RUNNERS[name](cfg, model, prof, grid)
        except (RFKError, ArithmeticError, ValueError) as exc:
            verdict, res, diag = FAIL, {}, f"{type(exc).__name__}: {exc}"
        dt = time.perf_counter() - t0
        log.info("%s %s: %s (%.3f s)", desc.name, name, verdict, dt)
        results.append(CheckResult(name, verdict, res, diag, dt))
    return VerificationReport(cfg, results)


# -- outputs -------------------------------------------------------------------------

CSV_COLUMNS = ("x", "f_prime", "f_double_prime", "wH_min_eig", "wStar_min_eig", "det_product", "f_U", "h")


def profile_rows(cfg: RunConfig):
    """One row per grid point; h is the distance from the first grid radius."""
    prof = RadialProfile(cfg.desc, cfg.params)
    grid = cfg.grid.points()
    h = 0.0
    prev = grid[0]
    for x in grid:
        h += h_distance(cfg.desc, cfg.params, prev, x, prof)
        prev = x
        blk = w_closed_form(cfg.desc, cfg.params, x, prof)
        pos = check_positivity(blk)
        yield (x, prof.f_prime(x), prof.f_double_prime(x), pos.wH_min_eig, pos.wStar_min_eig,
               blk.det_product(), f_U(cfg.desc, cfg.params, x, prof), h)


def emit_profile_csv(cfg: RunConfig, path) -> None:
    """Write the radial profile table; ``path`` is a filename or an open text stream."""
    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for row in profile_rows(cfg):
            w.writerow([_fmt(v) for v in row])

    if hasattr(path, "write"):
        write(path)
    else:
        with open(path, "w", newline="") as fh:
            write(fh)


def report_json(report: VerificationReport, timings: bool = True) -> str:
    return json.dumps(report.to_dict(timings), indent=2) + "\n"


def emit_report_json(report: VerificationReport, path) -> None:
    text = report_json(report)
    if hasattr(path, "write"):
        path.write(text)
    else:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)


def parse_sweep(specs) -> dict:
    """``["C=0.5,1,2", "cZ=0,0.5"]`` -> {"C": [0.5, 1.0, 2.0], "cZ": [0.0, 0.5]}."""
    out = {}
    for spec in specs or []:
        key, sep, vals = str(spec).partition("=")
        key = key.strip()
        if not sep or key not in ("C", "C1", "cZ"):
            raise ParameterError(f"sweep entries look like C=0.5,1,2 (keys C, C1, cZ), got {spec!r}")
        try:
            out[key] = [float(v) for v in vals.split(",") if v.strip()]
        except ValueError:
            raise ParameterError(f"malformed number in sweep {spec!r}") from None
        if not out[key]:
            raise ParameterError(f"empty sweep list in {spec!r}")
    return out


def sweep_configs(base: RunConfig, sweep: dict):
    """Cartesian product of ``sweep`` applied to ``base``."""
    keys = list(sweep)
    for combo in itertools.product(*(sweep[k] for k in keys)):
        params = base.params.with_(**dict(zip(keys, combo)))
        yield RunConfig(base.family, base.n, params, base.grid, dict(base.tolerances), base.checks, None, base.seed)


def sweep_filename(cfg: RunConfig) -> str:
    p = cfg.params
    return f"report_{cfg.family.value}{cfg.n}_C{p.C:g}_C1{p.C1:g}_cZ{p.cZ:g}.json"


def seed_from_env(default: int = DEFAULT_SEED) -> int:
    raw = os.environ.get("RFK_SEED")
    if raw is None or raw == "":
        return default
    try:
        return int(raw, 0)
    except ValueError:
        raise ParameterError(f"RFK_SEED must be an integer, got {raw!r}") from None


__all__ = [
    "CHECKS", "CSV_COLUMNS", "DEFAULT_SEED", "DEFAULT_TOLERANCES", "CheckResult", "GridSpec", "RunConfig",
    "VerificationReport", "emit_profile_csv", "emit_report_json", "parse_sweep", "report_json", "run_verify",
    "seed_from_env", "sweep_configs", "sweep_filename", "DomainError",
]
