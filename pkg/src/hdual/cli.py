"""Batch front end: ``hdual solve|sweep|selftest``.

Exit codes: 0 full convergence, 2 partial convergence, 1 configuration error
(or a failed self-test).
"""

from __future__ import annotations

import argparse
import contextlib
import copy
import csv
import hashlib
import json
import math
import os
import sys
import tempfile
import time
from typing import Any, Sequence

import jsonschema
import numpy as np
import scipy.fft as sfft

from . import __version__
from .concentration import ConcentrationReport, SweepConfig, run_sweep
from .dual import DualProblem
from .errors import ConfigError, HDualError, IoError, RegionViolation
from .exponents import check_admissible
from .field import (
    Grid,
    coefficient_from_dict,
    make_coefficient,
    make_grid,
    write_field,
)
from .groundstate import Solution, SolverConfig, solve_ground_state, with_algorithm
from .resolvent import make_plan
from .selftest import run_selftest

SCHEMA_VERSION = 1
THREADS_ENV = "HDUAL_THREADS"

_COEFFICIENT = {
    "oneOf": [
        {
            "type": "object",
            "properties": {"kind": {"const": "constant"}, "value": {"type": "number", "exclusiveMinimum": 0}},
            "required": ["kind", "value"],
            "additionalProperties": False,
        },
        {
            "type": "object",
            "properties": {
                "kind": {"const": "gaussians"},
                "floor": {"type": "number", "exclusiveMinimum": 0},
                "bumps": {
                    "type": "array",
                    "items": {
                        "type": "object",
                        "properties": {
                            "amplitude": {"type": "number", "exclusiveMinimum": 0},
                            "center": {"type": "array", "items": {"type": "number"}},
                            "width": {"type": "number", "exclusiveMinimum": 0},
                        },
                        "required": ["amplitude", "center", "width"],
                        "additionalProperties": False,
                    },
                },
            },
            "required": ["kind", "floor", "bumps"],
            "additionalProperties": False,
        },
    ]
}

RUN_SCHEMA: dict[str, Any] = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "mode": {"enum": ["solve", "sweep", "selftest"]},
        "dimension": {"type": "integer"},
        "exponents": {
            "type": "object",
            "properties": {"p": {"type": "number"}, "q": {"type": "number"}},
            "required": ["p", "q"],
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {
                "half_width": {"type": "number", "exclusiveMinimum": 0},
                "half_width_over_pi": {"type": "number", "exclusiveMinimum": 0},
                "samples": {"type": "integer"},
            },
            "required": ["samples"],
            "oneOf": [{"required": ["half_width"]}, {"required": ["half_width_over_pi"]}],
            "additionalProperties": False,
        },
        "resolvent": {
            "type": "object",
            "properties": {"delta": {"type": ["number", "null"], "exclusiveMinimum": 0}},
            "additionalProperties": False,
        },
        "coefficients": {
            "type": "object",
            "properties": {"P": _COEFFICIENT, "Q": _COEFFICIENT},
            "required": ["P", "Q"],
            "additionalProperties": False,
        },
        "solver": {
            "type": "object",
            "properties": {
                "algorithm": {"enum": ["projected_gradient", "fixed_point"]},
                "max_iters": {"type": "integer", "minimum": 1},
                "tol_residual": {"type": "number", "exclusiveMinimum": 0},
                "armijo": {
                    "type": "object",
                    "properties": {
                        "shrink": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                        "slope": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                    },
                    "additionalProperties": False,
                },
                "min_step": {"type": "number", "exclusiveMinimum": 0},
                "seed": {"enum": ["gaussian", "random"]},
                "seed_width": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "seed_center": {"type": ["array", "null"], "items": {"type": "number"}},
                "sweep_order": {"enum": ["psi_first", "phi_first"]},
                "max_reseeds": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "sweep": {
            "type": "object",
            "properties": {
                "eps_list": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "rho": {"type": ["number", "null"], "exclusiveMinimum": 0},
                "multistart_count": {"type": "integer", "minimum": 1},
                "dedup_energy_tol": {"type": "number", "minimum": 0},
            },
            "required": ["eps_list"],
            "additionalProperties": False,
        },
        "output_dir": {"type": "string"},
        "seed": {"type": "integer", "minimum": 0},
        "quick": {"type": "boolean"},
    },
    "required": ["schema_version", "mode"],
    "additionalProperties": False,
    "allOf": [
        {
            "if": {"properties": {"mode": {"enum": ["solve", "sweep"]}}},
            "then": {"required": ["dimension", "exponents", "grid", "coefficients", "output_dir"]},
        },
        {"if": {"properties": {"mode": {"const": "sweep"}}}, "then": {"required": ["sweep"]}},
    ],
}


# ---------------------------------------------------------------- config


def validate_config(cfg: dict) -> dict:
    """Schema-check a run configuration; raises ConfigError."""
    try:
        jsonschema.validate(cfg, RUN_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}", reason="schema") from None
    if cfg["mode"] in ("solve", "sweep"):
        try:
            check_admissible(cfg["dimension"], cfg["exponents"]["p"], cfg["exponents"]["q"])
        except RegionViolation as exc:
            raise ConfigError(exc.detail or exc.reason, reason=exc.reason) from None
        except ValueError as exc:
            raise ConfigError(str(exc), reason="exponents") from None
        try:
            make_grid(cfg["dimension"], _half_width(cfg["grid"]), cfg["grid"]["samples"])
            for name in ("P", "Q"):
                coefficient_from_dict(cfg["coefficients"][name])
            if cfg["mode"] == "sweep":
                sweep_config(cfg)
        except ValueError as exc:
            raise ConfigError(str(exc), reason="setup") from None
    return cfg


def load_config(path: str | os.PathLike) -> dict:
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}", reason="unreadable") from None
    return validate_config(cfg)


def _half_width(grid_cfg: dict) -> float:
    if "half_width" in grid_cfg:
        return float(grid_cfg["half_width"])
    return float(grid_cfg["half_width_over_pi"]) * math.pi


def solver_config(cfg: dict) -> SolverConfig:
    s = cfg.get("solver", {})
    armijo = s.get("armijo", {})
    center = s.get("seed_center")
    return SolverConfig(
        algorithm=s.get("algorithm", "projected_gradient"),
        max_iters=s.get("max_iters", 2000),
        tol_residual=s.get("tol_residual", 1e-9),
        armijo_shrink=armijo.get("shrink", 0.5),
        armijo_slope=armijo.get("slope", 1e-4),
        min_step=s.get("min_step", 1e-14),
        seed=s.get("seed", "gaussian"),
        seed_width=s.get("seed_width"),
        seed_center=None if center is None else tuple(center),
        rng_seed=cfg.get("seed", 0),
        sweep_order=s.get("sweep_order", "psi_first"),
        max_reseeds=s.get("max_reseeds", 10),
    )


def sweep_config(cfg: dict, threads: int = 1) -> SweepConfig:
    sw = cfg["sweep"]
    return SweepConfig(
        eps_list=tuple(sw["eps_list"]),
        P=coefficient_from_dict(cfg["coefficients"]["P"]),
        Q=coefficient_from_dict(cfg["coefficients"]["Q"]),
        N=cfg["dimension"],
        p=cfg["exponents"]["p"],
        q=cfg["exponents"]["q"],
        half_width=_half_width(cfg["grid"]),
        samples=cfg["grid"]["samples"],
        delta=cfg.get("resolvent", {}).get("delta"),
        rho=sw.get("rho"),
        solver=solver_config(cfg),
        multistart_count=sw.get("multistart_count", 1),
        dedup_energy_tol=sw.get("dedup_energy_tol", 1e-8),
        threads=threads,
    )


# ---------------------------------------------------------------- output


def _sha256(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _atomic_write_text(path: str, text: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def _jsonable(x):
    if isinstance(x, float) and not math.isfinite(x):
        return None
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.generic):
        return _jsonable(x.item())
    return x


def write_manifest(output_dir: str, config: dict, scalars: dict, timings: dict, files: Sequence[str], exit_code: int) -> str:
    inventory = [
        {"path": os.path.relpath(f, output_dir), "bytes": os.path.getsize(f), "sha256": _sha256(f)}
        for f in sorted(files)
    ]
    manifest = {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "config": config,
        "exit_code": exit_code,
        "scalars": _jsonable(scalars),
        "timings": timings,
        "files": inventory,
    }
    path = os.path.join(output_dir, "manifest.json")
    _atomic_write_text(path, json.dumps(manifest, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def _write_csv(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> str:
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return path


def radial_profile(values: np.ndarray, grid: Grid, center_index: Sequence[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Shell averages of ``|values|`` in bins of width h around ``center_index``."""
    if center_index is not None:
        shift = tuple(int(o) - int(c) for o, c in zip(grid.origin_index, center_index))
        values = np.roll(values, shift, axis=tuple(range(grid.N)))
    r = grid.radius
    bins = np.floor(r / grid.h + 0.5).astype(int).ravel()
    nbins = int(grid.n // 2)
    keep = bins < nbins
    sums = np.bincount(bins[keep], weights=np.abs(values).ravel()[keep], minlength=nbins)
    counts = np.bincount(bins[keep], minlength=nbins)
    radii = np.arange(nbins) * grid.h
    with np.errstate(invalid="ignore"):
        avg = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return radii, avg


def _center_of(sol: Solution) -> tuple[int, ...]:
    grid = sol.state.grid
    w = np.abs(sol.state.psi.values) ** sol.state.problem.exponents.q_dual
    coords = np.stack(np.broadcast_arrays(*grid.coords()))
    c = np.array([np.sum(coords[i] * w) for i in range(grid.N)]) / np.sum(w)
    return grid.nearest_index(c)


def emit_plot_data(report: ConcentrationReport, output_dir: str) -> list[str]:
    """Write energy.csv, barycenter.csv and radial_profile.csv; returns their paths."""
    try:
        os.makedirs(output_dir, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create {output_dir}: {exc}") from exc
    recs = report.records
    N = len(recs[0].barycenter_psi) if recs else 0
    energy_rows = [[repr(r.eps), repr(r.c_eps), repr(report.c_M)] for r in recs]
    bary_header = ["eps"] + [f"psi_x{i + 1}" for i in range(N)] + [f"phi_x{i + 1}" for i in range(N)]
    bary_rows = [[repr(r.eps)] + [repr(float(x)) for x in r.barycenter_psi] + [repr(float(x)) for x in r.barycenter_phi] for r in recs]
    paths = [
        _write_csv(os.path.join(output_dir, "energy.csv"), ["eps", "c_eps", "c_M"], energy_rows),
        _write_csv(os.path.join(output_dir, "barycenter.csv"), bary_header, bary_rows),
    ]
    profile_rows: list[list] = []
    solved = [r for r in recs if r.solution is not None]
    if solved and report.limit is not None:
        sol = solved[-1].solution
        grid = sol.state.grid
        radii, prof = radial_profile(sol.primal.u.values, grid, _center_of(sol))
        _, lim = radial_profile(report.limit.primal.u.values, grid, _center_of(report.limit))
        profile_rows = [[repr(float(a)), repr(float(b)), repr(float(c))] for a, b, c in zip(radii, prof, lim)]
    paths.append(_write_csv(os.path.join(output_dir, "radial_profile.csv"), ["r", "u_smallest_eps", "u_limit"], profile_rows))
    return paths


def _dump_solution(sol: Solution, output_dir: str, tag: str) -> list[str]:
    files = []
    for role, f in (("psi", sol.state.psi), ("phi", sol.state.phi), ("u", sol.primal.u), ("v", sol.primal.v)):
        files.extend(write_field(os.path.join(output_dir, f"{tag}_{role}.f8"), f, role))
    return files


# ---------------------------------------------------------------- modes


def _run_solve(cfg: dict, output_dir: str, timings: dict) -> tuple[dict, list[str], int]:
    exps = check_admissible(cfg["dimension"], cfg["exponents"]["p"], cfg["exponents"]["q"])
    t0 = time.perf_counter()
    grid = make_grid(cfg["dimension"], _half_width(cfg["grid"]), cfg["grid"]["samples"])
    plan = make_plan(grid, cfg.get("resolvent", {}).get("delta"))
    P = make_coefficient(coefficient_from_dict(cfg["coefficients"]["P"]), grid)
    Q = make_coefficient(coefficient_from_dict(cfg["coefficients"]["Q"]), grid)
    prob = DualProblem(exps, P, Q, plan)
    timings["setup"] = time.perf_counter() - t0
    base = solver_config(cfg)
    sols = {}
    for alg in (base.algorithm, "fixed_point" if base.algorithm == "projected_gradient" else "projected_gradient"):
        t0 = time.perf_counter()
        sols[alg] = solve_ground_state(prob, with_algorithm(base, alg))
        timings[alg] = time.perf_counter() - t0
    primary = sols[base.algorithm]
    e_pg = sols["projected_gradient"].energy
    e_fp = sols["fixed_point"].energy
    scalars = {
        "energy": primary.energy,
        "algorithms": {alg: s.to_dict() for alg, s in sols.items()},
        "energy_relative_difference": abs(e_pg - e_fp) / abs(e_fp),
        "delta": plan.delta,
    }
    files = _dump_solution(primary, output_dir, "ground")
    code = 0 if all(s.converged for s in sols.values()) else 2
    return scalars, files, code


def _run_sweep(cfg: dict, output_dir: str, timings: dict, threads: int) -> tuple[dict, list[str], int]:
    scfg = sweep_config(cfg, threads)
    t0 = time.perf_counter()
    report = run_sweep(scfg)
    timings["sweep"] = time.perf_counter() - t0
    files = emit_plot_data(report, output_dir)
    summary = os.path.join(output_dir, "summary.csv")
    with open(summary, "w") as fh:
        fh.write(report.to_csv())
    files.append(summary)
    solved = [r for r in report.records if r.solution is not None]
    if solved:
        files.extend(_dump_solution(solved[-1].solution, output_dir, "smallest_eps"))
    if report.limit is not None:
        files.extend(_dump_solution(report.limit, output_dir, "limit"))
    code = 0 if report.all_converged else 2
    return report.to_dict(), files, code


def run(config_path: str | os.PathLike, output: str | None = None, threads: int | None = None, mode: str | None = None) -> int:
    """Execute a run configuration and return the process exit code."""
    try:
        cfg = load_config(config_path)
        if mode is not None and cfg["mode"] != mode:
            raise ConfigError(f"config mode {cfg['mode']!r} does not match command {mode!r}", reason="mode")
    except ConfigError as exc:
        print(f"configuration error [{exc.reason}]: {exc}", file=sys.stderr)
        return 1
    threads = _resolve_threads(threads)
    if cfg["mode"] == "selftest":
        return _selftest(cfg.get("quick", False), cfg.get("seed", 0))
    output_dir = output or cfg["output_dir"]
    try:
        os.makedirs(output_dir, exist_ok=True)
    except OSError as exc:
        print(f"cannot create output directory: {exc}", file=sys.stderr)
        return 1
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    try:
        with sfft.set_workers(threads):
            if cfg["mode"] == "solve":
                scalars, files, code = _run_solve(cfg, output_dir, timings)
            else:
                scalars, files, code = _run_sweep(cfg, output_dir, timings, threads)
    except HDualError as exc:
        print(f"run failed: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1 if isinstance(exc, ConfigError) else 2
    timings["total"] = time.perf_counter() - t0
    echo = copy.deepcopy(cfg)
    echo["output_dir"] = output_dir
    write_manifest(output_dir, echo, scalars, timings, files, code)
    return code


def _resolve_threads(threads: int | None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV)
        threads = int(env) if env else 1
    return max(1, int(threads))


def _selftest(quick: bool, seed: int = 0) -> int:
    results = run_selftest(quick=quick, seed=seed)
    for r in results:
        print(r.line())
    return 0 if all(r.passed for r in results) else 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hdual", description="Dual ground states of the nonlinear Helmholtz system.")
    parser.add_argument("--version", action="version", version=f"hdual {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep"):
        p = sub.add_parser(name)
        p.add_argument("--config", required=True)
        p.add_argument("--output", default=None, help="output directory (overrides output_dir)")
        p.add_argument("--threads", type=int, default=None, help=f"FFT worker threads (fallback ${THREADS_ENV})")
    p = sub.add_parser("selftest")
    p.add_argument("--quick", action="store_true")
    p.add_argument("--config", default=None)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        if args.config is not None:
            return run(args.config, mode="selftest")
        return _selftest(args.quick)
    return run(args.config, output=args.output, threads=args.threads, mode=args.command)


if __name__ == "__main__":
    sys.exit(main())
