"""Command-line interface: ``omnoise <command> --config run.toml``.

Exit codes: 0 success, 2 config error, 3 physics-domain error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys as _sys
from dataclasses import replace

import numpy as np

from . import analysis as an
from . import closedform as cf
from . import solver as sv
from .config import RunConfig, load_config, parse_config, resolve_probe, resolve_system, benchmark_config_text
from .errors import ConfigError, OptomechError, ZeroTransduction
from .model import derive, frequency_grid, hz
from .output import csv_text, envelope, json_text
from .verification import run_verification

COMMANDS = ("derive", "budget", "sweep", "optimize", "equivalence", "figures", "verify")
REMEDIATION = {
    ZeroTransduction: "hint: set probe power above zero and system.g0_hz > 0",
}


def build_parser():
    parser = argparse.ArgumentParser(prog="omnoise", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="TOML run configuration")
        p.add_argument("--out", help="output file (directory for figures)")
        p.add_argument("--format", choices=("csv", "json"))
        if name == "budget":
            p.add_argument("--engine", choices=("closedform", "solver"))
            p.add_argument("--grid", help="min_hz:max_hz:count[:log|linear]")
        if name == "sweep":
            p.add_argument("--grid", help="min:max:count[:log|linear] for the sweep variable")
        if name == "figures":
            p.add_argument("id", nargs="?", choices=("fig1", "fig2", "fig3", "fig4", "all"))
        if name == "verify":
            p.add_argument("--draws", type=int, help="randomised parameter draws")
            # self-test hook: scales the closed-form imprecision before comparison
            p.add_argument("--perturb-imprecision", type=float, default=1.0, help=argparse.SUPPRESS)
    return parser


def _parse_grid(text):
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise ConfigError(f"--grid: expected min:max:count[:spacing], got {text!r}")
    try:
        lo, hi, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise ConfigError(f"--grid: {exc}") from exc
    spacing = parts[3] if len(parts) == 4 else "log"
    if spacing not in ("log", "linear"):
        raise ConfigError("--grid: spacing must be log or linear")
    return lo, hi, n, spacing


def _grid(lo, hi, n, spacing):
    if spacing == "log":
        return np.logspace(math.log10(lo), math.log10(hi), n)
    return np.linspace(lo, hi, n)


def _frequency_grid(cfg, args, system):
    run = cfg.run
    if getattr(args, "grid", None):
        lo, hi, n, spacing = _parse_grid(args.grid)
        return hz(_grid(lo, hi, n, spacing))
    if "grid_min_hz" in run or "grid_max_hz" in run:
        try:
            lo, hi = run["grid_min_hz"], run["grid_max_hz"]
        except KeyError as exc:
            raise ConfigError("run.grid_min_hz and run.grid_max_hz go together") from exc
        return hz(_grid(lo, hi, run.get("grid_count", 200), run.get("grid_spacing", "log")))
    return frequency_grid(system.omega_m, run.get("grid_count", 200))


def _load(args, required=True) -> RunConfig:
    if args.config:
        return load_config(args.config)
    if required:
        raise ConfigError("--config is required for this command")
    return parse_config(benchmark_config_text())


def _write(text, out):
    if out:
        try:
            with open(out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"output path {out}: not writable ({exc.strerror})") from exc
    else:
        _sys.stdout.write(text)


def cmd_derive(cfg: RunConfig):
    system = resolve_system(cfg)
    probe = resolve_probe(cfg, system)
    d = derive(system, probe)
    result = d.as_dict()
    result["p_min_w"] = d.p_min
    result["p_min_rel_probe_db"] = 10 * math.log10(d.p_min / probe.power) if probe.power > 0 else None
    env = envelope("derive", system, probe, result, cfg.run)
    rows = {k: v for k, v in result.items() if k != "abar"}
    rows["abar_re"], rows["abar_im"] = d.abar.real, d.abar.imag
    table = {"quantity": list(rows), "value": [math.nan if v is None else v for v in rows.values()]}
    return env, table


def cmd_budget(cfg: RunConfig, engine="closedform", grid=None):
    system = resolve_system(cfg)
    probe = resolve_probe(cfg, system)
    omega = frequency_grid(system.omega_m) if grid is None else np.asarray(grid, float)
    if engine == "closedform":
        b = cf.noise_budget(system, probe, omega)
    else:
        angle = math.radians(cfg.run.get("quadrature_angle_deg", 90.0))
        b = sv.solver_budget(system, probe, omega, angle)
    table = {
        "omega_rad_s": b.omega,
        "s_imp": b.s_imp,
        "s_qba": b.s_qba,
        "s_ext_contrib": b.s_ext,
        "s_total": b.s_total,
        "sql_ref": np.full(b.omega.shape, b.sql),
    }
    env = envelope("budget", system, probe, {"engine": engine, **table}, cfg.run)
    return env, table


def cmd_sweep(cfg: RunConfig, grid_text=None):
    system = resolve_system(cfg)
    probe = resolve_probe(cfg, system)
    run = cfg.run
    if "sweep_variable" not in run:
        raise ConfigError("run.sweep_variable: required for sweep")
    if grid_text:
        lo, hi, n, spacing = _parse_grid(grid_text)
        grid = an.GridSpec(lo, hi, n, spacing)
    elif "sweep_values" in run:
        grid = run["sweep_values"]
    else:
        try:
            grid = an.GridSpec(run["sweep_min"], run["sweep_max"], run["sweep_count"],
                               run.get("sweep_spacing", "linear"))
        except KeyError as exc:
            raise ConfigError(f"run.{exc.args[0]}: required for sweep") from exc
    spec = an.SweepSpec(run["sweep_variable"], grid, system, probe)
    try:
        table = an.sweep(spec)
    except (ValueError, TypeError) as exc:
        if isinstance(exc, OptomechError):
            raise
        raise ConfigError(f"run.sweep_*: {exc}") from exc
    env = envelope("sweep", system, probe, {"variable": spec.variable, **table}, cfg.run)
    return env, table


def cmd_optimize(cfg: RunConfig):
    system = resolve_system(cfg)
    probe = resolve_probe(cfg, system)
    target = cfg.run.get("optimize", "power")
    if target == "power":
        opt = an.optimize_power(system, probe, cfg.run.get("optimize_eta"))
        result = {"target": "power", "power_w": opt.power, "p_norm": opt.p_norm, "s_min": opt.s_min,
                  "analytic": opt.analytic}
    else:
        opt = an.optimize_coupling(system, probe)
        result = {"target": "coupling", "eta": opt.eta, "s_min": opt.s_min,
                  "boundary_attracted": opt.boundary_attracted}
    result["db_over_sql"] = float(cf.db_over_sql(result["s_min"], system))
    env = envelope("optimize", system, probe, result, cfg.run)
    return env, {"quantity": list(result), "value": list(result.values())}


def cmd_equivalence(cfg: RunConfig):
    system = resolve_system(cfg)
    probe = resolve_probe(cfg, system)
    eq = an.squeezing_power_equivalence(system, None, probe.power, probe.squeeze_r)
    result = {
        "power_w": probe.power,
        "squeeze_r": probe.squeeze_r,
        "equivalent_power_w": eq.equivalent_power,
        "equivalent_power_ratio": eq.ratio,
        "expected_ratio": math.exp(2 * probe.squeeze_r),
        "deviation": eq.deviation,
        "imprecision_dominated": eq.imprecision_dominated,
    }
    env = envelope("equivalence", system, probe, result, cfg.run)
    return env, {"quantity": list(result), "value": list(result.values())}


def cmd_figures(cfg: RunConfig, fig_id, out_dir):
    system = resolve_system(cfg)
    ids = an.FIGURE_IDS if fig_id == "all" else (fig_id,)
    try:
        os.makedirs(out_dir, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"output directory {out_dir}: {exc.strerror}") from exc
    written = []
    for i in ids:
        ds = an.figure_dataset(i, system)
        csv_path = os.path.join(out_dir, f"{i}.csv")
        with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(csv_text(ds.columns))
        with open(os.path.join(out_dir, f"{i}.json"), "w", encoding="utf-8", newline="\n") as fh:
            fh.write(json_text({"schema_version": 1, "id": i, "axes": ds.axes, "provenance": ds.provenance}))
        written.append(csv_path)
    return written


def cmd_verify(cfg: RunConfig, draws=100, perturb=1.0):
    system = resolve_system(cfg)
    probe = resolve_probe(cfg, system)
    if probe.power == 0:
        probe = replace(probe, power=derive(system, probe).p_min)
    return run_verification(system, probe, draws=draws, seed=cfg.run.get("seed", 0), imprecision_scale=perturb)


def _run(args):
    cmd = args.command
    if cmd == "figures":
        cfg = _load(args, required=False)
        fig_id = args.id or cfg.run.get("figure_id", "all")
        for path in cmd_figures(cfg, fig_id, args.out or cfg.run.get("out", ".")):
            print(path)
        return 0
    if cmd == "verify":
        cfg = _load(args, required=False)
        draws = args.draws if args.draws is not None else cfg.run.get("verify_draws", 100)
        report = cmd_verify(cfg, draws, args.perturb_imprecision)
        fmt = args.format or cfg.run.get("format", "csv")
        if fmt == "json":
            _sys.stdout.write(json_text(report.as_dict()))
        else:
            for c in report.checks:
                print(c.line())
            print(f"{'PASSED' if report.passed else 'FAILED'} in {report.elapsed_s:.2f} s")
        if args.out:
            _write(json_text(report.as_dict()), args.out)
        return 0 if report.passed else 4

    cfg = _load(args)
    fmt = args.format or cfg.run.get("format", "csv")
    out = args.out or cfg.run.get("out")
    if cmd == "derive":
        env, table = cmd_derive(cfg)
    elif cmd == "budget":
        system = resolve_system(cfg)
        engine = args.engine or cfg.run.get("engine", "closedform")
        env, table = cmd_budget(cfg, engine, _frequency_grid(cfg, args, system))
    elif cmd == "sweep":
        env, table = cmd_sweep(cfg, args.grid)
    elif cmd == "optimize":
        env, table = cmd_optimize(cfg)
    else:
        env, table = cmd_equivalence(cfg)
    _write(json_text(env) if fmt == "json" else csv_text(table), out)
    return 0


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _run(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return 2
    except OptomechError as exc:
        print(f"{type(exc).__name__}: {exc}", file=_sys.stderr)
        hint = REMEDIATION.get(type(exc))
        if hint:
            print(hint, file=_sys.stderr)
        return 3


if __name__ == "__main__":
    raise SystemExit(main())
