"""Command-line entry points.

    hobwaves solve-homogeneous    --config CFG [--out DIR] [--verbose]
    hobwaves solve-nonhomogeneous --config CFG [--out DIR] [--verbose]
    hobwaves propagate            --config CFG --profile FILE [--out DIR]
    hobwaves sweep                --config CFG [--out DIR] [--workers N]

Exit status: 0 converged/completed, 2 configuration error, 3 numerical
failure (non-convergence, singular dispersion, blow-up).  Default output
root is $HOBWAVES_OUTPUT_ROOT (fallback ./runs); every run directory gets
exactly one manifest.json recording config, inputs, outputs and summary.
"""

from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from . import collocation, model, petviashvili, propagation, runio
from .errors import ConfigError
from .model import make_nonlinearity
from .reports import Termination

log = logging.getLogger("hobwaves")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _solver_cfg_fixed_point(section: dict) -> petviashvili.SolveConfig:
    kw = {}
    for key in ("tol", "divergence_guard"):
        if key in section:
            kw[key] = float(section[key])
    if "max_iter" in section:
        kw["max_iter"] = int(section["max_iter"])
    for key in ("record_history", "dealias"):
        if key in section:
            kw[key] = bool(section[key])
    return petviashvili.SolveConfig(**kw)


def _solver_cfg_newton(section: dict) -> collocation.NewtonConfig:
    kw = {}
    if "tol" in section:
        kw["tol"] = float(section["tol"])
    if "max_iter" in section:
        kw["max_iter"] = int(section["max_iter"])
    if "jacobian" in section:
        kw["jacobian"] = str(section["jacobian"])
    if "fd_step" in section:
        kw["fd_step"] = float(section["fd_step"])
    if "damping" in section:
        kw["damping"] = bool(section["damping"])
    if "max_halvings" in section:
        kw["max_halvings"] = int(section["max_halvings"])
    return collocation.NewtonConfig(**kw)


def _finish_solve(out, command, cfg, config_path, profile, report, extra_outputs):
    runio.write_profile_csv(out / "profile.csv", profile)
    runio.write_history_csv(out / "history.csv", report.history)
    outputs = {"profile": "profile.csv", "history": "history.csv", **extra_outputs}
    if report.functionals is not None:
        runio.write_json(out / "functionals.json", report.functionals.to_json_dict())
        outputs["functionals"] = "functionals.json"
    runio.write_manifest(
        out, command, cfg, {"config": str(config_path)}, outputs, report.summary_dict()
    )
    for msg in report.warnings:
        log.warning(msg)
    if report.termination is Termination.CONVERGED:
        log.info(
            "converged in %d iterations, relative residual %.3e",
            report.iterations, report.residual_inf_rel,
        )
        return EXIT_OK
    log.error("solve failed: %s after %d iterations",
              report.termination.value, report.iterations)
    return EXIT_NUMERICAL


def cmd_solve_homogeneous(args) -> int:
    cfg = runio.load_config(args.config)
    params = runio.build_params(cfg)
    grid = runio.build_grid(cfg)
    nl = runio.build_nonlinearity(cfg)
    if nl.homogeneous_power is None:
        raise ConfigError("solve-homogeneous requires nonlinearity kind 'power'")
    initial = runio.build_initial_profile(cfg, grid)
    solve_cfg = _solver_cfg_fixed_point(runio.solver_section(cfg))
    out = runio.default_out_dir("solve-homogeneous", args.out)
    profile, report = petviashvili.solve(initial, params, nl, solve_cfg)
    return _finish_solve(out, "solve-homogeneous", cfg, args.config, profile, report, {})


def cmd_solve_nonhomogeneous(args) -> int:
    cfg = runio.load_config(args.config)
    params = runio.build_params(cfg)
    grid = runio.build_grid(cfg)
    section = cfg.get("nonlinearity", {})
    if section.get("kind") != "quartic":
        raise ConfigError("solve-nonhomogeneous requires nonlinearity kind 'quartic'")
    nl = runio.build_nonlinearity(cfg)
    initial_cfg = cfg.get("initial", {})
    a0 = initial_cfg.get("a0")
    if a0 is None or abs(float(a0) - grid.length / 2.0) > 1e-12 * grid.length:
        raise ConfigError(
            f"the cosine basis requires the initial bump centered at a0 = L/2 = "
            f"{grid.length / 2.0}; got a0 = {a0}"
        )
    initial_profile = runio.build_initial_profile(cfg, grid)
    initial = collocation.expansion_from_profile(initial_profile)
    newton_cfg = _solver_cfg_newton(runio.solver_section(cfg))
    out = runio.default_out_dir("solve-nonhomogeneous", args.out)
    exp, report = collocation.newton_solve(initial, params, nl, newton_cfg)
    runio.write_coefficients_json(out / "coefficients.json", exp)
    resampled = collocation.resample_to_grid(exp)
    return _finish_solve(
        out, "solve-nonhomogeneous", cfg, args.config, resampled, report,
        {"coefficients": "coefficients.json"},
    )


def cmd_propagate(args) -> int:
    cfg = runio.load_config(args.config)
    params = runio.build_params(cfg)
    grid = runio.build_grid(cfg)
    nl = runio.build_nonlinearity(cfg)
    prop_cfg = runio.propagation_section(cfg)
    profile = runio.load_profile_any(args.profile, grid)
    out = runio.default_out_dir("propagate", args.out)

    initial = propagation.EvolutionState.from_wave_profile(profile)
    final, snapshots, diagnostics = propagation.propagate(initial, params, nl, prop_cfg)

    snap_dir = out / "snapshots"
    snap_dir.mkdir(exist_ok=True)
    index = []
    for i, (t, state) in enumerate(snapshots):
        name = f"snap_{i:06d}.csv"
        runio.write_snapshot_csv(snap_dir / name, grid, state.u, state.eta)
        index.append({"t": t, "file": f"snapshots/{name}"})
    runio.write_json(snap_dir / "index.json", {"snapshots": index})

    errors = propagation.verify_translation(final, initial, params.omega, prop_cfg.t_final)
    runio.write_json(out / "errors.json", errors)
    summary = {
        "t_final": prop_cfg.t_final,
        "dt": prop_cfg.dt,
        "theta": prop_cfg.theta,
        "n_steps": diagnostics["n_steps"],
        "max_norm_final": float(diagnostics["max_norms"][-1]),
        "translation_errors": errors,
    }
    runio.write_manifest(
        out, "propagate", cfg,
        {"config": str(args.config), "profile": str(args.profile)},
        {"snapshots_index": "snapshots/index.json", "errors": "errors.json"},
        summary,
    )
    log.info("propagated to t=%g; relative L2 errors u=%.3e eta=%.3e",
             prop_cfg.t_final, errors["err_l2_u"], errors["err_l2_eta"])
    return EXIT_OK


def _run_sweep_point(task) -> dict:
    """Executed in a worker process: one (omega, p) solve into its own dir."""
    cfg, omega, p, point_dir = task
    cfg = dict(cfg)
    cfg["omega"] = omega
    if p is not None:
        cfg["nonlinearity"] = {"kind": "power", "p": p}
    params = runio.build_params(cfg)
    grid = runio.build_grid(cfg)
    nl = runio.build_nonlinearity(cfg)
    initial = runio.build_initial_profile(cfg, grid)
    solve_cfg = _solver_cfg_fixed_point(runio.solver_section(cfg))
    out = Path(point_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        profile, report = petviashvili.solve(initial, params, nl, solve_cfg)
    except RuntimeError as exc:
        runio.write_json(out / "error.json", {"error": str(exc)})
        return {
            "omega": omega, "p": p,
            "in_regime": model.check_velocity_in_regime(params),
            "converged": False, "iterations": 0, "residual": None,
            "I_omega": None, "J_omega": None, "I2": None,
        }
    runio.write_profile_csv(out / "profile.csv", profile)
    runio.write_history_csv(out / "history.csv", report.history)
    if report.functionals is not None:
        runio.write_json(out / "functionals.json", report.functionals.to_json_dict())
    runio.write_manifest(out, "sweep-point", cfg, {}, {"profile": "profile.csv"},
                         report.summary_dict())
    f = report.functionals
    return {
        "omega": omega, "p": p,
        "in_regime": bool(report.in_regime),
        "converged": bool(report.converged),
        "iterations": report.iterations,
        "residual": report.residual_inf_rel,
        "I_omega": f.i_omega if f else None,
        "J_omega": f.j_omega if f else None,
        "I2": f.i2 if f else None,
    }


def cmd_sweep(args) -> int:
    cfg = runio.load_config(args.config)
    sweep = cfg.get("sweep")
    if not sweep:
        raise ConfigError("sweep command requires a [sweep] section")
    unknown = set(sweep) - {"omega", "p"}
    if unknown:
        raise ConfigError(f"[sweep]: unknown key(s): {', '.join(sorted(unknown))}")
    omegas = sweep.get("omega")
    if not omegas:
        raise ConfigError("[sweep]: omega list is required")
    base_p = cfg.get("nonlinearity", {}).get("p")
    ps = sweep.get("p", [base_p])
    # validate the base config once up front (fail fast with exit 2)
    runio.build_params({**cfg, "omega": float(omegas[0])})
    runio.build_grid(cfg)
    base_nl = runio.build_nonlinearity(cfg)
    if base_nl.homogeneous_power is None:
        raise ConfigError("sweep drives the fixed-point route: nonlinearity kind must be 'power'")

    out = runio.default_out_dir("sweep", args.out)
    tasks = []
    for p in ps:
        for omega in omegas:
            name = f"omega_{omega:g}" + (f"_p_{p}" if p is not None else "")
            tasks.append((cfg, float(omega), p, str(out / "points" / name)))

    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            rows = list(pool.map(_run_sweep_point, tasks))
    else:
        rows = [_run_sweep_point(t) for t in tasks]

    runio.write_sweep_summary(out / "summary.csv", rows)
    runio.write_manifest(
        out, "sweep", cfg, {"config": str(args.config)},
        {"summary": "summary.csv"},
        {"points": len(rows), "converged": sum(r["converged"] for r in rows)},
    )
    log.info("sweep finished: %d/%d points converged",
             sum(r["converged"] for r in rows), len(rows))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hobwaves",
        description="Solitary-wave solvers for a fifth-order Boussinesq system",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="TOML config file")
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--verbose", action="store_true", help="debug logging")

    p = sub.add_parser("solve-homogeneous", help="stabilized Fourier fixed-point solve")
    common(p)
    p.set_defaults(func=cmd_solve_homogeneous)

    p = sub.add_parser("solve-nonhomogeneous", help="cosine collocation Newton solve")
    common(p)
    p.set_defaults(func=cmd_solve_nonhomogeneous)

    p = sub.add_parser("propagate", help="theta-scheme propagation of a solved profile")
    common(p)
    p.add_argument("--profile", required=True,
                   help="profile.csv or coefficients.json from a solve run")
    p.set_defaults(func=cmd_propagate)

    p = sub.add_parser("sweep", help="parameter sweep over omega (and p)")
    common(p)
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ValueError as exc:  # ConfigError, GridMismatchError, bad values
        log.error("%s", exc)
        return EXIT_CONFIG
    except RuntimeError as exc:  # numerical failures
        log.error("%s", exc)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
