"""Config files, run artifacts, manifests.

Config files are TOML.  Schema (see README for the prose version):

    a, b, c, d, a2, b2, c2, d2, omega   model coefficients (required)
    L, N                                 domain length, grid size (required)
    theoretical_regime                   optional bool, default false

    [nonlinearity]  kind = "power" | "quartic";  p = <int> (power only)
    [initial]       a0, width, amplitude (default 1.0)
    [initial.psi] / [initial.v]          optional width/amplitude overrides
    [solver]        tol, max_iter, divergence_guard, record_history, dealias,
                    jacobian ("fd"|"analytic"), fd_step, damping, max_halvings
    [propagation]   dt, t_final, theta (default 0.5), snapshot_stride
    [sweep]         omega = [..], p = [..] (optional)

Numbers in CSV artifacts are written with 17 significant digits so that
parsing them back reproduces the exact binary value; JSON artifacts go
through the stdlib encoder (shortest lossless repr).
"""

from __future__ import annotations

import csv
import datetime
import json
import os
from pathlib import Path
from typing import Optional

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .collocation import CosineExpansion
from .errors import ConfigError, GridMismatchError
from .model import Grid, ModelParams, Nonlinearity, WaveProfile, make_nonlinearity

ENV_OUTPUT_ROOT = "HOBWAVES_OUTPUT_ROOT"

_MODEL_KEYS = ("a", "b", "c", "d", "a2", "b2", "c2", "d2", "omega")
_TOP_KEYS = set(_MODEL_KEYS) | {
    "L", "N", "theoretical_regime", "nonlinearity", "initial", "solver",
    "propagation", "sweep",
}


def fmt(x: float) -> str:
    return format(float(x), ".17g")


# ---------------------------------------------------------------------------
# config parsing
# ---------------------------------------------------------------------------

def load_config(path) -> dict:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: TOML parse error: {exc}")
    unknown = set(cfg) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown top-level key(s): {', '.join(sorted(unknown))}")
    return cfg


def _need(cfg: dict, key: str, path=""):
    if key not in cfg:
        raise ConfigError(f"{path}missing required key '{key}'")
    return cfg[key]


def _num(cfg: dict, key: str, path="") -> float:
    val = _need(cfg, key, path)
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise ConfigError(f"{path}key '{key}' must be a number, got {val!r}")
    return float(val)


def build_params(cfg: dict) -> ModelParams:
    return ModelParams(
        a=_num(cfg, "a"), b=_num(cfg, "b"), c=_num(cfg, "c"), d=_num(cfg, "d"),
        a2=_num(cfg, "a2"), b2=_num(cfg, "b2"), c2=_num(cfg, "c2"), d2=_num(cfg, "d2"),
        omega=_num(cfg, "omega"),
        theoretical_regime=bool(cfg.get("theoretical_regime", False)),
    )


def build_grid(cfg: dict) -> Grid:
    length = _num(cfg, "L")
    n = _need(cfg, "N")
    if isinstance(n, bool) or not isinstance(n, int):
        raise ConfigError(f"key 'N' must be an integer, got {n!r}")
    return Grid(length=length, n_points=n)


def build_nonlinearity(cfg: dict) -> Nonlinearity:
    section = _need(cfg, "nonlinearity")
    if not isinstance(section, dict):
        raise ConfigError("[nonlinearity] must be a table")
    unknown = set(section) - {"kind", "p"}
    if unknown:
        raise ConfigError(f"[nonlinearity]: unknown key(s): {', '.join(sorted(unknown))}")
    kind = _need(section, "kind", "[nonlinearity] ")
    return make_nonlinearity(kind, section.get("p"))


def build_initial_profile(cfg: dict, grid: Grid) -> WaveProfile:
    from .model import gaussian_initial

    section = _need(cfg, "initial")
    unknown = set(section) - {"a0", "width", "amplitude", "psi", "v"}
    if unknown:
        raise ConfigError(f"[initial]: unknown key(s): {', '.join(sorted(unknown))}")
    a0 = _num(section, "a0", "[initial] ")
    width = section.get("width")
    amplitude = section.get("amplitude", 1.0)
    psi_over = section.get("psi", {})
    v_over = section.get("v", {})
    for name, over in (("psi", psi_over), ("v", v_over)):
        bad = set(over) - {"width", "amplitude"}
        if bad:
            raise ConfigError(f"[initial.{name}]: unknown key(s): {', '.join(sorted(bad))}")
    psi_width = psi_over.get("width", width)
    psi_amp = psi_over.get("amplitude", amplitude)
    v_width = v_over.get("width", width)
    v_amp = v_over.get("amplitude", amplitude)
    if psi_width is None or v_width is None:
        raise ConfigError("[initial]: width must be set (top level or per component)")
    return gaussian_initial(
        grid, a0=a0, width=float(psi_width), amplitude=float(psi_amp),
        v_width=float(v_width), v_amplitude=float(v_amp),
    )


def solver_section(cfg: dict) -> dict:
    section = cfg.get("solver", {})
    allowed = {
        "tol", "max_iter", "divergence_guard", "record_history", "dealias",
        "jacobian", "fd_step", "damping", "max_halvings",
    }
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"[solver]: unknown key(s): {', '.join(sorted(unknown))}")
    return dict(section)


def propagation_section(cfg: dict) -> dict:
    from .propagation import PropagationConfig

    section = _need(cfg, "propagation")
    unknown = set(section) - {"dt", "t_final", "theta", "snapshot_stride"}
    if unknown:
        raise ConfigError(f"[propagation]: unknown key(s): {', '.join(sorted(unknown))}")
    try:
        pc = PropagationConfig(
            dt=_num(section, "dt", "[propagation] "),
            t_final=_num(section, "t_final", "[propagation] "),
            theta=float(section.get("theta", 0.5)),
            snapshot_stride=int(section.get("snapshot_stride", 0)),
        )
    except ValueError as exc:
        raise ConfigError(f"[propagation]: {exc}")
    return pc


# ---------------------------------------------------------------------------
# artifact writers/readers
# ---------------------------------------------------------------------------

def write_profile_csv(path, w: WaveProfile) -> None:
    x = w.grid.x
    with open(path, "w", newline="\n") as fh:
        fh.write("x,psi,v\n")
        for j in range(w.grid.n_points):
            fh.write(f"{fmt(x[j])},{fmt(w.psi[j])},{fmt(w.v[j])}\n")


def read_profile_csv(path) -> WaveProfile:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["x", "psi", "v"]:
            raise ConfigError(f"{path}: expected header x,psi,v, got {header}")
        rows = [(float(a), float(b), float(c)) for a, b, c in reader]
    arr = np.asarray(rows)
    x, psi, v = arr[:, 0], arr[:, 1], arr[:, 2]
    n = x.size
    h = x[1] - x[0]
    if not np.allclose(np.diff(x), h, rtol=1e-12, atol=1e-12 * max(1.0, h)):
        raise ConfigError(f"{path}: x column is not uniformly spaced")
    grid = Grid(length=float(h * n), n_points=n)
    return WaveProfile(grid=grid, psi=psi, v=v)


def write_snapshot_csv(path, grid: Grid, u: np.ndarray, eta: np.ndarray) -> None:
    x = grid.x
    with open(path, "w", newline="\n") as fh:
        fh.write("x,u,eta\n")
        for j in range(grid.n_points):
            fh.write(f"{fmt(x[j])},{fmt(u[j])},{fmt(eta[j])}\n")


def write_history_csv(path, history) -> None:
    if not history:
        Path(path).write_text("", newline="\n")
        return
    first = history[0]
    kind = type(first).__name__
    if kind == "IterationRecord":
        header = "iteration,rel_change,m_s,n_s,residual_inf_rel"
    else:
        header = "iteration,rel_step,residual_inf,step_inf,halvings"
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for rec in history:
            row = rec.as_row()
            fh.write(",".join(str(v) if isinstance(v, int) else fmt(v) for v in row) + "\n")


def write_json(path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_coefficients_json(path, exp: CosineExpansion) -> None:
    write_json(path, {
        "l": exp.l,
        "psi_coeffs": [float(v) for v in exp.psi_coeffs],
        "v_coeffs": [float(v) for v in exp.v_coeffs],
    })


def read_coefficients_json(path) -> CosineExpansion:
    with open(path) as fh:
        obj = json.load(fh)
    try:
        return CosineExpansion(
            l=float(obj["l"]),
            psi_coeffs=np.asarray(obj["psi_coeffs"], dtype=float),
            v_coeffs=np.asarray(obj["v_coeffs"], dtype=float),
        )
    except KeyError as exc:
        raise ConfigError(f"{path}: missing coefficient key {exc}")


def load_profile_any(path, grid: Optional[Grid] = None) -> WaveProfile:
    """Read a solver output: profile CSV or coefficients JSON (resampled).
    If ``grid`` is given, the profile must match it exactly."""
    from .collocation import resample_to_grid

    path = Path(path)
    if path.suffix == ".json":
        w = resample_to_grid(read_coefficients_json(path))
    else:
        w = read_profile_csv(path)
    if grid is not None:
        same = (
            w.grid.n_points == grid.n_points
            and abs(w.grid.length - grid.length) <= 1e-9 * grid.length
        )
        if not same:
            raise GridMismatchError(
                f"profile grid (L={w.grid.length}, N={w.grid.n_points}) does not match "
                f"config grid (L={grid.length}, N={grid.n_points})"
            )
        w = WaveProfile(grid=grid, psi=w.psi, v=w.v)
    return w


def write_manifest(out_dir, command: str, config: dict, inputs: dict,
                   outputs: dict, summary: dict) -> None:
    write_json(Path(out_dir) / "manifest.json", {
        "command": command,
        "version": __version__,
        "created_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "config": config,
        "inputs": inputs,
        "outputs": outputs,
        "summary": summary,
    })


def write_sweep_summary(path, rows) -> None:
    header = "omega,p,in_regime,converged,iterations,residual,I_omega,J_omega,I2"
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for r in rows:
            fh.write(",".join([
                fmt(r["omega"]),
                str(r["p"]) if r["p"] is not None else "",
                str(r["in_regime"]).lower(),
                str(r["converged"]).lower(),
                str(r["iterations"]),
                fmt(r["residual"]) if r["residual"] is not None else "nan",
                fmt(r["I_omega"]) if r["I_omega"] is not None else "nan",
                fmt(r["J_omega"]) if r["J_omega"] is not None else "nan",
                fmt(r["I2"]) if r["I2"] is not None else "nan",
            ]) + "\n")


def default_out_dir(command: str, explicit: Optional[str]) -> Path:
    if explicit:
        out = Path(explicit)
    else:
        root = Path(os.environ.get(ENV_OUTPUT_ROOT, "runs"))
        stamp = datetime.datetime.now(datetime.timezone.utc).strftime("%Y%m%dT%H%M%S")
        out = root / f"{command}-{stamp}"
    out.mkdir(parents=True, exist_ok=True)
    return out
