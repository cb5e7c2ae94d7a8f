"""Cosine collocation and damped Newton for non-homogeneous nonlinearities.

Solutions even about the domain center are expanded as

    psi(x) = sum_{k=0}^{N/2} psi_k cos(k*pi*x/l),      L = 2l,

and the traveling-wave system is enforced at the N/2+1 points
x_j = 2l(j-1)/N, j = 1..N/2+1, i.e. x = 0, l/M, ..., l with M = N/2.
cos(k*pi*x_j/l) = cos(pi*j*k/M) is the DCT-I kernel, so residual
evaluation runs through fast cosine/sine transforms; the Jacobian is
either forward finite differences (default, assumption-free) or the
analytic assembly from the nonlinearity's slot partials.

Unknown ordering: c = [psi_0..psi_M, v_0..v_M]; residual rows follow the
same layout (equation 1 block, then equation 2 block).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.fft
import scipy.linalg

from . import functionals
from .errors import ConfigError, SingularJacobianError
from .model import Grid, ModelParams, Nonlinearity, WaveProfile, check_velocity_in_regime
from .reports import NewtonRecord, SolveReport, Termination

__all__ = [
    "CosineExpansion",
    "NewtonConfig",
    "collocation_points",
    "evaluate_expansion",
    "expansion_from_profile",
    "resample_to_grid",
    "residual_vector",
    "jacobian",
    "newton_solve",
]

_TRIVIAL_TOL = 1e-8
_REL_FLOOR = 1e-14


@dataclass(frozen=True)
class CosineExpansion:
    """Coefficient pair (psi_k, v_k), k = 0..M, on the half-domain [0, l]."""

    l: float
    psi_coeffs: np.ndarray
    v_coeffs: np.ndarray

    def __post_init__(self):
        pc = np.asarray(self.psi_coeffs, dtype=float)
        vc = np.asarray(self.v_coeffs, dtype=float)
        if pc.ndim != 1 or pc.shape != vc.shape or pc.size < 2:
            raise ConfigError("coefficient arrays must be equal-length 1-d, size >= 2")
        if not (self.l > 0):
            raise ConfigError("half-length l must be positive")
        object.__setattr__(self, "psi_coeffs", pc)
        object.__setattr__(self, "v_coeffs", vc)

    @property
    def n_modes(self) -> int:
        """Highest mode index M (N/2 for the companion grid)."""
        return self.psi_coeffs.size - 1

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.psi_coeffs, self.v_coeffs])


def collocation_points(l: float, n_grid: int) -> np.ndarray:
    """x_j = 2l(j-1)/n_grid for j = 1..n_grid/2+1 (uniform, 0 to l inclusive)."""
    m = n_grid // 2
    return np.arange(m + 1) * (l / m)


def _dct_eval(coeffs: np.ndarray) -> np.ndarray:
    """Values of sum_k c_k cos(pi*j*k/M) at j = 0..M via DCT-I."""
    b = coeffs.copy()
    b[1:-1] *= 0.5
    return scipy.fft.dct(b, type=1)


def _dct_coeffs(values: np.ndarray) -> np.ndarray:
    """Inverse of _dct_eval: cosine coefficients from point values."""
    m = values.size - 1
    y = scipy.fft.dct(values, type=1)
    c = y / m
    c[0] *= 0.5
    c[-1] *= 0.5
    return c


def _sine_eval(coeffs: np.ndarray) -> np.ndarray:
    """Values of sum_{k=1}^{M-1} s_k sin(pi*j*k/M) at j = 0..M (ends are 0)."""
    out = np.zeros_like(coeffs)
    if coeffs.size > 2:
        out[1:-1] = 0.5 * scipy.fft.dst(coeffs[1:-1], type=1)
    return out


class _Operator:
    """Precomputed machinery for one (l, M, params, nl) problem."""

    def __init__(self, l: float, m: int, params: ModelParams, nl: Nonlinearity):
        self.l = l
        self.m = m
        self.params = params
        self.nl = nl
        self.points = collocation_points(l, 2 * m)
        k = np.pi * np.arange(m + 1) / l
        self.ktilde = k
        k2, k4 = k ** 2, k ** 4
        self.lin1_psi = 1.0 - params.c * k2 + params.c2 * k4
        self.lin1_v = -params.omega * (1.0 + params.d * k2 + params.d2 * k4)
        self.lin2_psi = -params.omega * (1.0 + params.b * k2 + params.b2 * k4)
        self.lin2_v = 1.0 - params.a * k2 + params.a2 * k4
        self._tables = None
        self._lin_jac = None

    # -- fast pointwise evaluation ------------------------------------
    def values(self, coeffs: np.ndarray, order: int) -> np.ndarray:
        k = self.ktilde
        if order == 0:
            return _dct_eval(coeffs)
        if order == 1:
            return -_sine_eval(coeffs * k)
        if order == 2:
            return _dct_eval(-coeffs * k ** 2)
        if order == 3:
            return _sine_eval(coeffs * k ** 3)
        if order == 4:
            return _dct_eval(coeffs * k ** 4)
        raise ValueError(f"derivative order must be in 0..4, got {order}")

    def slot_values(self, cpsi: np.ndarray, cv: np.ndarray):
        return (
            self.values(cpsi, 0), self.values(cpsi, 1), self.values(cpsi, 2),
            self.values(cv, 0), self.values(cv, 1), self.values(cv, 2),
        )

    def residual(self, cpsi: np.ndarray, cv: np.ndarray) -> np.ndarray:
        q, r, z, s, t, w = self.slot_values(cpsi, cv)
        lin1 = _dct_eval(self.lin1_psi * cpsi + self.lin1_v * cv)
        lin2 = _dct_eval(self.lin2_psi * cpsi + self.lin2_v * cv)
        return np.concatenate([
            lin1 - self.nl.h1(q, r, z, s, t, w),
            lin2 - self.nl.h2(q, r, z, s, t, w),
        ])

    # -- Jacobians ------------------------------------------------------
    def _basis_tables(self):
        if self._tables is None:
            jk = np.outer(np.arange(self.m + 1), np.arange(self.m + 1))
            ang = (np.pi / self.m) * jk
            self._tables = (np.cos(ang), np.sin(ang))
        return self._tables

    def _linear_jacobian(self) -> np.ndarray:
        if self._lin_jac is None:
            cos_t, _ = self._basis_tables()
            n = self.m + 1
            jac = np.empty((2 * n, 2 * n))
            jac[:n, :n] = cos_t * self.lin1_psi[None, :]
            jac[:n, n:] = cos_t * self.lin1_v[None, :]
            jac[n:, :n] = cos_t * self.lin2_psi[None, :]
            jac[n:, n:] = cos_t * self.lin2_v[None, :]
            self._lin_jac = jac
        return self._lin_jac

    def jacobian_analytic(self, cpsi: np.ndarray, cv: np.ndarray) -> np.ndarray:
        if not self.nl.has_partials:
            raise ConfigError(
                "analytic Jacobian requires the nonlinearity's slot partials; "
                "use the finite-difference mode"
            )
        cos_t, sin_t = self._basis_tables()
        k = self.ktilde
        # column-scaled basis value tables for orders 0, 1, 2
        b0 = cos_t
        b1 = -sin_t * k[None, :]
        b2 = -cos_t * (k ** 2)[None, :]
        slots = self.slot_values(cpsi, cv)
        jac = self._linear_jacobian().copy()
        n = self.m + 1
        for row, partials in ((0, self.nl.h1_partials(*slots)),
                              (n, self.nl.h2_partials(*slots))):
            pq, pr, pz, ps, pt, pw = (np.asarray(p) for p in partials)
            block_psi = pq[:, None] * b0 + pr[:, None] * b1 + pz[:, None] * b2
            block_v = ps[:, None] * b0 + pt[:, None] * b1 + pw[:, None] * b2
            jac[row:row + n, :n] -= block_psi
            jac[row:row + n, n:] -= block_v
        return jac

    def jacobian_fd(self, cpsi: np.ndarray, cv: np.ndarray, fd_step: float) -> np.ndarray:
        c0 = np.concatenate([cpsi, cv])
        base = self.residual(cpsi, cv)
        n2 = c0.size
        jac = np.empty((n2, n2))
        n = self.m + 1
        for j in range(n2):
            h = fd_step * max(1.0, abs(c0[j]))
            cp = c0.copy()
            cp[j] += h
            jac[:, j] = (self.residual(cp[:n], cp[n:]) - base) / h
        return jac


# ---------------------------------------------------------------------------
# public operations
# ---------------------------------------------------------------------------

def evaluate_expansion(exp: CosineExpansion, x, deriv_order: int = 0):
    """(psi, v) derivative values of the expansion at arbitrary x (scalar or
    array), deriv_order in 0..4.  Direct trig evaluation; use the solver's
    internal fast path for collocation-point work."""
    if not (0 <= deriv_order <= 4):
        raise ValueError(f"deriv_order must be in 0..4, got {deriv_order}")
    x_arr = np.atleast_1d(np.asarray(x, dtype=float))
    k = np.pi * np.arange(exp.n_modes + 1) / exp.l
    ang = np.outer(x_arr, k)
    if deriv_order % 2 == 0:
        basis = np.cos(ang) * ((-1.0) ** (deriv_order // 2) * k ** deriv_order)[None, :]
    else:
        sign = -1.0 if deriv_order == 1 else 1.0
        basis = np.sin(ang) * (sign * k ** deriv_order)[None, :]
    psi_vals = basis @ exp.psi_coeffs
    v_vals = basis @ exp.v_coeffs
    if np.isscalar(x) or np.asarray(x).ndim == 0:
        return float(psi_vals[0]), float(v_vals[0])
    return psi_vals, v_vals


def expansion_from_profile(w: WaveProfile, even_tol: float = 1e-10) -> CosineExpansion:
    """Cosine coefficients of a grid profile even about the center x = l.

    Rejects profiles that are not even about l (e.g. bumps centered away
    from L/2): the cosine basis cannot represent them.
    """
    n = w.grid.n_points
    m = n // 2
    idx = np.arange(1, m)
    asym = 0.0
    for f in (w.psi, w.v):
        asym = max(asym, float(np.max(np.abs(f[idx] - f[n - idx]))))
    scale = max(w.max_norm(), 1.0)
    if asym > even_tol * scale:
        raise ConfigError(
            "initial data must be even about the domain center x = l = L/2 "
            f"(cosine basis); asymmetry {asym:.3e} exceeds tolerance. "
            "Center the initial bump at a0 = L/2."
        )
    return CosineExpansion(
        l=w.grid.length / 2.0,
        psi_coeffs=_dct_coeffs(w.psi[: m + 1].copy()),
        v_coeffs=_dct_coeffs(w.v[: m + 1].copy()),
    )


def resample_to_grid(exp: CosineExpansion) -> WaveProfile:
    """Evaluate the expansion on the N = 2M uniform periodic grid of [0, 2l)
    by mirroring the collocation values about x = l."""
    m = exp.n_modes
    grid = Grid(length=2.0 * exp.l, n_points=2 * m)

    def mirror(coeffs):
        half = _dct_eval(coeffs)
        full = np.empty(2 * m)
        full[: m + 1] = half
        full[m + 1:] = half[m - 1:0:-1]
        return full

    return WaveProfile(grid=grid, psi=mirror(exp.psi_coeffs), v=mirror(exp.v_coeffs))


def residual_vector(exp: CosineExpansion, params: ModelParams, nl: Nonlinearity) -> np.ndarray:
    op = _Operator(exp.l, exp.n_modes, params, nl)
    return op.residual(exp.psi_coeffs, exp.v_coeffs)


def jacobian(
    exp: CosineExpansion,
    params: ModelParams,
    nl: Nonlinearity,
    mode: str = "fd",
    fd_step: float = 1e-7,
) -> np.ndarray:
    op = _Operator(exp.l, exp.n_modes, params, nl)
    if mode == "fd":
        return op.jacobian_fd(exp.psi_coeffs, exp.v_coeffs, fd_step)
    if mode == "analytic":
        return op.jacobian_analytic(exp.psi_coeffs, exp.v_coeffs)
    raise ConfigError(f"unknown jacobian mode {mode!r} (expected 'fd' or 'analytic')")


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-12
    max_iter: int = 50
    jacobian: str = "fd"  # 'fd' | 'analytic'
    fd_step: float = 1e-7
    damping: bool = False
    max_halvings: int = 20


def newton_solve(
    initial: CosineExpansion,
    params: ModelParams,
    nl: Nonlinearity,
    cfg: NewtonConfig = NewtonConfig(),
) -> Tuple[CosineExpansion, SolveReport]:
    """Newton iteration on the stacked collocation residual.

    Terminates when BOTH the relative step max-norm and the residual
    max-norm fall below cfg.tol.  Plain (undamped) steps are the default:
    the Newton path is non-monotone in some stiff regimes and a line
    search can park the iterate in a local minimum of the merit function
    that the full step would have escaped.  With cfg.damping the step is
    halved up to cfg.max_halvings times until the residual 2-norm
    decreases (the Newton direction is a descent direction for that
    merit); if no reduction is found the most-damped trial is accepted
    and the stall shows up as MaxIter.  A converged state whose largest
    coefficient is below 1e-8 is reported as CollapsedToZero.
    """
    if cfg.jacobian not in ("fd", "analytic"):
        raise ConfigError(f"unknown jacobian mode {cfg.jacobian!r}")
    op = _Operator(initial.l, initial.n_modes, params, nl)
    in_regime = check_velocity_in_regime(params)
    warnings = []
    if not in_regime:
        warnings.append(
            f"omega={params.omega} outside the admissible regime "
            "(existence not guaranteed; running anyway)"
        )

    c = initial.stacked()
    n = initial.n_modes + 1
    res = op.residual(c[:n], c[n:])
    res_norm = float(np.max(np.abs(res)))
    history = []
    step_norms = []
    termination = Termination.MAX_ITER
    iterations = 0

    if res_norm < cfg.tol:
        termination = Termination.CONVERGED

    while termination is Termination.MAX_ITER and iterations < cfg.max_iter:
        iterations += 1
        if cfg.jacobian == "analytic":
            jac = op.jacobian_analytic(c[:n], c[n:])
        else:
            jac = op.jacobian_fd(c[:n], c[n:], cfg.fd_step)
        try:
            delta = scipy.linalg.solve(jac, res, overwrite_a=True)
        except scipy.linalg.LinAlgError as exc:
            if cfg.jacobian == "analytic":  # rebuild, jac was overwritten
                cond_est = np.linalg.cond(op.jacobian_analytic(c[:n], c[n:]))
            else:
                cond_est = np.linalg.cond(op.jacobian_fd(c[:n], c[n:], cfg.fd_step))
            raise SingularJacobianError(
                f"Newton Jacobian singular at iteration {iterations} "
                f"(cond ~ {cond_est:.3e})"
            ) from exc

        merit = float(np.linalg.norm(res))
        lam = 1.0
        halvings = 0
        while True:
            c_try = c - lam * delta
            res_try = op.residual(c_try[:n], c_try[n:])
            res_try_norm = float(np.max(np.abs(res_try)))
            if not cfg.damping or halvings >= cfg.max_halvings:
                break
            if float(np.linalg.norm(res_try)) < merit:
                break
            lam *= 0.5
            halvings += 1

        step = lam * delta
        step_inf = float(np.max(np.abs(step)))
        rel_step = step_inf / max(float(np.max(np.abs(c_try))), _REL_FLOOR)
        c, res, res_norm = c_try, res_try, res_try_norm
        step_norms.append(step_inf)
        history.append(NewtonRecord(iterations, rel_step, res_norm, step_inf, halvings))
        if not np.isfinite(res_norm):
            termination = Termination.DIVERGED
            break
        if rel_step < cfg.tol and res_norm < cfg.tol:
            termination = Termination.CONVERGED
            break

    final = CosineExpansion(l=initial.l, psi_coeffs=c[:n], v_coeffs=c[n:])
    coeff_max = float(np.max(np.abs(c)))
    if termination is Termination.CONVERGED and coeff_max < _TRIVIAL_TOL:
        termination = Termination.COLLAPSED_TO_ZERO

    quad_c = None
    if len(step_norms) >= 2:
        tail = step_norms[-4:]
        ratios = [
            tail[i + 1] / tail[i] ** 1.5
            for i in range(len(tail) - 1)
            if tail[i] > 0
        ]
        if ratios:
            quad_c = float(max(ratios))

    report = SolveReport(
        iterations=iterations,
        converged=(termination is Termination.CONVERGED),
        termination=termination,
        history=history,
        in_regime=in_regime,
        warnings=warnings,
        quadratic_constant=quad_c,
    )
    if termination in (Termination.CONVERGED, Termination.MAX_ITER):
        resampled = resample_to_grid(final)
        res_inf, _ = functionals.residual_norms(resampled, params, nl)
        report.residual_inf_rel = res_inf / max(resampled.max_norm(), _REL_FLOOR)
        if nl.has_potential:
            report.functionals = functionals.eval_all(resampled, params, nl)
    return final, report
