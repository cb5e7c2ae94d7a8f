"""Stabilized Fourier fixed-point iteration for homogeneous nonlinearities.

Write the traveling-wave system per mode k as

    D(k) * (vhat_k, psihat_k)^T = (H1hat_k, H2hat_k)^T,

    D11 = -omega*(1 + d*k^2 + d2*k^4)     D12 = 1 - c*k^2 + c2*k^4
    D21 = 1 - a*k^2 + a2*k^4              D22 = -omega*(1 + b*k^2 + b2*k^4)

(the k^2 signs flip against the x-space system because (ik)^2 = -k^2).
A naive fixed point  what^{s+1} = D^{-1} Hhat^s  drifts to 0 or infinity
for homogeneous H; each sweep is therefore rescaled by stabilizing factors

    M_s = sum_k det(k)*vhat_k^2   / sum_k (H1hat*D22 - H2hat*D12)_k * vhat_k
    N_s = sum_k det(k)*psihat_k^2 / sum_k (H2hat*D11 - H1hat*D21)_k * psihat_k

raised to the power (p+1)/p, where p is the homogeneity degree
(H(alpha*w) = alpha^(p+1)*H(w)).  Both factors equal 1 on a solution; the
exponent makes the solution manifold attracting along the scaling
direction.  Fractional powers of negative factors are taken sign-
preservingly: M^((p+1)/p) := (sign(M)*|M|^(1/p))^(p+1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from . import functionals, spectral
from .errors import DegenerateStateError, SingularDispersionError
from .model import (
    Grid,
    ModelParams,
    Nonlinearity,
    WaveProfile,
    check_velocity_in_regime,
)
from .reports import IterationRecord, SolveReport, Termination

__all__ = [
    "DispersionMatrix",
    "SolveConfig",
    "build_dispersion",
    "stabilizing_factors",
    "iterate_once",
    "solve",
]

_COLLAPSE_TOL = 1e-12
_REL_FLOOR = 1e-14


@dataclass(frozen=True)
class DispersionMatrix:
    """Per-mode 2x2 linear symbol and its determinant on the half spectrum."""

    grid: Grid
    d11: np.ndarray
    d12: np.ndarray
    d21: np.ndarray
    d22: np.ndarray
    det: np.ndarray


def build_dispersion(grid: Grid, params: ModelParams) -> DispersionMatrix:
    k2 = grid.wavenumbers ** 2
    k4 = k2 * k2
    d11 = -params.omega * (1.0 + params.d * k2 + params.d2 * k4)
    d12 = 1.0 - params.c * k2 + params.c2 * k4
    d21 = 1.0 - params.a * k2 + params.a2 * k4
    d22 = -params.omega * (1.0 + params.b * k2 + params.b2 * k4)
    det = d11 * d22 - d12 * d21
    bad = np.flatnonzero(det == 0.0)
    if bad.size:
        raise SingularDispersionError(
            f"dispersion determinant vanishes at mode m={int(bad[0])} "
            f"(k={grid.wavenumbers[bad[0]]:.6g}); omega={params.omega} is not usable "
            "on this grid"
        )
    return DispersionMatrix(grid=grid, d11=d11, d12=d12, d21=d21, d22=d22, det=det)


def _hats(w: WaveProfile, nl: Nonlinearity, dealias: bool):
    """Spectra of the current state and of H1, H2 evaluated on it."""
    g = w.grid
    psi_hat = np.fft.rfft(w.psi)
    v_hat = np.fft.rfft(w.v)
    if nl.needs_derivatives:
        dpsi = spectral.derivative_from_spectrum(g, psi_hat, 1)
        d2psi = spectral.derivative_from_spectrum(g, psi_hat, 2)
        dv = spectral.derivative_from_spectrum(g, v_hat, 1)
        d2v = spectral.derivative_from_spectrum(g, v_hat, 2)
    else:
        dpsi = d2psi = dv = d2v = None
    h1 = nl.h1(w.psi, dpsi, d2psi, w.v, dv, d2v)
    h2 = nl.h2(w.psi, dpsi, d2psi, w.v, dv, d2v)
    h1_hat = np.fft.rfft(h1)
    h2_hat = np.fft.rfft(h2)
    if dealias:
        h1_hat = spectral.dealias_spectrum(g, h1_hat)
        h2_hat = spectral.dealias_spectrum(g, h2_hat)
    return psi_hat, v_hat, h1_hat, h2_hat


def _factors_from_hats(disp, psi_hat, v_hat, h1_hat, h2_hat):
    num_v = h1_hat * disp.d22 - h2_hat * disp.d12
    num_psi = h2_hat * disp.d11 - h1_hat * disp.d21
    m_top = spectral.symmetric_mode_sum(disp.det, v_hat, v_hat)
    m_bot = spectral.symmetric_mode_sum(1.0, num_v, v_hat)
    n_top = spectral.symmetric_mode_sum(disp.det, psi_hat, psi_hat)
    n_bot = spectral.symmetric_mode_sum(1.0, num_psi, psi_hat)
    if m_bot == 0.0 or n_bot == 0.0 or not np.isfinite(m_bot) or not np.isfinite(n_bot):
        raise DegenerateStateError(
            "stabilizing-factor denominator vanished (zero or degenerate state)"
        )
    return m_top / m_bot, n_top / n_bot, num_v, num_psi


def stabilizing_factors(
    w: WaveProfile, disp: DispersionMatrix, nl: Nonlinearity, dealias: bool = False
) -> Tuple[float, float]:
    """(M_s, N_s) for the current state; both exactly 1 on a solution."""
    psi_hat, v_hat, h1_hat, h2_hat = _hats(w, nl, dealias)
    m_s, n_s, _, _ = _factors_from_hats(disp, psi_hat, v_hat, h1_hat, h2_hat)
    return m_s, n_s


def _signed_root(value: float, p: int) -> float:
    return float(np.sign(value) * abs(value) ** (1.0 / p))


def iterate_once(
    w: WaveProfile,
    disp: DispersionMatrix,
    nl: Nonlinearity,
    p: Optional[int] = None,
    dealias: bool = False,
) -> WaveProfile:
    profile, _, _ = _sweep(w, disp, nl, p, dealias)
    return profile


def _sweep(w, disp, nl, p=None, dealias=False):
    if p is None:
        p = nl.homogeneous_power
    if p is None:
        raise ValueError("nonlinearity has no homogeneity degree; pass p explicitly")
    psi_hat, v_hat, h1_hat, h2_hat = _hats(w, nl, dealias)
    m_s, n_s, num_v, num_psi = _factors_from_hats(disp, psi_hat, v_hat, h1_hat, h2_hat)
    factor_v = _signed_root(m_s, p) ** (p + 1)
    factor_psi = _signed_root(n_s, p) ** (p + 1)
    new_v_hat = factor_v * num_v / disp.det
    new_psi_hat = factor_psi * num_psi / disp.det
    n = w.grid.n_points
    new = WaveProfile(
        grid=w.grid,
        psi=np.fft.irfft(new_psi_hat, n=n),
        v=np.fft.irfft(new_v_hat, n=n),
    )
    return new, m_s, n_s


@dataclass(frozen=True)
class SolveConfig:
    tol: float = 1e-10
    max_iter: int = 1000
    divergence_guard: float = 1e6
    max_growth_streak: int = 50
    record_history: bool = True
    dealias: bool = False


def _rel_change(new: np.ndarray, old: np.ndarray) -> float:
    num = float(np.max(np.abs(new - old)))
    den = max(float(np.max(np.abs(new))), _REL_FLOOR)
    return num / den


def solve(
    initial: WaveProfile,
    params: ModelParams,
    nl: Nonlinearity,
    cfg: SolveConfig = SolveConfig(),
) -> Tuple[WaveProfile, SolveReport]:
    """Run the stabilized iteration from ``initial`` until the max-norm
    relative change of both components drops below cfg.tol.

    Requires a homogeneous nonlinearity (``nl.homogeneous_power`` set).
    Out-of-regime velocities run anyway and are recorded as a warning.
    """
    p = nl.homogeneous_power
    if p is None:
        raise ValueError("stabilized iteration requires a homogeneous nonlinearity")
    disp = build_dispersion(initial.grid, params)
    in_regime = check_velocity_in_regime(params)
    warnings = []
    if not in_regime:
        warnings.append(
            f"omega={params.omega} outside the admissible regime "
            "(existence not guaranteed; running anyway)"
        )

    w = initial
    history = []
    sign_degenerate = False
    termination = Termination.MAX_ITER
    iterations = 0
    growth_streak = 0
    prev_change = np.inf

    for s in range(1, cfg.max_iter + 1):
        new, m_s, n_s = _sweep(w, disp, nl, p, cfg.dealias)
        iterations = s
        if (m_s < 0.0 or n_s < 0.0) and s > 10:
            sign_degenerate = True
        change = max(_rel_change(new.psi, w.psi), _rel_change(new.v, w.v))
        if cfg.record_history:
            res_inf, _ = functionals.residual_norms(new, params, nl)
            rel_res = res_inf / max(new.max_norm(), _REL_FLOOR)
            history.append(IterationRecord(s, change, m_s, n_s, rel_res))
        w = new

        amp = w.max_norm()
        if not np.isfinite(amp) or amp > cfg.divergence_guard:
            termination = Termination.DIVERGED
            break
        if amp < _COLLAPSE_TOL:
            termination = Termination.COLLAPSED_TO_ZERO
            break
        growth_streak = growth_streak + 1 if change > prev_change else 0
        prev_change = change
        if growth_streak >= cfg.max_growth_streak:
            termination = Termination.DIVERGED
            break
        if change < cfg.tol:
            termination = Termination.CONVERGED
            break

    report = SolveReport(
        iterations=iterations,
        converged=(termination is Termination.CONVERGED),
        termination=termination,
        history=history,
        in_regime=in_regime,
        sign_degenerate=sign_degenerate,
        warnings=warnings,
    )
    if termination in (Termination.CONVERGED, Termination.MAX_ITER):
        res_inf, _ = functionals.residual_norms(w, params, nl)
        report.residual_inf_rel = res_inf / max(w.max_norm(), _REL_FLOOR)
        if nl.has_potential:
            report.functionals = functionals.eval_all(w, params, nl)
        try:
            report.final_m_s, report.final_n_s = stabilizing_factors(
                w, disp, nl, cfg.dealias
            )
        except DegenerateStateError:
            pass
    return w, report
