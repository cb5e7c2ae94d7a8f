"""Variational functionals and residual diagnostics.

Everything here is an independent check on the solvers: quadratures of

    I1      = int psi^2 - c*(psi')^2 + c2*(psi'')^2 + v^2 - a*(v')^2 + a2*(v'')^2
    I2      = int psi*v + b*psi'*v' + b2*psi''*v''
    I_omega = I1 - 2*omega*I2
    K       = int F(psi, psi', v, v')
    N       = int (psi, psi', v, v') . grad F
    P_omega = I_omega - N          (zero at critical points)
    J_omega = I_omega/2 - K        (the action whose critical points solve trav-eqs)

plus the pointwise traveling-wave residual and its norms.  Derivatives are
spectral; integrals are the rectangle rule (spectrally accurate here).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .errors import UnsupportedFunctionalError
from .model import Grid, ModelParams, Nonlinearity, WaveProfile

__all__ = [
    "FunctionalReport",
    "eval_i1",
    "eval_i2",
    "eval_k",
    "eval_n",
    "eval_all",
    "residual_fields",
    "norm_equivalence_constants",
    "h2_norm_sq",
    "i_omega_decomposition",
]


@dataclass(frozen=True)
class FunctionalReport:
    i1: float
    i2: float
    i_omega: float
    k: float
    n: float
    p_omega: float
    j_omega: float
    residual_inf: float
    residual_l2: float

    def to_json_dict(self) -> dict:
        return {
            "i1": self.i1,
            "i2": self.i2,
            "i_omega": self.i_omega,
            "k": self.k,
            "n": self.n,
            "p_omega": self.p_omega,
            "j_omega": self.j_omega,
            "residual_inf": self.residual_inf,
            "residual_l2": self.residual_l2,
        }


def _derivs(grid: Grid, f: np.ndarray, orders) -> dict:
    spec = np.fft.rfft(f)
    return {m: spectral.derivative_from_spectrum(grid, spec, m) for m in orders}


def eval_i1(w: WaveProfile, params: ModelParams) -> float:
    g = w.grid
    dpsi = _derivs(g, w.psi, (1, 2))
    dv = _derivs(g, w.v, (1, 2))
    density = (
        w.psi ** 2 - params.c * dpsi[1] ** 2 + params.c2 * dpsi[2] ** 2
        + w.v ** 2 - params.a * dv[1] ** 2 + params.a2 * dv[2] ** 2
    )
    return spectral.integrate(g, density)


def eval_i2(w: WaveProfile, params: ModelParams) -> float:
    g = w.grid
    dpsi = _derivs(g, w.psi, (1, 2))
    dv = _derivs(g, w.v, (1, 2))
    density = w.psi * w.v + params.b * dpsi[1] * dv[1] + params.b2 * dpsi[2] * dv[2]
    return spectral.integrate(g, density)


def eval_k(w: WaveProfile, nl: Nonlinearity) -> float:
    if not nl.has_potential:
        raise UnsupportedFunctionalError("nonlinearity defines no potential density F")
    g = w.grid
    dpsi = spectral.derivative(g, w.psi, 1)
    dv = spectral.derivative(g, w.v, 1)
    return spectral.integrate(g, nl.f_density(w.psi, dpsi, w.v, dv))


def eval_n(w: WaveProfile, nl: Nonlinearity) -> float:
    """N = int psi*F_q + psi'*F_r + v*F_s + v'*F_t;  equals (p+2)*K for
    p-homogeneous F."""
    if not nl.has_potential:
        raise UnsupportedFunctionalError("nonlinearity defines no potential density F")
    g = w.grid
    dpsi = spectral.derivative(g, w.psi, 1)
    dv = spectral.derivative(g, w.v, 1)
    fq, fr, fs, ft = nl.grad_f(w.psi, dpsi, w.v, dv)
    return spectral.integrate(g, w.psi * fq + dpsi * fr + w.v * fs + dv * ft)


def residual_fields(w: WaveProfile, params: ModelParams, nl: Nonlinearity):
    """Pointwise residuals of the two traveling-wave equations."""
    g = w.grid
    dpsi = _derivs(g, w.psi, (1, 2, 4))
    dv = _derivs(g, w.v, (1, 2, 4))
    h1 = nl.h1(w.psi, dpsi[1], dpsi[2], w.v, dv[1], dv[2])
    h2 = nl.h2(w.psi, dpsi[1], dpsi[2], w.v, dv[1], dv[2])
    res1 = (
        -params.omega * (w.v - params.d * dv[2] + params.d2 * dv[4])
        + w.psi + params.c * dpsi[2] + params.c2 * dpsi[4]
        - h1
    )
    res2 = (
        -params.omega * (w.psi - params.b * dpsi[2] + params.b2 * dpsi[4])
        + w.v + params.a * dv[2] + params.a2 * dv[4]
        - h2
    )
    return res1, res2


def residual_norms(w: WaveProfile, params: ModelParams, nl: Nonlinearity):
    """(max-norm, L2-norm) of the stacked traveling-wave residual."""
    res1, res2 = residual_fields(w, params, nl)
    inf = max(float(np.max(np.abs(res1))), float(np.max(np.abs(res2))))
    l2 = float(np.sqrt(spectral.integrate(w.grid, res1 ** 2 + res2 ** 2)))
    return inf, l2


def eval_all(w: WaveProfile, params: ModelParams, nl: Nonlinearity) -> FunctionalReport:
    i1 = eval_i1(w, params)
    i2 = eval_i2(w, params)
    i_omega = i1 - 2.0 * params.omega * i2
    k = eval_k(w, nl)
    n = eval_n(w, nl)
    residual_inf, residual_l2 = residual_norms(w, params, nl)
    return FunctionalReport(
        i1=i1,
        i2=i2,
        i_omega=i_omega,
        k=k,
        n=n,
        p_omega=i_omega - n,
        j_omega=0.5 * i_omega - k,
        residual_inf=residual_inf,
        residual_l2=residual_l2,
    )


def norm_equivalence_constants(params: ModelParams):
    """(M1, M2) with M1*||(psi,v)||_{H2xH2}^2 <= I_omega <= M2*||.||^2 for
    |omega| below the admissible bound."""
    w = abs(params.omega)
    m1 = min(
        1.0 - w,
        -params.c - params.b * w,
        -params.a - params.b * w,
        params.a2 - params.b2 * w,
        params.c2 - params.b2 * w,
    )
    m2 = max(
        1.0 + w,
        abs(params.c) + params.b * w,
        abs(params.a) + params.b * w,
        params.a2 + params.b2 * w,
        params.c2 + params.b2 * w,
    )
    return m1, m2


def h2_norm_sq(w: WaveProfile) -> float:
    """Squared discrete H2 x H2 norm used by the equivalence bounds."""
    g = w.grid
    dpsi = _derivs(g, w.psi, (1, 2))
    dv = _derivs(g, w.v, (1, 2))
    density = (
        w.psi ** 2 + dpsi[1] ** 2 + dpsi[2] ** 2
        + w.v ** 2 + dv[1] ** 2 + dv[2] ** 2
    )
    return spectral.integrate(g, density)


def i_omega_decomposition(w: WaveProfile, params: ModelParams):
    """Sum-of-squares split of I_omega, valid in the admissible regime:

        int (psi - omega*v)^2
          + (sqrt|c|*psi' - (b*omega/sqrt|c|)*v')^2
          + (1 - omega^2)*v^2
          + (|a| - b^2*omega^2/|c|)*(v')^2
          + c2*(psi'' - (omega*b2/c2)*v'')^2
          + (a2 - omega^2*b2^2/c2)*(v'')^2

    Returns the six quadrature terms; their sum equals I_omega identically
    (the regime only guarantees every term is >= 0).
    """
    g = w.grid
    p = params
    dpsi = _derivs(g, w.psi, (1, 2))
    dv = _derivs(g, w.v, (1, 2))
    sc = np.sqrt(abs(p.c))
    terms = (
        (w.psi - p.omega * w.v) ** 2,
        (sc * dpsi[1] - (p.b * p.omega / sc) * dv[1]) ** 2,
        (1.0 - p.omega ** 2) * w.v ** 2,
        (abs(p.a) - p.b ** 2 * p.omega ** 2 / abs(p.c)) * dv[1] ** 2,
        p.c2 * (dpsi[2] - (p.omega * p.b2 / p.c2) * dv[2]) ** 2,
        (p.a2 - p.omega ** 2 * p.b2 ** 2 / p.c2) * dv[2] ** 2,
    )
    return tuple(spectral.integrate(g, t) for t in terms)
