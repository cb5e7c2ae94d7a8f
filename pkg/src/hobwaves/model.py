"""Model definition: coefficients, grid, nonlinearities, initial data.

The traveling-wave system solved throughout the package is

    -omega*(v - d*v'' + d2*v'''') + psi + c*psi'' + c2*psi'''' = H1(psi, psi', psi'', v, v', v'')
    -omega*(psi - b*psi'' + b2*psi'''') + v + a*v'' + a2*v''''  = H2(psi, psi', psi'', v, v', v'')

on a periodic domain [0, L), with a < 0, c < 0 and b, d, a2, b2, c2, d2 > 0.
H1/H2 take the six slots (eta, eta_x, eta_xx, u, u_x, u_xx); the traveling-wave
residual plugs (psi, psi', psi'', v, v', v'') into them, the time propagator
plugs (eta, eta_x, eta_xx, u, u_x, u_xx).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import ConfigError

__all__ = [
    "ModelParams",
    "Grid",
    "WaveProfile",
    "Nonlinearity",
    "HomogeneousPower",
    "QuarticVariational",
    "CustomNonlinearity",
    "make_nonlinearity",
    "admissible_velocity_bound",
    "check_velocity_in_regime",
    "gaussian_initial",
]


# ---------------------------------------------------------------------------
# parameters and grid
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ModelParams:
    """Dispersion coefficients and wave velocity.

    Sign conventions are validated at construction: a < 0, c < 0, all of
    b, d, a2, b2, c2, d2 > 0.  With ``theoretical_regime=True`` the extra
    constraints b == d and b2 == d2 are enforced as well.  The velocity
    omega itself is not restricted here; use ``check_velocity_in_regime``.
    """

    a: float
    b: float
    c: float
    d: float
    a2: float
    b2: float
    c2: float
    d2: float
    omega: float
    theoretical_regime: bool = False

    def __post_init__(self):
        bad = []
        if not (self.a < 0):
            bad.append("a must be < 0")
        if not (self.c < 0):
            bad.append("c must be < 0")
        for name in ("b", "d", "a2", "b2", "c2", "d2"):
            if not (getattr(self, name) > 0):
                bad.append(f"{name} must be > 0")
        for name in ("a", "b", "c", "d", "a2", "b2", "c2", "d2", "omega"):
            if not math.isfinite(getattr(self, name)):
                bad.append(f"{name} must be finite")
        if self.theoretical_regime:
            if self.b != self.d:
                bad.append("theoretical regime requires b == d")
            if self.b2 != self.d2:
                bad.append("theoretical regime requires b2 == d2")
        if bad:
            raise ConfigError("invalid model parameters: " + "; ".join(bad))


@dataclass(frozen=True)
class Grid:
    """Uniform periodic grid on [0, L) with N points, N a power of two."""

    length: float
    n_points: int

    def __post_init__(self):
        if not (self.length > 0) or not math.isfinite(self.length):
            raise ConfigError("grid length must be positive and finite")
        n = self.n_points
        if n < 4 or (n & (n - 1)) != 0:
            raise ConfigError(f"grid size must be a power of two >= 4, got {n}")

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.spacing

    @property
    def wavenumbers(self) -> np.ndarray:
        """Half-spectrum wavenumbers k_m = 2*pi*m/L, m = 0..N/2."""
        return (2.0 * np.pi / self.length) * np.arange(self.n_points // 2 + 1)


@dataclass(frozen=True)
class WaveProfile:
    """Real-valued sample pair (psi, v) on a shared grid."""

    grid: Grid
    psi: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        psi = np.asarray(self.psi, dtype=float)
        v = np.asarray(self.v, dtype=float)
        if psi.shape != (self.grid.n_points,) or v.shape != (self.grid.n_points,):
            raise ConfigError(
                f"profile arrays must have shape ({self.grid.n_points},), "
                f"got {psi.shape} and {v.shape}"
            )
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "v", v)

    def max_norm(self) -> float:
        return max(float(np.max(np.abs(self.psi))), float(np.max(np.abs(self.v))))


# ---------------------------------------------------------------------------
# nonlinearities
# ---------------------------------------------------------------------------

class Nonlinearity:
    """Base interface for the nonlinear pair (H1, H2).

    ``h1``/``h2`` take the six slot arrays (q, r, z, s, t, w) standing for
    (eta, eta_x, eta_xx, u, u_x, u_xx).  ``homogeneous_power`` is the p with
    H_i(alpha*state) = alpha**(p+1) * H_i(state) when such a p exists, else
    None.  ``f_density``/``grad_f`` describe the potential F(q, r, s, t)
    with H1 = F_q - d/dx F_r, H2 = F_s - d/dx F_t when one exists.
    ``h1_partials``/``h2_partials`` feed the analytic collocation Jacobian.
    """

    homogeneous_power: Optional[int] = None
    needs_derivatives: bool = True
    has_potential: bool = False
    has_partials: bool = False

    def h1(self, q, r, z, s, t, w):
        raise NotImplementedError

    def h2(self, q, r, z, s, t, w):
        raise NotImplementedError

    def f_density(self, q, r, s, t):
        raise NotImplementedError

    def grad_f(self, q, r, s, t):
        raise NotImplementedError

    def h1_partials(self, q, r, z, s, t, w):
        raise NotImplementedError

    def h2_partials(self, q, r, z, s, t, w):
        raise NotImplementedError


@dataclass(frozen=True)
class HomogeneousPower(Nonlinearity):
    """Pure-power pair H1 = u**(p+1), H2 = eta**(p+1) (cross-assigned slots).

    Potential F = (q**(p+2) + s**(p+2))/(p+2); it generates the diagonal
    pair (q**(p+1), s**(p+1)), which agrees with (H1, H2) exactly on the
    symmetric sector psi = v where all the stock experiments live.
    """

    p: int = 1
    needs_derivatives: bool = field(default=False, init=False)
    has_potential: bool = field(default=True, init=False)
    has_partials: bool = field(default=True, init=False)

    def __post_init__(self):
        if not isinstance(self.p, int) or self.p < 1:
            raise ConfigError(f"homogeneity degree p must be an integer >= 1, got {self.p}")
        object.__setattr__(self, "homogeneous_power", self.p)

    def h1(self, q, r, z, s, t, w):
        return s ** (self.p + 1)

    def h2(self, q, r, z, s, t, w):
        return q ** (self.p + 1)

    def f_density(self, q, r, s, t):
        return (q ** (self.p + 2) + s ** (self.p + 2)) / (self.p + 2)

    def grad_f(self, q, r, s, t):
        zero = np.zeros_like(q)
        return q ** (self.p + 1), zero, s ** (self.p + 1), zero

    def h1_partials(self, q, r, z, s, t, w):
        zero = np.zeros_like(q)
        return zero, zero, zero, (self.p + 1) * s ** self.p, zero, zero

    def h2_partials(self, q, r, z, s, t, w):
        zero = np.zeros_like(q)
        return (self.p + 1) * q ** self.p, zero, zero, zero, zero, zero


@dataclass(frozen=True)
class QuarticVariational(Nonlinearity):
    """Quartic, non-homogeneous pair derived from
    F = u**4/4 + u*u_x**2 + eta**4/4 + eta*eta_x**2:

        H1 = F_q - d/dx F_r = eta**3 - eta_x**2 - 2*eta*eta_xx
        H2 = F_s - d/dx F_t = u**3  - u_x**2  - 2*u*u_xx
    """

    needs_derivatives: bool = field(default=True, init=False)
    has_potential: bool = field(default=True, init=False)
    has_partials: bool = field(default=True, init=False)
    homogeneous_power = None

    def h1(self, q, r, z, s, t, w):
        return q ** 3 - r ** 2 - 2.0 * q * z

    def h2(self, q, r, z, s, t, w):
        return s ** 3 - t ** 2 - 2.0 * s * w

    def f_density(self, q, r, s, t):
        return 0.25 * q ** 4 + q * r ** 2 + 0.25 * s ** 4 + s * t ** 2

    def grad_f(self, q, r, s, t):
        return q ** 3 + r ** 2, 2.0 * q * r, s ** 3 + t ** 2, 2.0 * s * t

    def h1_partials(self, q, r, z, s, t, w):
        zero = np.zeros_like(q)
        return 3.0 * q ** 2 - 2.0 * z, -2.0 * r, -2.0 * q, zero, zero, zero

    def h2_partials(self, q, r, z, s, t, w):
        zero = np.zeros_like(q)
        return zero, zero, zero, 3.0 * s ** 2 - 2.0 * w, -2.0 * t, -2.0 * s


@dataclass(frozen=True)
class CustomNonlinearity(Nonlinearity):
    """Extension point: user-supplied slot functions.

    ``h1_fn``/``h2_fn`` take the six slot arrays.  Optional potential and
    partial-derivative callables unlock the variational functionals and the
    analytic Jacobian; without them the corresponding routes raise.
    """

    h1_fn: Callable = None
    h2_fn: Callable = None
    f_density_fn: Optional[Callable] = None
    grad_f_fn: Optional[Callable] = None
    h1_partials_fn: Optional[Callable] = None
    h2_partials_fn: Optional[Callable] = None
    power: Optional[int] = None
    derivatives_needed: bool = True

    def __post_init__(self):
        if self.h1_fn is None or self.h2_fn is None:
            raise ConfigError("custom nonlinearity requires h1_fn and h2_fn")
        object.__setattr__(self, "homogeneous_power", self.power)
        object.__setattr__(self, "needs_derivatives", self.derivatives_needed)
        object.__setattr__(self, "has_potential", self.f_density_fn is not None)
        object.__setattr__(
            self, "has_partials",
            self.h1_partials_fn is not None and self.h2_partials_fn is not None,
        )

    def h1(self, q, r, z, s, t, w):
        return self.h1_fn(q, r, z, s, t, w)

    def h2(self, q, r, z, s, t, w):
        return self.h2_fn(q, r, z, s, t, w)

    def f_density(self, q, r, s, t):
        if self.f_density_fn is None:
            raise NotImplementedError("custom nonlinearity has no potential density")
        return self.f_density_fn(q, r, s, t)

    def grad_f(self, q, r, s, t):
        if self.grad_f_fn is None:
            raise NotImplementedError("custom nonlinearity has no potential gradient")
        return self.grad_f_fn(q, r, s, t)

    def h1_partials(self, q, r, z, s, t, w):
        if self.h1_partials_fn is None:
            raise NotImplementedError("custom nonlinearity has no H1 partials")
        return self.h1_partials_fn(q, r, z, s, t, w)

    def h2_partials(self, q, r, z, s, t, w):
        if self.h2_partials_fn is None:
            raise NotImplementedError("custom nonlinearity has no H2 partials")
        return self.h2_partials_fn(q, r, z, s, t, w)


def make_nonlinearity(kind: str, p: Optional[int] = None) -> Nonlinearity:
    """Build a nonlinearity from config keys (kind = 'power' | 'quartic')."""
    if kind == "power":
        if p is None:
            raise ConfigError("nonlinearity kind 'power' requires key p")
        return HomogeneousPower(p=int(p))
    if kind == "quartic":
        if p is not None:
            raise ConfigError("nonlinearity kind 'quartic' takes no p")
        return QuarticVariational()
    raise ConfigError(f"unknown nonlinearity kind {kind!r} (expected 'power' or 'quartic')")


# ---------------------------------------------------------------------------
# admissible velocities and initial data
# ---------------------------------------------------------------------------

def admissible_velocity_bound(params: ModelParams) -> float:
    """min{1, -a/b, -c/b, a2/b2, c2/b2}; solitary waves exist for 0 < |omega| < bound."""
    return min(
        1.0,
        -params.a / params.b,
        -params.c / params.b,
        params.a2 / params.b2,
        params.c2 / params.b2,
    )


def check_velocity_in_regime(params: ModelParams) -> bool:
    """True iff 0 < |omega| < admissible_velocity_bound(params).

    Solvers never refuse to run on False; they record a warning instead
    (beyond-regime experiments are a supported use)."""
    bound = admissible_velocity_bound(params)
    return 0.0 < abs(params.omega) < bound


def gaussian_initial(
    grid: Grid,
    a0: float,
    width: float,
    amplitude: float = 1.0,
    v_width: Optional[float] = None,
    v_amplitude: Optional[float] = None,
) -> WaveProfile:
    """Gaussian bump initial guess psi_j = A*exp(-w*(x_j - a0)**2), v alike.

    ``width`` multiplies the squared distance directly (w = 0.5 gives the
    classic exp(-(x-a0)^2/2)).  Pass v_width/v_amplitude to make v differ
    from psi (asymmetric initial data).
    """
    if not (0.0 <= a0 <= grid.length):
        raise ConfigError(f"gaussian center a0={a0} outside [0, {grid.length}]")
    if width <= 0:
        raise ConfigError("gaussian width parameter must be > 0")
    x = grid.x
    psi = amplitude * np.exp(-width * (x - a0) ** 2)
    wv = width if v_width is None else v_width
    av = amplitude if v_amplitude is None else v_amplitude
    if wv <= 0:
        raise ConfigError("gaussian v width parameter must be > 0")
    v = av * np.exp(-wv * (x - a0) ** 2)
    return WaveProfile(grid=grid, psi=psi, v=v)
