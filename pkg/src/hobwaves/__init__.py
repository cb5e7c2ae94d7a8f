"""Spectral solvers and validation tools for solitary traveling waves of a
fifth-order Boussinesq system: a stabilized Fourier fixed-point iteration
for homogeneous power nonlinearities, cosine collocation with damped Newton
for the quartic non-homogeneous case, variational functionals for
independent verification, and a theta-scheme time propagator."""

__version__ = "0.1.0"

from .model import (  # noqa: F401
    Grid,
    HomogeneousPower,
    ModelParams,
    Nonlinearity,
    QuarticVariational,
    CustomNonlinearity,
    WaveProfile,
    admissible_velocity_bound,
    check_velocity_in_regime,
    gaussian_initial,
    make_nonlinearity,
)
