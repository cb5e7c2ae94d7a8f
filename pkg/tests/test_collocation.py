"""Cosine collocation: transforms, Jacobians, and the Newton solve."""

import numpy as np
import pytest

from hobwaves import collocation, model
from hobwaves.errors import ConfigError
from hobwaves.reports import Termination


FIG7 = dict(a=-2.0, b=2.0, c=-2.0, d=2.0, a2=3.0, b2=3.0, c2=3.0, d2=3.0)


def _random_expansion(rng, l=50.0, m=8, scale=0.3):
    return collocation.CosineExpansion(
        l=l,
        psi_coeffs=rng.normal(0, scale, m + 1),
        v_coeffs=rng.normal(0, scale, m + 1),
    )


def test_collocation_points_formula():
    pts = collocation.collocation_points(50.0, 16)
    assert len(pts) == 9
    assert pts[0] == 0.0
    assert pts[-1] == pytest.approx(50.0)
    assert np.allclose(np.diff(pts), 50.0 / 8)


def test_evaluate_expansion_single_mode():
    # l = pi makes the mode-k angular frequency exactly k
    coeffs = np.zeros(5)
    coeffs[2] = 1.0
    exp = collocation.CosineExpansion(l=np.pi, psi_coeffs=coeffs, v_coeffs=0 * coeffs)
    psi0, _ = collocation.evaluate_expansion(exp, 0.0)
    assert psi0 == pytest.approx(1.0)
    d2, _ = collocation.evaluate_expansion(exp, 0.0, deriv_order=2)
    assert d2 == pytest.approx(-4.0)  # -k^2 at k=2
    x = np.linspace(0, np.pi, 17)
    vals, _ = collocation.evaluate_expansion(exp, x)
    assert np.allclose(vals, np.cos(2 * x), atol=1e-13)
    d1, _ = collocation.evaluate_expansion(exp, x, deriv_order=1)
    assert np.allclose(d1, -2 * np.sin(2 * x), atol=1e-13)
    d3, _ = collocation.evaluate_expansion(exp, x, deriv_order=3)
    assert np.allclose(d3, 8 * np.sin(2 * x), atol=1e-12)
    d4, _ = collocation.evaluate_expansion(exp, x, deriv_order=4)
    assert np.allclose(d4, 16 * np.cos(2 * x), atol=1e-12)


def test_dct_round_trip():
    rng = np.random.default_rng(30)
    c = rng.normal(size=17)
    back = collocation._dct_coeffs(collocation._dct_eval(c.copy()))
    assert np.max(np.abs(back - c)) < 1e-13


def test_expansion_profile_round_trip():
    grid = model.Grid(length=100.0, n_points=512)
    w = model.gaussian_initial(grid, 50.0, 0.05, 1.0)
    exp = collocation.expansion_from_profile(w)
    assert exp.l == 50.0
    assert exp.n_modes == 256
    back = collocation.resample_to_grid(exp)
    assert back.grid.n_points == 512
    assert np.max(np.abs(back.psi - w.psi)) < 1e-12
    assert np.max(np.abs(back.v - w.v)) < 1e-12


def test_expansion_rejects_off_center_profile():
    grid = model.Grid(length=100.0, n_points=256)
    w = model.gaussian_initial(grid, 30.0, 0.05, 1.0)  # not even about 50
    with pytest.raises(ConfigError, match="even about"):
        collocation.expansion_from_profile(w)


def test_resample_is_even_about_center():
    rng = np.random.default_rng(31)
    exp = _random_expansion(rng)
    w = collocation.resample_to_grid(exp)
    n = w.grid.n_points
    idx = np.arange(1, n // 2)
    assert np.max(np.abs(w.psi[idx] - w.psi[n - idx])) < 1e-14
    assert np.max(np.abs(w.v[idx] - w.v[n - idx])) < 1e-14


def test_evaluate_matches_resample_on_grid():
    rng = np.random.default_rng(32)
    exp = _random_expansion(rng, m=16)
    w = collocation.resample_to_grid(exp)
    half = w.grid.x[: 17 * 2]
    psi_vals, v_vals = collocation.evaluate_expansion(exp, half)
    assert np.allclose(psi_vals, w.psi[: len(half)], atol=1e-12)
    assert np.allclose(v_vals, w.v[: len(half)], atol=1e-12)


def test_jacobian_analytic_matches_fd():
    rng = np.random.default_rng(33)
    params = model.ModelParams(omega=0.6, **FIG7)
    nl = model.QuarticVariational()
    exp = _random_expansion(rng, m=8)
    ja = collocation.jacobian(exp, params, nl, mode="analytic")
    jf = collocation.jacobian(exp, params, nl, mode="fd")
    assert ja.shape == (18, 18)
    # forward differences with step 1e-7 carry O(step) truncation error
    assert np.max(np.abs(ja - jf)) < 1e-6


def test_jacobian_rejects_unknown_mode():
    rng = np.random.default_rng(34)
    exp = _random_expansion(rng)
    params = model.ModelParams(omega=0.6, **FIG7)
    with pytest.raises(ConfigError):
        collocation.jacobian(exp, params, model.QuarticVariational(), mode="magic")


def test_residual_vanishes_for_linear_null_state():
    # zero coefficients solve the homogeneous-zero equations exactly
    params = model.ModelParams(omega=0.6, **FIG7)
    exp = collocation.CosineExpansion(l=50.0, psi_coeffs=np.zeros(9), v_coeffs=np.zeros(9))
    res = collocation.residual_vector(exp, params, model.QuarticVariational())
    assert np.max(np.abs(res)) == 0.0


@pytest.fixture(scope="module")
def fig7_small_solution():
    params = model.ModelParams(omega=0.6, **FIG7)
    grid = model.Grid(length=100.0, n_points=512)
    init = collocation.expansion_from_profile(
        model.gaussian_initial(grid, 50.0, 0.05, 1.0))
    exp, report = collocation.newton_solve(
        init, params, model.QuarticVariational(),
        collocation.NewtonConfig(jacobian="analytic"))
    return params, exp, report


def test_newton_converges_fig7(fig7_small_solution):
    _, exp, report = fig7_small_solution
    assert report.converged
    assert report.termination is Termination.CONVERGED
    assert report.iterations <= 20
    last = report.history[-1]
    assert last.residual_inf < 1e-12
    assert last.step_inf < 1e-12
    assert np.max(np.abs(exp.stacked())) > 0.1


def test_newton_quadratic_convergence_diagnostic(fig7_small_solution):
    _, _, report = fig7_small_solution
    # bounded ratio ||d_{k+1}|| / ||d_k||^1.5 signals superlinear contraction
    assert report.quadratic_constant is not None
    assert report.quadratic_constant < 100.0


def test_newton_report_functionals(fig7_small_solution):
    _, _, report = fig7_small_solution
    f = report.functionals
    assert f is not None
    assert f.i_omega > 0
    assert abs(f.p_omega) / max(f.i_omega, 1.0) < 1e-6
    assert report.residual_inf_rel < 1e-6


def test_newton_solution_resamples_smoothly(fig7_small_solution):
    _, exp, _ = fig7_small_solution
    w = collocation.resample_to_grid(exp)
    # spectral decay: the last coefficients should be at roundoff level
    assert np.max(np.abs(exp.psi_coeffs[-10:])) < 1e-10
    assert w.max_norm() == pytest.approx(np.max(np.abs(w.psi)), rel=1e-12)


def test_newton_zero_start_collapses():
    params = model.ModelParams(omega=0.6, **FIG7)
    init = collocation.CosineExpansion(l=50.0, psi_coeffs=np.zeros(65),
                                       v_coeffs=np.zeros(65))
    _, report = collocation.newton_solve(init, params, model.QuarticVariational())
    assert report.termination is Termination.COLLAPSED_TO_ZERO
    assert not report.converged


def test_newton_damped_path_also_converges(fig7_small_solution):
    params, _, _ = fig7_small_solution
    grid = model.Grid(length=100.0, n_points=512)
    init = collocation.expansion_from_profile(
        model.gaussian_initial(grid, 50.0, 0.05, 1.0))
    exp, report = collocation.newton_solve(
        init, params, model.QuarticVariational(),
        collocation.NewtonConfig(jacobian="analytic", damping=True))
    assert report.converged
    assert np.max(np.abs(exp.stacked())) > 0.1


def test_newton_fd_jacobian_route(fig7_small_solution):
    # both Jacobian modes must land on the same discrete solution
    params, exp_ref, _ = fig7_small_solution
    grid = model.Grid(length=100.0, n_points=512)
    init = collocation.expansion_from_profile(
        model.gaussian_initial(grid, 50.0, 0.05, 1.0))
    exp, report = collocation.newton_solve(
        init, params, model.QuarticVariational(),
        collocation.NewtonConfig(jacobian="fd"))
    assert report.converged
    assert np.max(np.abs(exp.stacked() - exp_ref.stacked())) < 1e-10


def test_newton_config_rejects_bad_jacobian():
    params = model.ModelParams(omega=0.6, **FIG7)
    init = collocation.CosineExpansion(l=50.0, psi_coeffs=np.ones(9), v_coeffs=np.ones(9))
    with pytest.raises(ConfigError):
        collocation.newton_solve(init, params, model.QuarticVariational(),
                                 collocation.NewtonConfig(jacobian="nope"))


def test_expansion_validates_inputs():
    with pytest.raises(ConfigError):
        collocation.CosineExpansion(l=-1.0, psi_coeffs=np.ones(5), v_coeffs=np.ones(5))
    with pytest.raises(ConfigError):
        collocation.CosineExpansion(l=1.0, psi_coeffs=np.ones(5), v_coeffs=np.ones(4))
