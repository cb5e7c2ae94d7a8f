"""Acceptance gate: nine ordered checks, one printed verdict line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the per-criterion
lines on the terminal.  Solves are shared through module-scope fixtures, so
the whole gate costs six large solves plus the propagation sweeps.
"""

import time
from pathlib import Path
from types import SimpleNamespace

import numpy as np
import pytest

from hobwaves import (
    collocation,
    functionals,
    model,
    petviashvili,
    propagation,
    runio,
    spectral,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def _report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")


def _load(name):
    cfg = runio.load_config(CONFIGS / name)
    params = runio.build_params(cfg)
    grid = runio.build_grid(cfg)
    nl = runio.build_nonlinearity(cfg)
    initial = runio.build_initial_profile(cfg, grid)
    return cfg, params, grid, nl, initial


def _solve_fixed_point(name):
    cfg, params, grid, nl, initial = _load(name)
    t0 = time.perf_counter()
    w, rep = petviashvili.solve(initial, params, nl, petviashvili.SolveConfig())
    elapsed = time.perf_counter() - t0
    disp = petviashvili.build_dispersion(grid, params)
    m_s, n_s = petviashvili.stabilizing_factors(w, disp, nl)
    return SimpleNamespace(cfg=cfg, params=params, grid=grid, nl=nl, w=w,
                           rep=rep, elapsed=elapsed, m_s=m_s, n_s=n_s)


def _solve_newton(name):
    cfg, params, grid, nl, initial = _load(name)
    exp0 = collocation.expansion_from_profile(initial)
    t0 = time.perf_counter()
    exp, rep = collocation.newton_solve(
        exp0, params, nl, collocation.NewtonConfig(jacobian="analytic"))
    elapsed = time.perf_counter() - t0
    w = collocation.resample_to_grid(exp)
    return SimpleNamespace(cfg=cfg, params=params, grid=grid, nl=nl, exp=exp,
                           w=w, rep=rep, elapsed=elapsed)


@pytest.fixture(scope="module")
def fig1():
    return _solve_fixed_point("fig1.toml")


@pytest.fixture(scope="module")
def fig2():
    return _solve_fixed_point("fig2.toml")


@pytest.fixture(scope="module")
def fig3():
    return _solve_fixed_point("fig3.toml")


@pytest.fixture(scope="module")
def fig4():
    return _solve_fixed_point("fig4.toml")


@pytest.fixture(scope="module")
def fig7():
    return _solve_newton("fig7.toml")


@pytest.fixture(scope="module")
def fig9():
    return _solve_newton("fig9.toml")


def _check_fixed_point_quality(sol):
    """Shared thresholds for the two reference fixed-point regimes."""
    checks = {
        "converged": sol.rep.converged,
        "iterations": sol.rep.iterations <= 1000,
        "residual": sol.rep.residual_inf_rel <= 1e-6,
        "factor_m": abs(sol.m_s - 1.0) <= 1e-8,
        "factor_n": abs(sol.n_s - 1.0) <= 1e-8,
        "runtime": sol.elapsed <= 60.0,
    }
    detail = (f"{sol.rep.iterations} iterations in {sol.elapsed:.1f}s, "
              f"relative residual {sol.rep.residual_inf_rel:.2e}, "
              f"|M-1|={abs(sol.m_s - 1.0):.2e}, |N-1|={abs(sol.n_s - 1.0):.2e}")
    return checks, detail


def test_criterion_1_fixed_point_degree_8(fig1):
    checks, detail = _check_fixed_point_quality(fig1)
    _report(1, all(checks.values()), detail)
    assert all(checks.values()), f"failed checks: {[k for k, v in checks.items() if not v]}"


def test_criterion_2_fixed_point_degree_5(fig2):
    checks, detail = _check_fixed_point_quality(fig2)
    _report(2, all(checks.values()), detail)
    assert all(checks.values()), f"failed checks: {[k for k, v in checks.items() if not v]}"


def test_criterion_3_outside_velocity_interval(fig3, fig4):
    amps = []
    ok = True
    for sol in (fig3, fig4):
        amp = float(np.max(np.abs(sol.w.psi)))
        amps.append(amp)
        ok = ok and sol.rep.converged and amp > 1e-3
        ok = ok and sol.rep.residual_inf_rel <= 1e-6
        ok = ok and not sol.rep.in_regime  # these regimes sit beyond the bound
    detail = (f"p=1 amp {amps[0]:.3f} res {fig3.rep.residual_inf_rel:.2e}; "
              f"p=2 amp {amps[1]:.3f} res {fig4.rep.residual_inf_rel:.2e}")
    _report(3, ok, detail)
    assert ok


def test_criterion_4_functional_identities(fig1, fig2, fig3, fig4):
    worst = dict(p_omega=0.0, j_identity=0.0, n_identity=0.0)
    for sol in (fig1, fig2, fig3, fig4):
        f = sol.rep.functionals
        p = sol.nl.homogeneous_power
        worst["p_omega"] = max(worst["p_omega"],
                               abs(f.p_omega) / max(f.i_omega, 1.0))
        target_j = p / (2.0 * (p + 2.0)) * f.i_omega
        worst["j_identity"] = max(worst["j_identity"],
                                  abs(f.j_omega - target_j) / abs(target_j))
        worst["n_identity"] = max(worst["n_identity"],
                                  abs(f.n - (p + 2.0) * f.k) / abs(f.n))
    ok = (worst["p_omega"] <= 1e-6 and worst["j_identity"] <= 1e-6
          and worst["n_identity"] <= 1e-8)
    detail = (f"max |P|/max(I,1) {worst['p_omega']:.2e}, "
              f"max J-identity dev {worst['j_identity']:.2e}, "
              f"max N=(p+2)K dev {worst['n_identity']:.2e}")
    _report(4, ok, detail)
    assert ok, worst


def _smooth_profile(rng, grid, n_modes=8, scale=1.0):
    psi = np.zeros(grid.n_points)
    v = np.zeros(grid.n_points)
    for m in range(1, n_modes + 1):
        amp = scale * 0.5 ** m
        phase = 2 * np.pi * m * grid.x / grid.length
        psi += amp * (rng.normal() * np.cos(phase) + rng.normal() * np.sin(phase))
        v += amp * (rng.normal() * np.cos(phase) + rng.normal() * np.sin(phase))
    return model.WaveProfile(grid=grid, psi=psi, v=v)


def _random_regime_params(rng):
    b, d = rng.uniform(0.5, 4.0, size=2)
    b2, d2 = rng.uniform(0.5, 4.0, size=2)
    a, c = -rng.uniform(0.5, 4.0, size=2)
    a2, c2 = rng.uniform(0.5, 4.0, size=2)
    trial = model.ModelParams(a=a, b=b, c=c, d=d, a2=a2, b2=b2, c2=c2, d2=d2,
                              omega=0.01)
    bound = model.admissible_velocity_bound(trial)
    omega = rng.choice([-1.0, 1.0]) * rng.uniform(0.05, 0.95) * bound
    return model.ModelParams(a=a, b=b, c=c, d=d, a2=a2, b2=b2, c2=c2, d2=d2,
                             omega=omega)


def test_criterion_5_energy_norm_equivalence():
    rng = np.random.default_rng(7)
    g = model.Grid(length=60.0, n_points=256)
    worst_split = 0.0
    ok = True
    for _ in range(200):
        params = _random_regime_params(rng)
        w = _smooth_profile(rng, g)
        m1, m2 = functionals.norm_equivalence_constants(params)
        i_omega = (functionals.eval_i1(w, params)
                   - 2.0 * params.omega * functionals.eval_i2(w, params))
        nrm = functionals.h2_norm_sq(w)
        # 1e-12 relative slack absorbs quadrature roundoff at the bound
        ok = ok and i_omega >= m1 * nrm - 1e-12 * nrm
        ok = ok and i_omega <= m2 * nrm + 1e-12 * nrm
        ok = ok and i_omega >= 0.0
        terms = functionals.i_omega_decomposition(w, params)
        ok = ok and all(t >= -1e-13 * max(i_omega, 1.0) for t in terms)
        split = abs(sum(terms) - i_omega) / max(i_omega, 1e-300)
        worst_split = max(worst_split, split)
        ok = ok and split <= 1e-9
    detail = f"200 profiles, worst decomposition deviation {worst_split:.2e}"
    _report(5, ok, detail)
    assert ok


def test_criterion_6_newton_quartic(fig7, fig9):
    last7 = fig7.rep.history[-1]
    checks = {
        "fig7_converged": fig7.rep.converged,
        "fig7_iterations": fig7.rep.iterations <= 50,
        "fig7_step": last7.step_inf < 1e-12,
        "fig7_residual": last7.residual_inf < 1e-12,
        "fig7_nontrivial": float(np.max(np.abs(fig7.w.psi))) > 1e-3,
        "fig9_converged": fig9.rep.converged,
        "fig9_nontrivial": float(np.max(np.abs(fig9.w.psi))) > 1e-3,
    }

    rng = np.random.default_rng(11)
    exp = collocation.CosineExpansion(
        l=fig7.exp.l,
        psi_coeffs=0.3 * rng.normal(size=17) * 0.7 ** np.arange(17),
        v_coeffs=0.3 * rng.normal(size=17) * 0.7 ** np.arange(17),
    )
    j_an = collocation.jacobian(exp, fig7.params, fig7.nl, mode="analytic")
    j_fd = collocation.jacobian(exp, fig7.params, fig7.nl, mode="fd")
    jac_dev = float(np.max(np.abs(j_an - j_fd)))
    checks["jacobian"] = jac_dev <= 1e-6

    ok = all(checks.values())
    detail = (f"quartic A: {fig7.rep.iterations} iterations, "
              f"step {last7.step_inf:.2e}, residual {last7.residual_inf:.2e}; "
              f"quartic B: {fig9.rep.iterations} iterations; "
              f"jacobian dev {jac_dev:.2e}")
    _report(6, ok, detail)
    assert ok, f"failed checks: {[k for k, v in checks.items() if not v]}"


def _propagation_error(sol, dt, t_final=10.0):
    state0 = propagation.EvolutionState.from_wave_profile(sol.w)
    final, _, _ = propagation.propagate(
        state0, sol.params, sol.nl,
        propagation.PropagationConfig(dt=dt, t_final=t_final, theta=0.5,
                                      snapshot_stride=0))
    errs = propagation.verify_translation(final, state0, sol.params.omega, t_final)
    return max(errs["err_l2_u"], errs["err_l2_eta"])


def test_criterion_7_propagation_accuracy_and_order(fig1, fig2, fig7):
    errors = {name: _propagation_error(sol, dt=0.001)
              for name, sol in (("deg8", fig1), ("deg5", fig2), ("quartic", fig7))}
    accuracy_ok = all(e <= 5e-2 for e in errors.values())

    e_coarse = _propagation_error(fig1, dt=0.004)
    e_mid = _propagation_error(fig1, dt=0.002)
    e_fine = errors["deg8"]
    orders = (np.log2(e_coarse / e_mid), np.log2(e_mid / e_fine))
    order_ok = min(orders) >= 1.8

    detail = (f"t=10 errors {', '.join(f'{k} {v:.2e}' for k, v in errors.items())}; "
              f"observed orders {orders[0]:.3f}, {orders[1]:.3f}")
    _report(7, accuracy_ok and order_ok, detail)
    assert accuracy_ok, errors
    assert order_ok, (
        f"observed temporal orders {orders[0]:.3f}, {orders[1]:.3f} fall short "
        f"of 1.8: the nonlinear terms enter each step from the current state "
        f"only, which caps the global order at one whenever they are active "
        f"(errors {e_coarse:.3e} / {e_mid:.3e} / {e_fine:.3e} at "
        f"dt 0.004 / 0.002 / 0.001)")


def test_criterion_8_velocity_derivative_of_action(fig1):
    h = 0.01
    js = {}
    for omega in (fig1.params.omega - h, fig1.params.omega + h):
        cfg = dict(fig1.cfg)
        cfg["omega"] = omega
        params = runio.build_params(cfg)
        initial = runio.build_initial_profile(cfg, fig1.grid)
        _, rep = petviashvili.solve(initial, params, fig1.nl,
                                    petviashvili.SolveConfig())
        assert rep.converged
        js[omega] = rep.functionals.j_omega
    dj = (js[fig1.params.omega + h] - js[fig1.params.omega - h]) / (2.0 * h)
    target = -fig1.rep.functionals.i2
    dev = abs(dj - target) / abs(target)
    ok = dev <= 0.10
    _report(8, ok, f"central difference {dj:.6f} vs -I2 {target:.6f}, "
                   f"relative deviation {dev:.2e}")
    assert ok


def test_criterion_9_micro_oracles(fig1):
    checks = {}

    disp = petviashvili.build_dispersion(fig1.grid, fig1.params)
    checks["det_k0"] = disp.det[0] == fig1.params.omega ** 2 - 1.0

    sym = propagation.build_symbols(fig1.grid, fig1.params)
    checks["symbols_imaginary"] = bool(np.all(sym.w1.real == 0.0)
                                       and np.all(sym.w2.real == 0.0))

    g = model.Grid(length=2.0 * np.pi, n_points=64)
    f = np.cos(5.0 * g.x + 0.3)
    exact = -5.0 * np.sin(5.0 * g.x + 0.3)
    checks["derivative"] = float(np.max(np.abs(
        spectral.derivative(g, f, 1) - exact))) <= 1e-12

    # theta = 0 reduces to the explicit Euler update, term by term
    grid = model.Grid(length=32.0, n_points=64)
    params = model.ModelParams(omega=0.8, a=-2, b=2, c=-2, d=2,
                               a2=20, b2=5, c2=20, d2=5)
    sym2 = propagation.build_symbols(grid, params)
    nl = model.HomogeneousPower(2)
    rng = np.random.default_rng(12)
    u = sum(0.5 ** m * rng.normal()
            * np.cos(2 * np.pi * m * grid.x / grid.length) for m in range(1, 5))
    eta = sum(0.5 ** m * rng.normal()
              * np.sin(2 * np.pi * m * grid.x / grid.length) for m in range(1, 5))
    state = propagation.EvolutionState(grid=grid, u=u, eta=eta)
    dt = 0.01
    out = propagation.step(state, sym2, nl, dt, theta=0.0)
    u_hat, eta_hat = np.fft.rfft(u), np.fft.rfft(eta)
    # the scheme samples the state through its spectrum, so the oracle must too
    u_rt, eta_rt = np.fft.irfft(u_hat, n=64), np.fft.irfft(eta_hat, n=64)
    l1 = sym2.prefactor1 * np.fft.rfft(nl.h1(eta_rt, None, None, u_rt, None, None))
    l2 = sym2.prefactor2 * np.fft.rfft(nl.h2(eta_rt, None, None, u_rt, None, None))
    euler_u = np.fft.irfft(u_hat + dt * sym2.w1 * eta_hat + dt * l1, n=64)
    euler_eta = np.fft.irfft(eta_hat + dt * sym2.w2 * u_hat + dt * l2, n=64)
    checks["euler"] = (np.array_equal(out.u, euler_u)
                       and np.array_equal(out.eta, euler_eta))

    # linear stepping against an independent per-mode 2x2 recurrence
    zero_nl = model.CustomNonlinearity(
        h1_fn=lambda q, r, z, s, t, w: np.zeros_like(q),
        h2_fn=lambda q, r, z, s, t, w: np.zeros_like(q),
    )
    m = 3
    k = grid.wavenumbers[m]
    u0, eta0 = np.cos(k * grid.x), 0.5 * np.sin(k * grid.x)
    st = propagation.EvolutionState(grid=grid, u=u0, eta=eta0)
    dt, theta, n_steps = 0.01, 0.5, 10_000
    den = propagation.theta_denominator(sym2, dt, theta)
    for _ in range(n_steps):
        st = propagation.step(st, sym2, zero_nl, dt, theta, den)
    w1, w2 = complex(sym2.w1[m]), complex(sym2.w2[m])
    uh, eh = complex(np.fft.rfft(u0)[m]), complex(np.fft.rfft(eta0)[m])
    d = 1.0 - dt * dt * w1 * w2 * theta * theta
    for _ in range(n_steps):
        uh_new = ((1.0 + dt * dt * w1 * w2 * theta * (1 - theta)) * uh
                  + dt * w1 * eh) / d
        eh = eh + dt * theta * w2 * uh_new + dt * (1 - theta) * w2 * uh
        uh = uh_new
    dev_u = abs(np.fft.rfft(st.u)[m] - uh) / max(1.0, abs(uh))
    dev_eta = abs(np.fft.rfft(st.eta)[m] - eh) / max(1.0, abs(eh))
    checks["mode_recurrence"] = max(dev_u, dev_eta) <= 1e-12

    ok = all(checks.values())
    _report(9, ok, ", ".join(f"{k} {'ok' if v else 'BAD'}" for k, v in checks.items()))
    assert ok, f"failed checks: {[k for k, v in checks.items() if not v]}"
