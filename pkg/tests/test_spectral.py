"""Pseudo-spectral grid operations and the implicit Runge-Kutta stepper."""

import math

import numpy as np
import pytest

from tempohom.blueprint import PermittivityBlueprint
from tempohom.errors import GridError, GuardViolation, SingularStageSystem
from tempohom.spectral import (ELECTRIC, MAGNETIC, Coefficient, WaveProblem,
                               bilaplacian, dump_field, iterate, laplacian,
                               make_grid, quadratic_energy, solve)

SINE = PermittivityBlueprint.sine_inverse()


def test_grid_layout():
    grid = make_grid(64)
    assert grid.N == 64 and grid.L == 2.0
    assert grid.x[0] == -1.0
    assert grid.x[1] - grid.x[0] == pytest.approx(2.0 / 64)
    np.testing.assert_allclose(grid.k, 2 * np.pi * np.fft.fftfreq(64, d=2.0 / 64))


def test_grid_size_validation():
    with pytest.raises(GridError):
        make_grid(100)
    with pytest.raises(GridError):
        make_grid(4)


def test_norm_is_parseval():
    grid = make_grid(64)
    ones = np.ones(grid.N)
    assert grid.norm_l2(grid.to_hat(ones)) == pytest.approx(math.sqrt(2.0))
    f = np.sin(np.pi * grid.x)
    assert grid.norm_l2(grid.to_hat(f)) == pytest.approx(1.0, abs=1e-13)


def test_to_hat_shape_check():
    grid = make_grid(64)
    with pytest.raises(GridError):
        grid.to_hat(np.ones(32))


def test_laplacian_and_bilaplacian_exact_on_modes():
    grid = make_grid(64)
    f = np.sin(4 * np.pi * grid.x)
    np.testing.assert_allclose(laplacian(f, grid), -(4 * np.pi) ** 2 * f,
                               rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose(bilaplacian(f, grid), (4 * np.pi) ** 4 * f,
                               rtol=1e-12, atol=1e-6)


def _standing_wave_problem(form, dt, T=0.4, eps=2.0, N=64):
    grid = make_grid(N)
    k = 4 * np.pi
    v0 = np.sin(k * grid.x)
    v1 = np.zeros_like(v0)
    return grid, WaveProblem(form=form, coefficient=Coefficient.constant(eps),
                             grid=grid, v0=v0, v1=v1, T=T, dt=dt)


def test_standing_wave_exact_solution():
    # eps u_tt = u_xx with u(0) = sin(kx), u_t(0) = 0 -> cos(k t / sqrt(eps)) sin(kx)
    grid, problem = _standing_wave_problem(ELECTRIC, dt=0.4 / 2 ** 9)
    state = solve(problem)
    k = 4 * np.pi
    exact = np.cos(k * 0.4 / math.sqrt(2.0)) * np.sin(k * grid.x)
    err = grid.norm_l2(state.u_hat - grid.to_hat(exact))
    assert err < 1e-10


def test_electric_and_magnetic_agree_for_constant_coefficient():
    _, pe = _standing_wave_problem(ELECTRIC, dt=0.4 / 2 ** 8)
    grid, pm = _standing_wave_problem(MAGNETIC, dt=0.4 / 2 ** 8)
    for (te, se), (tm, sm) in zip(iterate(pe), iterate(pm)):
        assert te == tm
        assert grid.norm_l2(se.u_hat - sm.u_hat) < 1e-12


def test_temporal_order_four_under_modulation():
    # halving dt must shrink the error about 16-fold
    grid = make_grid(64)
    T, eta = 0.4, 0.05
    v0 = np.exp(-grid.x ** 2 / 0.02)
    v1 = np.zeros_like(v0)

    def final(dt):
        problem = WaveProblem(form=MAGNETIC,
                              coefficient=Coefficient.modulated(SINE, eta),
                              grid=grid, v0=v0, v1=v1, T=T, dt=dt)
        return solve(problem).u_hat

    u1, u2, u3 = (final(T / n) for n in (512, 1024, 2048))
    r = grid.norm_l2(u1 - u3) / grid.norm_l2(u2 - u3)
    # for a fourth-order method the difference ratio tends to 255/15 = 17
    assert 14 < r < 20


def test_energy_conservation_constant_coefficient():
    grid, problem = _standing_wave_problem(ELECTRIC, dt=0.4 / 2 ** 6)
    energies = []
    for _, state in iterate(problem):
        energies.append(quadratic_energy(grid, state, 2.0, ELECTRIC))
    drift = (max(energies) - min(energies)) / energies[0]
    assert drift <= 1e-8


def test_fields_stay_real_under_modulation():
    grid = make_grid(32)
    rng = np.random.default_rng(3)
    v0 = rng.normal(size=32)
    v1 = rng.normal(size=32)
    problem = WaveProblem(form=ELECTRIC,
                          coefficient=Coefficient.modulated(SINE, 0.05),
                          grid=grid, v0=v0, v1=v1, T=0.1, dt=0.1 / 64)
    state = solve(problem)
    assert np.max(np.abs(grid.from_hat(state.u_hat).imag)) < 1e-12


def test_dt_guard_against_eta():
    grid = make_grid(32)
    v0 = np.zeros(32)
    with pytest.raises(GuardViolation):
        WaveProblem(form=ELECTRIC, coefficient=Coefficient.modulated(SINE, 1e-3),
                    grid=grid, v0=v0, v1=v0, T=0.4, dt=0.4 / 2 ** 8)


def test_horizon_must_be_step_multiple():
    grid = make_grid(32)
    v0 = np.zeros(32)
    problem = WaveProblem(form=ELECTRIC, coefficient=Coefficient.constant(1.0),
                          grid=grid, v0=v0, v1=v0, T=0.35, dt=0.1)
    with pytest.raises(GridError):
        solve(problem)


def test_nonfinite_symbol_raises():
    grid = make_grid(32)
    v0 = np.ones(32)
    problem = WaveProblem(form=ELECTRIC, coefficient=Coefficient.constant(1.0),
                          grid=grid, v0=v0, v1=v0, T=0.1, dt=0.05,
                          beta=float("inf"))
    with np.errstate(invalid="ignore"), pytest.raises(SingularStageSystem):
        solve(problem)


def test_modulated_coefficient_guard():
    with pytest.raises(GuardViolation):
        Coefficient.modulated(SINE, 0.0)


def test_dump_field_format(tmp_path):
    grid = make_grid(16)
    u = np.sin(np.pi * grid.x)
    path = tmp_path / "field.dat"
    dump_field(path, grid, u, t=0.125)
    lines = path.read_text().splitlines()
    assert lines[0] == f"# t={0.125:.17g} N=16 L=2"
    assert len(lines) == 17
    xs, vals = zip(*(map(float, ln.split()) for ln in lines[1:]))
    np.testing.assert_allclose(xs, grid.x, rtol=0, atol=1e-16)
    np.testing.assert_allclose(vals, u, rtol=0, atol=1e-16)
