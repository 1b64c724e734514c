"""Packet data, streamed error norm, sweep machinery, and rate fitting."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tempohom.blueprint import PermittivityBlueprint
from tempohom.errors import (BoundaryLeak, GridMismatch, GuardViolation,
                             InsufficientPoints)
from tempohom.harness import (PacketParams, convergence_study, estimate_rate,
                              l2t_l2x_error, packet_init, run_sweep_point)
from tempohom.spectral import ELECTRIC, MAGNETIC, make_grid

SINE = PermittivityBlueprint.sine_inverse()
CONST2 = PermittivityBlueprint.constant(2.0)
T = 0.4


# -- packet -------------------------------------------------------------------

def test_packet_matches_closed_form_velocity():
    grid = make_grid(64)
    params = PacketParams()
    v0, v1 = packet_init(params, grid)
    x, T0, om = grid.x, params.T0, params.omega0
    v0_ref = np.exp(-x ** 2 / (2 * T0 ** 2)) * np.cos(om * x)
    v1_ref = np.exp(-x ** 2 / (2 * T0 ** 2)) * (
        (x / T0 ** 2) * np.cos(om * x) + om * np.sin(om * x))
    np.testing.assert_allclose(v0, v0_ref, rtol=0, atol=1e-15)
    np.testing.assert_allclose(v1, v1_ref, rtol=0, atol=1e-12)


def _reflect(values):
    # samples of f(-x) on the periodic grid x[i] = -1 + i dx
    return np.concatenate(([values[0]], values[:0:-1]))


def test_packet_parity_without_carrier():
    grid = make_grid(64)
    v0, v1 = packet_init(PacketParams(omega0=0.0), grid)
    np.testing.assert_allclose(v0, _reflect(v0), rtol=0, atol=1e-15)
    np.testing.assert_allclose(v1, -_reflect(v1), rtol=0, atol=1e-12)


def test_packet_boundary_guard():
    grid = make_grid(64)
    with pytest.raises(BoundaryLeak):
        packet_init(PacketParams(T0=0.4), grid)
    with pytest.raises(BoundaryLeak):
        PacketParams(T0=-0.1)


# -- error norm ----------------------------------------------------------------

def _traj(times, fields):
    return [(t, f) for t, f in zip(times, fields)]


def test_error_norm_zero_for_identical():
    grid = make_grid(16)
    times = np.linspace(0, 1, 9)
    fields = [grid.to_hat(np.sin(np.pi * grid.x) * t) for t in times]
    assert l2t_l2x_error(_traj(times, fields), _traj(times, fields)) == 0.0


def test_error_norm_constant_difference():
    # ||d||_{L^2(0,T;L^2)} = sqrt(T) ||d||_{L^2} for a static difference
    grid = make_grid(32)
    times = np.linspace(0, 0.7, 15)
    d = grid.to_hat(np.sin(np.pi * grid.x))
    za = [np.zeros_like(d)] * len(times)
    zb = [d] * len(times)
    err = l2t_l2x_error(_traj(times, za), _traj(times, zb))
    assert err == pytest.approx(math.sqrt(0.7) * 1.0, abs=1e-12)


def test_error_norm_linear_growth():
    # d = sin(pi x) * t over [0,1]: norm sqrt(1/3), trapezoid error O(dt^2)
    grid = make_grid(32)
    times = np.linspace(0, 1, 65)
    d = grid.to_hat(np.sin(np.pi * grid.x))
    za = [np.zeros_like(d)] * len(times)
    zb = [d * t for t in times]
    err = l2t_l2x_error(_traj(times, za), _traj(times, zb))
    assert err == pytest.approx(math.sqrt(1.0 / 3.0), abs=1e-3)


def test_error_norm_mismatched_times():
    grid = make_grid(16)
    d = grid.to_hat(np.ones(16))
    a = _traj([0.0, 0.1, 0.2], [d] * 3)
    b = _traj([0.0, 0.15, 0.2], [d] * 3)
    with pytest.raises(GridMismatch):
        l2t_l2x_error(a, b)


def test_error_norm_mismatched_lengths():
    grid = make_grid(16)
    d = grid.to_hat(np.ones(16))
    with pytest.raises(GridMismatch):
        l2t_l2x_error(_traj([0.0, 0.1], [d] * 2), _traj([0.0], [d]))


# -- rate fitting ---------------------------------------------------------------

def test_estimate_rate_exact_powers():
    etas = np.array([0.04, 0.02, 0.01, 0.005])
    assert estimate_rate(etas, 3.0 * etas) == pytest.approx(1.0, abs=1e-12)
    assert estimate_rate(etas, 0.7 * etas ** 3) == pytest.approx(3.0, abs=1e-12)


def test_estimate_rate_requires_enough_points():
    with pytest.raises(InsufficientPoints):
        estimate_rate([0.1, 0.05], [1.0, 0.5])
    with pytest.raises(InsufficientPoints):
        estimate_rate([0.1, 0.05, 0.025], [1.0, 0.0, 0.1])


@settings(max_examples=50, deadline=None)
@given(st.floats(0.25, 4.0), st.floats(0.1, 10.0))
def test_estimate_rate_recovers_power_law(p, c):
    etas = np.array([0.08, 0.04, 0.02, 0.01])
    slope = estimate_rate(etas, c * etas ** p)
    assert slope == pytest.approx(p, abs=1e-9)


# -- guards ----------------------------------------------------------------------

def test_sweep_guard_on_dt():
    with pytest.raises(GuardViolation):
        run_sweep_point(ELECTRIC, SINE, T / 1000, [0], PacketParams(),
                        64, T / 2 ** 9, T)


def test_sweep_guard_on_carrier():
    with pytest.raises(GuardViolation):
        run_sweep_point(ELECTRIC, SINE, T / 10, [0], PacketParams(omega0=5.0),
                        64, T / 2 ** 9, T)


# -- sweeps -----------------------------------------------------------------------

def test_sweep_point_is_deterministic():
    a = run_sweep_point(ELECTRIC, SINE, T / 10, [0, 1], PacketParams(),
                        64, T / 2 ** 9, T)
    b = run_sweep_point(ELECTRIC, SINE, T / 10, [0, 1], PacketParams(),
                        64, T / 2 ** 9, T)
    assert a == b


def test_study_invariant_under_eta_permutation():
    etas = [T / 40, T / 10, T / 20]
    kw = dict(params=PacketParams(), orders=[0, 1], N=64, dt=T / 2 ** 10, T=T,
              workers=1)
    a = convergence_study(ELECTRIC, SINE, eta_list=etas, **kw)
    b = convergence_study(ELECTRIC, SINE, eta_list=etas[::-1], **kw)
    assert a.etas == b.etas
    for o in a.orders:
        np.testing.assert_array_equal(a.errors[o], b.errors[o])
        assert a.slopes[o] == b.slopes[o]


def test_study_parallel_matches_serial():
    etas = [T / 10, T / 20, T / 40]
    kw = dict(params=PacketParams(), orders=[0], N=64, dt=T / 2 ** 10, T=T)
    serial = convergence_study(ELECTRIC, SINE, eta_list=etas, workers=1, **kw)
    parallel = convergence_study(ELECTRIC, SINE, eta_list=etas, workers=2, **kw)
    np.testing.assert_array_equal(serial.errors[0], parallel.errors[0])
    assert serial.slopes[0] == parallel.slopes[0]


def test_degenerate_sweep_flagged_for_constant_blueprint():
    report = convergence_study(
        ELECTRIC, CONST2, PacketParams(), [T / 10, T / 20, T / 40], [0, 1],
        N=64, dt=T / 2 ** 10, T=T, workers=1)
    assert report.degenerate
    assert all(report.slopes[o] is None for o in report.orders)
    assert all(np.all(report.errors[o] < 1e-12) for o in report.orders)


def test_magnetic_orders_improve_monotonically():
    report = convergence_study(
        MAGNETIC, SINE, PacketParams(), [T / 20, T / 40, T / 80], [0, 1, 2],
        N=64, dt=T / 2 ** 11, T=T, workers=1)
    for i in range(len(report.etas)):
        e0, e1, e2 = (report.errors[o][i] for o in (0, 1, 2))
        assert e1 < e0
        assert e2 < e1


def test_spatial_resolution_is_not_the_bottleneck():
    kw = dict(params=PacketParams(), orders=[1], dt=T / 2 ** 10, T=T, workers=1)
    e64 = convergence_study(ELECTRIC, SINE, eta_list=[T / 10, T / 20, T / 40],
                            N=64, **kw).errors[1]
    e128 = convergence_study(ELECTRIC, SINE, eta_list=[T / 10, T / 20, T / 40],
                             N=128, **kw).errors[1]
    np.testing.assert_allclose(e64, e128, rtol=1e-2)


def test_csv_schema(tmp_path):
    report = convergence_study(
        ELECTRIC, SINE, PacketParams(), [T / 10, T / 20, T / 40], [0, "macro2"],
        N=64, dt=T / 2 ** 10, T=T, workers=1)
    path = tmp_path / "sweep.csv"
    report.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "case,eta,order,error,slope_fitted"
    error_rows = [ln for ln in lines[1:] if not ln.startswith("electric,NA")]
    slope_rows = [ln for ln in lines[1:] if ln.startswith("electric,NA")]
    assert len(error_rows) == 6 and len(slope_rows) == 2
    for row in error_rows:
        fields = row.split(",")
        assert len(fields) == 5 and fields[4] == ""
        assert float(fields[3]) > 0
    for row in slope_rows:
        fields = row.split(",")
        assert fields[1] == "NA" and fields[3] == ""
        float(fields[4])
