"""Convergence experiment: packet data, streamed space-time errors, eta sweep.

The experiment compares the full modulated wave against the homogenized
approximants of increasing order in the L^2(0,T; L^2) norm, for a sweep of
modulation periods eta = T/ell, and fits log-log slopes.  Everything is
deterministic; sweeps for different eta are independent and can fan out to
a process pool.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import spectral
from .blueprint import DEFAULT_M
from .errors import (BoundaryLeak, GridMismatch, GuardViolation,
                     InsufficientPoints)
from .homogenize import make_bundle, normalize_order
from .spectral import Coefficient, SolverState, WaveProblem

#: largest allowed carrier-frequency / modulation-frequency ratio
OMEGA_GUARD = 0.1

#: below this every error in a sweep is considered round-off, not signal
DEGENERATE_FLOOR = 1e-12


@dataclass(frozen=True)
class PacketParams:
    """Gaussian wave packet exp(-x^2/(2 T0^2)) cos(omega0 x)."""

    T0: float = 0.1
    omega0: float = 0.01

    def __post_init__(self):
        if self.T0 <= 0 or self.omega0 < 0:
            raise BoundaryLeak(f"invalid packet parameters {self}")


def packet_init(params, grid):
    """Sample the packet and its interface-consistent velocity v1 = -d_x v0.

    The velocity makes the data an exact right-mover w(x - t) in a unit
    medium; -d_x is evaluated spectrally."""
    x = grid.x
    v0 = np.exp(-x ** 2 / (2 * params.T0 ** 2)) * np.cos(params.omega0 * x)
    edge = math.exp(-grid.L ** 2 / (8 * params.T0 ** 2))
    if edge > 1e-14:
        raise BoundaryLeak(
            f"packet tail {edge:.3e} at |x| = {grid.L / 2} exceeds 1e-14; "
            "narrow T0 or enlarge the domain")
    v1 = grid.from_hat(-1j * grid.k * grid.to_hat(v0))
    return v0, v1


def full_wave_problem(case, bp, eta, v0, v1, grid, T, dt):
    """The reference problem with the modulated coefficient eps(t/eta)."""
    return WaveProblem(form=case, coefficient=Coefficient.modulated(bp, eta),
                       grid=grid, v0=v0, v1=v1, T=T, dt=dt)


def _as_hat(item):
    return item.u_hat if isinstance(item, SolverState) else np.asarray(item)


def l2t_l2x_error(traj_a, traj_b, L=2.0):
    """L^2(0,T; L^2) norm of the difference of two synchronized trajectories.

    Both must yield (t, state-or-coefficients) on the identical time grid;
    integration is trapezoidal on that grid.  Raises GridMismatch on any
    time or shape disagreement, including different lengths."""
    total = 0.0
    prev_t = None
    prev_sq = None
    sentinel = object()
    ita, itb = iter(traj_a), iter(traj_b)
    while True:
        a = next(ita, sentinel)
        b = next(itb, sentinel)
        if a is sentinel and b is sentinel:
            break
        if a is sentinel or b is sentinel:
            raise GridMismatch("trajectories have different lengths")
        ta, ha = a[0], _as_hat(a[1])
        tb, hb = b[0], _as_hat(b[1])
        if abs(ta - tb) > 1e-9 * max(1.0, abs(ta)):
            raise GridMismatch(f"time grids differ: {ta} vs {tb}")
        if ha.shape != hb.shape:
            raise GridMismatch(f"field shapes differ: {ha.shape} vs {hb.shape}")
        sq = L * float(np.sum(np.abs(ha - hb) ** 2))
        if prev_t is not None:
            total += 0.5 * (ta - prev_t) * (sq + prev_sq)
        prev_t, prev_sq = ta, sq
    return math.sqrt(total)


def check_sweep_guards(params, eta, dt):
    """Raise GuardViolation unless dt resolves eta and the carrier is slow."""
    if dt > eta / 16 * (1 + 1e-12):
        raise GuardViolation(
            f"dt = {dt:g} exceeds eta/16 = {eta / 16:g}; refine dt")
    if params.omega0 * eta > OMEGA_GUARD * (1 + 1e-12):
        raise GuardViolation(
            f"omega0*eta = {params.omega0 * eta:g} exceeds {OMEGA_GUARD}; "
            "the carrier must be slow against the modulation")


def run_sweep_point(case, bp, eta, orders, params, N, dt, T, M=DEFAULT_M):
    """Errors of all requested orders against the full wave at one eta.

    One full-wave solve and one co-integrated bundle solve, streamed in
    lockstep; per-order squared errors accumulate trapezoidally."""
    orders = [normalize_order(o) for o in orders]
    check_sweep_guards(params, eta, dt)
    grid = spectral.make_grid(N)
    v0, v1 = packet_init(params, grid)
    problem = full_wave_problem(case, bp, eta, v0, v1, grid, T, dt)
    bundle = make_bundle(case, bp, eta, v0, v1, grid, T, dt, M=M,
                         with_macro2=("macro2" in orders))
    n_steps = round(T / dt)
    acc = {o: 0.0 for o in orders}
    full_it = spectral.iterate(problem)
    bundle_it = bundle.iterate()
    for i in range(n_steps + 1):
        t, state = next(full_it)
        step = next(bundle_it)
        if abs(t - step.t) > 1e-9:
            raise GridMismatch(f"solver grids diverged at step {i}")
        w = 0.5 if i in (0, n_steps) else 1.0
        for o in orders:
            d = bundle.reconstruct_at(step, o) - state.u_hat
            acc[o] += w * grid.L * float(np.sum(np.abs(d) ** 2))
    return {o: math.sqrt(dt * acc[o]) for o in orders}


def estimate_rate(etas, errors):
    """Least-squares slope of log(error) against log(eta)."""
    etas = np.asarray(etas, dtype=float)
    errors = np.asarray(errors, dtype=float)
    if etas.size < 3:
        raise InsufficientPoints(f"need >= 3 points, got {etas.size}")
    if np.any(errors <= 0) or np.any(etas <= 0):
        raise InsufficientPoints("rate fit needs strictly positive data")
    return float(np.polyfit(np.log(etas), np.log(errors), 1)[0])


@dataclass
class ErrorReport:
    """Sweep result: per-(eta, order) errors, fitted slopes, and the flags
    explaining what the fit did (coarsest-eta exclusion, degeneracy)."""

    case: str
    etas: list
    orders: list
    errors: dict            # order -> np.ndarray aligned with etas
    slopes: dict            # order -> float, or None when degenerate
    excluded_coarsest: dict  # order -> bool (dropped from the fit)
    warnings: list = field(default_factory=list)
    degenerate: bool = False

    def to_csv(self, path):
        """`case,eta,order,error,slope_fitted`: one row per (eta, order)
        with the slope field empty, then one slope row per order with
        eta = NA; floats carry 17 significant digits."""
        lines = ["case,eta,order,error,slope_fitted"]
        for o in self.orders:
            errs = self.errors[o]
            for eta, err in zip(self.etas, errs):
                lines.append(f"{self.case},{eta:.17g},{o},{err:.17g},")
        for o in self.orders:
            s = self.slopes[o]
            slope_txt = "" if s is None else f"{s:.17g}"
            lines.append(f"{self.case},NA,{o},,{slope_txt}")
        with open(path, "w") as fh:
            fh.write("\n".join(lines) + "\n")

    def __str__(self):
        out = [f"case: {self.case}"]
        header = "eta".rjust(12) + "".join(str(o).rjust(14) for o in self.orders)
        out.append(header)
        for i, eta in enumerate(self.etas):
            row = f"{eta:12.6g}"
            for o in self.orders:
                row += f"{self.errors[o][i]:14.4e}"
            out.append(row)
        row = "slope".rjust(12)
        for o in self.orders:
            s = self.slopes[o]
            row += ("n/a".rjust(14) if s is None else f"{s:14.3f}")
        out.append(row)
        for o in self.orders:
            if self.excluded_coarsest[o]:
                out.append(f"note: order {o} fit excludes the coarsest eta "
                           "(pre-asymptotic)")
        out.extend("note: " + w for w in self.warnings)
        if self.degenerate:
            out.append("note: degenerate sweep, errors at round-off")
        return "\n".join(out)


def _sweep_task(args):
    return run_sweep_point(*args)


def convergence_study(case, bp, params, eta_list, orders, N, dt, T,
                      workers=None, M=DEFAULT_M):
    """Run the sweep (optionally across a process pool), fit slopes.

    Slope fitting drops the coarsest eta for an order when that point breaks
    error monotonicity (and at least three points remain); the exclusion is
    recorded on the report.  An order whose errors all sit at round-off gets
    slope None; if every order does, the report is flagged degenerate."""
    orders = [normalize_order(o) for o in orders]
    etas = sorted({float(e) for e in eta_list}, reverse=True)
    if not etas:
        raise InsufficientPoints("empty eta list")
    for eta in etas:
        check_sweep_guards(params, eta, dt)

    tasks = [(case, bp, eta, orders, params, N, dt, T, M) for eta in etas]
    if workers is None:
        workers = min(len(etas), os.cpu_count() or 1)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = dict(zip(etas, pool.map(_sweep_task, tasks)))
    else:
        rows = {eta: _sweep_task(t) for eta, t in zip(etas, tasks)}

    errors = {o: np.array([rows[eta][o] for eta in etas]) for o in orders}
    slopes, excluded, warnings = {}, {}, []
    for o in orders:
        errs = errors[o]
        excluded[o] = False
        if np.all(errs < DEGENERATE_FLOOR):
            slopes[o] = None
            continue
        bad = [i for i in range(len(etas) - 1) if errs[i] < errs[i + 1]]
        fit_etas, fit_errs = etas, errs
        if bad and bad[0] == 0 and len(etas) > 3:
            fit_etas, fit_errs = etas[1:], errs[1:]
            excluded[o] = True
            bad = bad[1:]
        if bad:
            warnings.append(
                f"order {o}: error not monotone at eta "
                f"{', '.join(f'{etas[i]:g}' for i in bad)}")
        slopes[o] = estimate_rate(fit_etas, fit_errs)

    return ErrorReport(
        case=case, etas=etas, orders=orders, errors=errors, slopes=slopes,
        excluded_coarsest=excluded, warnings=warnings,
        degenerate=all(slopes[o] is None for o in orders))


# ---------------------------------------------------------------------------
# qualitative diagnostics

def left_energy_fraction(grid, u_hat, dudt_hat, speed):
    """Fraction of (mean-free) energy in the left-moving characteristic.

    Splitting u = f(x - ct) + g(x + ct) mode by mode gives
    g_hat = (u_hat + dudt_hat/(i k c))/2; the k = 0 mode carries no
    direction and is excluded."""
    k = grid.k
    sel = k != 0
    uh, vh = u_hat[sel], dudt_hat[sel]
    g = 0.5 * (uh + vh / (1j * k[sel] * speed))
    f = 0.5 * (uh - vh / (1j * k[sel] * speed))
    num = float(np.sum(np.abs(g) ** 2))
    den = num + float(np.sum(np.abs(f) ** 2))
    return num / den if den > 0 else 0.0


def temporal_reflection_fraction(case, bp, eta, params, N, dt, T, M=DEFAULT_M):
    """Left-moving energy fraction of the full wave at t = T, split at the
    effective speed 1/sqrt(eps_hom).

    The packet starts as a pure right-mover; a modulated coefficient
    back-scatters part of it, a constant one does not."""
    from .cell import eps_hom as _eps_hom
    grid = spectral.make_grid(N)
    v0, v1 = packet_init(params, grid)
    problem = full_wave_problem(case, bp, eta, v0, v1, grid, T, dt)
    state = spectral.solve(problem)
    if case == spectral.ELECTRIC:
        dudt = state.w_hat
    else:
        dudt = state.w_hat / float(bp.eval_eps(state.t / eta))
    speed = 1.0 / math.sqrt(_eps_hom(bp, M))
    return left_energy_fraction(grid, state.u_hat, dudt, speed)
