"""Homogenized and corrector initial-value problems, and reconstruction.

The electric case places the coefficient outside the time derivatives
(a d_tt u = Delta u), the magnetic case inside (d_t(a d_t u) = Delta u);
their corrector structures differ accordingly:

  order 0   u0:    homogenized wave equation, data (v0, v1)
  order 1   ubar1: homogenized equation;
            electric  u1(0) = 0,  d_t u1(0) = -chi0/eps_hom Delta v0, micro = 0
            magnetic  u1(0) = -chi0/eps_hom v1, momentum(0) = 0,
                      micro = chi(tau) d_t u0
  order 2   ubar2: homogenized equation with source eps_cor Delta^2 u0
            electric  u2(0) = -theta0/eps_hom Delta v0,
                      d_t u2(0) = +theta0/eps_hom Delta v1,
                      micro = theta(tau) d_tt u0
            magnetic  u2(0) = +theta0/eps_hom Delta v0,
                      momentum(0) = kappa Delta v1,
                      micro = xi(tau) d_tt u0 + chi(tau) d_t ubar1
            (the source sign is the same in both cases: it is what the
            eta^2-average of the expansion gives, and what makes the
            macro2 equation with beta = eta^2 eps_cor its resummation;
            any other sign caps the order-2 reconstruction at rate 2)

  macro2    ucheck: single fourth-order equation with beta = eta^2 eps_cor
            absorbing the source, and eta-dependent initial data; adding the
            micro parts makes it a third-order approximation of the full wave.

d_tt u0 in micro closures is evaluated as eps_hom^-1 Delta u0 (exact for the
homogenized solution); d_t u0 and d_t ubar1 are read from the solver
companions, never finite-differenced.

All macro components are co-integrated in one constant-coefficient per-mode
block system so the Delta^2 u0 source is consistent at the Gauss stage times.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import spectral
from .blueprint import DEFAULT_M
from .cell import cell_functions, compute_coefficients
from .errors import MissingCoupling, OrderUnavailable
from .spectral import (ELECTRIC, MAGNETIC, BlockWaveSystem, Coefficient,
                       CoupledBilaplacian, PairSpec, SolverState)

#: reconstruction orders: 0/1/2 are micro+macro reconstructions, `macro2` is
#: the single-solve macroscopic approximant plus micro parts, `bare1`/`bare2`
#: are the macro-only sums u0 + eta ubar1 (+ eta^2 ubar2)
ORDERS = (0, 1, 2, "macro2", "bare1", "bare2")


def normalize_order(order):
    if isinstance(order, str) and order.isdigit():
        order = int(order)
    if order not in ORDERS:
        raise OrderUnavailable(f"unknown order {order!r}; valid: {ORDERS}")
    return order


@dataclass(frozen=True)
class BundleStep:
    """Spectral coefficients of every macro component at one solver time.

    du0 / dubar1 are the time derivatives read from the companion variables
    (the momentum divided by eps_hom in the magnetic case).
    """

    t: float
    u0: np.ndarray
    du0: np.ndarray
    ubar1: np.ndarray
    dubar1: np.ndarray
    ubar2: np.ndarray
    ucheck: np.ndarray  # None unless the bundle carries the macro2 solve


class HomogenizedBundle:
    """Co-integrated macro trajectories (u0, ubar1, ubar2[, ucheck]) for one
    (case, blueprint, eta), plus the cell functions for the micro closures."""

    def __init__(self, case, bp, eta, v0, v1, grid, T, dt,
                 M=DEFAULT_M, with_macro2=True):
        if case not in (ELECTRIC, MAGNETIC):
            raise OrderUnavailable(f"unknown case {case!r}")
        self.case = case
        self.eta = float(eta)
        self.grid = grid
        self.T = float(T)
        self.dt = float(dt)
        self.coeffs = compute_coefficients(bp, M)
        self.chi, self.theta, self.xi = cell_functions(bp, M)
        self.with_macro2 = with_macro2

        co = self.coeffs
        eh = co.eps_hom
        const = Coefficient.constant(eh)
        eta = self.eta

        v0h = grid.to_hat(np.asarray(v0, dtype=float))
        v1h = grid.to_hat(np.asarray(v1, dtype=float))
        lap0 = -grid.k ** 2 * v0h
        lap1 = -grid.k ** 2 * v1h

        pairs = [PairSpec(coefficient=const),  # u0
                 PairSpec(coefficient=const)]  # ubar1
        src = CoupledBilaplacian(gamma=co.eps_cor, src_pair=0)
        if case == ELECTRIC:
            init = [(v0h, v1h),
                    (np.zeros_like(v0h), -(co.chi0 / eh) * lap0),
                    (-(co.theta0 / eh) * lap0, +(co.theta0 / eh) * lap1)]
            check_init = (v0h - eta ** 2 * (co.theta0 / eh) * lap0,
                          v1h - eta * (co.chi0 / eh) * lap0
                          + eta ** 2 * (co.theta0 / eh) * lap1)
        else:
            init = [(v0h, v1h),
                    (-(co.chi0 / eh) * v1h, np.zeros_like(v0h)),
                    (+(co.theta0 / eh) * lap0, co.kappa * lap1)]
            check_init = (v0h - eta * (co.chi0 / eh) * v1h
                          + eta ** 2 * (co.theta0 / eh) * lap0,
                          v1h + eta ** 2 * co.kappa * lap1)
        pairs.append(PairSpec(coefficient=const, source=src))  # ubar2
        if with_macro2:
            pairs.append(PairSpec(coefficient=const, beta=eta ** 2 * co.eps_cor))
            init.append(check_init)

        self._system = BlockWaveSystem(case, pairs, grid, dt)
        y0 = np.empty((grid.N, 2 * len(pairs)), dtype=complex)
        for j, (uh, wh) in enumerate(init):
            y0[:, 2 * j] = uh
            y0[:, 2 * j + 1] = wh
        self._y0 = y0

    def _deriv(self, w_hat):
        """d_t u from the companion variable."""
        if self.case == ELECTRIC:
            return w_hat
        return w_hat / self.coeffs.eps_hom

    def iterate(self):
        """Yield a BundleStep at every solver time, starting at t = 0."""
        for t, y in self._system.run(self._y0, self.T):
            yield BundleStep(
                t=t, u0=y[:, 0], du0=self._deriv(y[:, 1]),
                ubar1=y[:, 2], dubar1=self._deriv(y[:, 3]), ubar2=y[:, 4],
                ucheck=y[:, 6] if self.with_macro2 else None)

    # -- micro closures -----------------------------------------------------

    def micro1(self, step):
        """u-tilde-1 coefficients at tau = t/eta (zero for the electric case)."""
        if self.case == ELECTRIC:
            return np.zeros_like(step.u0)
        tau = step.t / self.eta
        return float(self.chi.at_tau(tau)) * step.du0

    def micro2(self, step):
        """u-tilde-2 at tau = t/eta; d_tt u0 evaluated as eps_hom^-1 Delta u0."""
        tau = step.t / self.eta
        ddu0 = (-self.grid.k ** 2 / self.coeffs.eps_hom) * step.u0
        if self.case == ELECTRIC:
            return float(self.theta.at_tau(tau)) * ddu0
        return (float(self.xi.at_tau(tau)) * ddu0
                + float(self.chi.at_tau(tau)) * step.dubar1)

    def reconstruct_at(self, step, order):
        """Spectral coefficients of the order-k approximant at one time."""
        order = normalize_order(order)
        eta = self.eta
        if order == 0:
            return step.u0
        if order == "bare1":
            return step.u0 + eta * step.ubar1
        if order == "bare2":
            return step.u0 + eta * step.ubar1 + eta ** 2 * step.ubar2
        if order == 1:
            return step.u0 + eta * (step.ubar1 + self.micro1(step))
        if order == 2:
            return (step.u0 + eta * (step.ubar1 + self.micro1(step))
                    + eta ** 2 * (step.ubar2 + self.micro2(step)))
        if step.ucheck is None:
            raise OrderUnavailable("bundle was built without the macro2 solve")
        rec = step.ucheck + eta ** 2 * self.micro2(step)
        if self.case == MAGNETIC:
            rec = rec + eta * self.micro1(step)
        return rec


def make_bundle(case, bp, eta, v0, v1, grid, T, dt, M=DEFAULT_M, with_macro2=True):
    return HomogenizedBundle(case, bp, eta, v0, v1, grid, T, dt,
                             M=M, with_macro2=with_macro2)


def reconstruct(bundle, order):
    """Trajectory generator (t, u_hat) of the order-k approximant."""
    order = normalize_order(order)
    if order == "macro2" and not bundle.with_macro2:
        raise OrderUnavailable("bundle was built without the macro2 solve")
    for step in bundle.iterate():
        yield step.t, bundle.reconstruct_at(step, order)


# ---------------------------------------------------------------------------
# standalone solves (one component at a time; the bundle co-integrates these)

def _macro_trajectory(bundle, component):
    for step in bundle.iterate():
        u = getattr(step, component)
        w = {"u0": step.du0, "ubar1": step.dubar1}.get(component)
        yield step.t, SolverState(u_hat=u, w_hat=w, t=step.t)


def solve_effective(case, bp, v0, v1, grid, T, dt, M=DEFAULT_M):
    """Trajectory of the homogenized solution u0 (constant eps_hom solve)."""
    bundle = make_bundle(case, bp, 1.0, v0, v1, grid, T, dt, M=M, with_macro2=False)
    return _macro_trajectory(bundle, "u0")


def solve_corrector1(case, bp, v0, v1, grid, T, dt, M=DEFAULT_M):
    """(trajectory of ubar1, micro closure taking (tau, du0_hat))."""
    bundle = make_bundle(case, bp, 1.0, v0, v1, grid, T, dt, M=M, with_macro2=False)
    chi = bundle.chi

    def micro(tau, du0_hat):
        if case == ELECTRIC:
            return np.zeros_like(du0_hat)
        return float(chi.at_tau(tau)) * du0_hat

    return _macro_trajectory(bundle, "ubar1"), micro


def solve_corrector2(case, bp, v0, v1, grid, T, dt, M=DEFAULT_M, co_integrate=True):
    """(trajectory of ubar2, micro closure taking (tau, u0_hat, dubar1_hat)).

    The Delta^2 u0 source requires u0 inside the same stage system;
    requesting otherwise is an error."""
    if not co_integrate:
        raise MissingCoupling("ubar2 needs u0 co-integrated for its source")
    bundle = make_bundle(case, bp, 1.0, v0, v1, grid, T, dt, M=M, with_macro2=False)
    coeffs, chi, theta, xi = bundle.coeffs, bundle.chi, bundle.theta, bundle.xi

    def micro(tau, u0_hat, dubar1_hat):
        ddu0 = (-grid.k ** 2 / coeffs.eps_hom) * u0_hat
        if case == ELECTRIC:
            return float(theta.at_tau(tau)) * ddu0
        return float(xi.at_tau(tau)) * ddu0 + float(chi.at_tau(tau)) * dubar1_hat

    return _macro_trajectory(bundle, "ubar2"), micro


def solve_macroscopic2(case, bp, eta, v0, v1, grid, T, dt, M=DEFAULT_M):
    """Trajectory of the single-solve macroscopic approximant (no micro parts);
    eta = 0 reduces it to the plain homogenized solve."""
    co = compute_coefficients(bp, M)
    eh = co.eps_hom
    v0 = np.asarray(v0, dtype=float)
    v1 = np.asarray(v1, dtype=float)
    lap0 = spectral.laplacian(v0, grid)
    lap1 = spectral.laplacian(v1, grid)
    if case == ELECTRIC:
        u_init = v0 - eta ** 2 * (co.theta0 / eh) * lap0
        w_init = v1 - eta * (co.chi0 / eh) * lap0 + eta ** 2 * (co.theta0 / eh) * lap1
    else:
        u_init = v0 - eta * (co.chi0 / eh) * v1 + eta ** 2 * (co.theta0 / eh) * lap0
        w_init = v1 + eta ** 2 * co.kappa * lap1
    problem = spectral.WaveProblem(
        form=case, coefficient=Coefficient.constant(eh), grid=grid,
        v0=u_init, v1=w_init, T=T, dt=dt, beta=eta ** 2 * co.eps_cor)
    return spectral.iterate(problem)


def recover_E_from_D(traj, bp, eta):
    """E = D / eps_eta(t), pointwise in time (scalar coefficient, so the
    division acts directly on the spectral coefficients)."""
    for t, item in traj:
        d_hat = item.u_hat if isinstance(item, SolverState) else item
        yield t, d_hat / float(bp.eval_eps(t / eta))


@dataclass(frozen=True)
class ContrastReport:
    """Per-modulation-period relative oscillation of the packet-peak
    amplitude for the D and E fields, and their ratio."""

    osc_D: float
    osc_E: float
    windows_D: np.ndarray
    windows_E: np.ndarray

    @property
    def ratio(self):
        return self.osc_E / self.osc_D


def oscillation_contrast(bp, eta, v0, v1, grid, T, dt):
    """Run the full electric wave (the D field), recover E = D/eps_eta, and
    compare the per-eta-period oscillation of max_x |field| for the two.

    Oscillation per window = (max - min) / mean of the amplitude; the
    reported statistic is the median over complete windows."""
    problem = spectral.WaveProblem(
        form=ELECTRIC, coefficient=Coefficient.modulated(bp, eta), grid=grid,
        v0=np.asarray(v0, float), v1=np.asarray(v1, float), T=T, dt=dt)
    times, amp_D, amp_E = [], [], []
    for t, state in spectral.iterate(problem):
        d_phys = grid.from_hat(state.u_hat)
        times.append(t)
        amp_D.append(float(np.max(np.abs(d_phys))))
        amp_E.append(amp_D[-1] / float(bp.eval_eps(t / eta)))
    times = np.asarray(times)
    windows = np.floor(times / eta - 1e-12).astype(int)
    windows[0] = 0

    def per_window(amp):
        amp = np.asarray(amp)
        osc = []
        for w in range(int(windows.max()) + 1):
            sel = amp[windows == w]
            if sel.size < 4:
                continue
            osc.append((sel.max() - sel.min()) / sel.mean())
        return np.asarray(osc)

    wd, we = per_window(amp_D), per_window(amp_E)
    return ContrastReport(osc_D=float(np.median(wd)), osc_E=float(np.median(we)),
                          windows_D=wd, windows_E=we)
