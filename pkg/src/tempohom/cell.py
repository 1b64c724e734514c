"""Cell problems (chi, theta, xi, zeta) and homogenized coefficients.

Everything is computed from explicit antiderivative formulas of eps^-1 on a
uniform M-point tau-grid; the defining periodic ODEs are then checked as
residuals, so the implementation cross-validates itself:

    chi:   d_tau(eps (1 + d_tau chi)) = 0,          int chi = 0
    theta: d_tautau theta = eps_hom eps^-1 - 1,     int theta = 0
    xi:    xi = -theta0 - int_0^tau chi,            int xi = 0
    zeta:  d_tau(eps d_tau zeta) = -d_tau(eps xi) + chi eps_hom, int zeta = 0

Scalar coefficients: eps_hom (harmonic mean), chi0 = chi(0), theta0 =
theta(0), eps_cor = int eps^-1 theta (<= 0), and kappa = int eps^-1
(int_0^tau chi), the combination that enters the second corrector's velocity
initial condition in the momentum form.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .blueprint import (DEFAULT_M, PolyPeriodic, antiderivative,
                        profile_from_samples, profile_of_inverse)
from .errors import IllPosedCell, PositivityViolation

_TWO_PI = 2.0 * np.pi


def _grid_derivative(samples):
    """Spectral d/dtau of samples on the uniform [0,1) grid."""
    M = samples.size
    k = np.fft.rfftfreq(M, d=1.0 / M)  # integer wavenumbers 0..M/2
    return np.fft.irfft(np.fft.rfft(samples) * (2j * np.pi * k))


def _grid_mean(samples):
    return float(np.mean(samples))


@dataclass(frozen=True)
class CellFunction:
    """Zero-mean 1-periodic solution of a cell problem, sampled on a tau-grid."""

    which: str
    values: np.ndarray
    derivative: np.ndarray
    pp: PolyPeriodic

    @property
    def M(self):
        return self.values.size

    def at_tau(self, tau):
        """Trigonometric interpolation at arbitrary tau."""
        return self.pp(np.mod(tau, 1.0))

    def derivative_at(self, tau):
        return self.pp.derivative()(np.mod(tau, 1.0))

    def mean(self):
        return _grid_mean(self.values)


@dataclass(frozen=True)
class EffectiveCoefficients:
    """Scalar constants of a blueprint: harmonic mean, correction, IC constants."""

    eps_hom: float
    eps_cor: float
    chi0: float
    theta0: float
    kappa: float

    @property
    def degenerate(self):
        """True when chi0 vanishes (symmetric blueprints): the first electric
        corrector is identically zero and the effective solution is already a
        second-order approximation."""
        return abs(self.chi0) <= 1e-12 * (1.0 + abs(self.theta0))


def _as_cell(which, pp, M, drift_tol=1e-11):
    """Freeze a PolyPeriodic into a CellFunction, dropping round-off drift."""
    scale = max(1.0, float(np.max(np.abs(pp.a))) if pp.a.size else 0.0)
    assert pp.drift_degree(tol=drift_tol * scale) == 0, \
        f"{which} acquired a polynomial drift"
    periodic = PolyPeriodic([0.0], pp.k, pp.a)  # zero-mean periodic part only
    return CellFunction(which=which, values=periodic.sample(M),
                        derivative=periodic.derivative().sample(M), pp=periodic)


@functools.lru_cache(maxsize=8)
def _workspace(bp, M):
    """All cell functions and coefficient forms for (blueprint, grid)."""
    inv = profile_of_inverse(bp, M)
    inv_pp = inv.as_polyperiodic()
    inv_g = inv.samples
    eps_g = 1.0 / inv_g
    eps_hom = 1.0 / inv.mean

    A1 = antiderivative(inv_pp)
    A2 = antiderivative(A1)
    A3 = antiderivative(A2)

    # chi = chi0 + eps_hom int_0^tau eps^-1 - tau, fixed by zero mean
    q = A1 * eps_hom - PolyPeriodic([0.0, 1.0])
    chi_pp = q - q.mean01()
    chi = _as_cell("chi", chi_pp, M)
    chi0 = float(chi_pp(0.0))
    # quadrature cross-checks of the same constant
    chi0_nested = 0.5 - eps_hom * float(A2(1.0))
    # int_0^1 (1-s) eps^-1 ds = mean/2 - sum Re(a_k / (2 pi i k))
    one_sided = inv.fourier
    ks = np.arange(1, one_sided.size + 1)
    single_integral = inv.mean / 2.0 - float(np.sum((one_sided / (2j * np.pi * ks)).real))
    chi0_single = 0.5 - eps_hom * single_integral

    # theta: d_tau theta = chi (same derivative data), zero mean
    F = antiderivative(chi_pp)  # int_0^tau chi
    theta_pp = F - F.mean01()
    theta = _as_cell("theta", theta_pp, M)
    theta0 = float(theta_pp(0.0))
    theta0_nested = -1.0 / 12.0 - eps_hom * (float(A3(1.0)) - 0.5 * float(A2(1.0)))

    # xi = -theta0 - int_0^tau chi
    xi_pp = (F * -1.0) - theta0
    xi = _as_cell("xi", xi_pp, M)

    # correction coefficient, both forms
    eps_cor_a = _grid_mean(inv_g * theta.values)
    eps_cor_b = -(1.0 / eps_hom) * _grid_mean(theta.derivative ** 2)
    if (eps_cor_a > 1e-12 and eps_cor_b < -1e-12) or \
       (eps_cor_a < -1e-12 and eps_cor_b > 1e-12) or eps_cor_a > 1e-12:
        raise PositivityViolation(
            f"eps_cor forms disagree in sign: {eps_cor_a} vs {eps_cor_b}")

    # kappa = int eps^-1 (int_0^tau chi), and the algebraic cross-check
    F_g = theta.values - theta0  # int_0^tau chi on the grid (F = theta - theta0)
    kappa_a = _grid_mean(inv_g * F_g)
    kappa_b = -theta0 / eps_hom - _grid_mean(inv_g * xi.values)

    # zeta: integrate the compatibility-checked RHS twice
    rhs = -_grid_derivative(eps_g * xi.values) + eps_hom * chi.values
    rhs_mean = _grid_mean(rhs)
    if abs(rhs_mean) > 1e-10 * max(1.0, float(np.max(np.abs(rhs)))):
        raise IllPosedCell(f"zeta RHS mean {rhs_mean} violates compatibility")
    G = antiderivative(profile_from_samples(rhs - rhs_mean).as_polyperiodic())
    G_g = G.sample(M)
    C = -eps_hom * _grid_mean(inv_g * G_g)  # periodicity of zeta
    dzeta_g = inv_g * (G_g + C)
    dzeta_g = dzeta_g - _grid_mean(dzeta_g)
    zeta_pp = antiderivative(profile_from_samples(dzeta_g).as_polyperiodic())
    zeta_pp = zeta_pp - zeta_pp.mean01()
    zeta = _as_cell("zeta", zeta_pp, M)

    coeffs = EffectiveCoefficients(eps_hom=eps_hom, eps_cor=eps_cor_a,
                                   chi0=chi0, theta0=theta0, kappa=kappa_a)
    return {
        "inv": inv, "inv_g": inv_g, "eps_g": eps_g, "coeffs": coeffs,
        "chi": chi, "theta": theta, "xi": xi, "zeta": zeta,
        "chi0_nested": chi0_nested, "chi0_single": chi0_single,
        "theta0_nested": theta0_nested,
        "eps_cor_b": eps_cor_b, "kappa_b": kappa_b, "zeta_rhs": rhs,
    }


# ---------------------------------------------------------------------------
# scalar coefficients

def eps_hom(bp, M=DEFAULT_M):
    """Harmonic mean (int_0^1 eps^-1)^-1."""
    return _workspace(bp, M)["coeffs"].eps_hom


def chi0(bp, M=DEFAULT_M):
    """Constant part of the first cell solution, chi(0)."""
    return _workspace(bp, M)["coeffs"].chi0


def theta0(bp, M=DEFAULT_M):
    """theta(0) = -1/12 - eps_hom (A3(1) - A2(1)/2), A_k iterated integrals
    of eps^-1."""
    return _workspace(bp, M)["coeffs"].theta0


def eps_cor(bp, M=DEFAULT_M):
    """Correction coefficient int_0^1 eps^-1 theta, always <= 0."""
    return _workspace(bp, M)["coeffs"].eps_cor


def kappa(bp, M=DEFAULT_M):
    """int_0^1 eps^-1 (int_0^tau chi); multiplies Delta v1 in the magnetic
    second-order initial momentum.  (Unnamed in the source material.)"""
    return _workspace(bp, M)["coeffs"].kappa


def compute_coefficients(bp, M=DEFAULT_M):
    return _workspace(bp, M)["coeffs"]


# ---------------------------------------------------------------------------
# cell solves

def solve_chi(bp, M=DEFAULT_M):
    return _workspace(bp, M)["chi"]


def solve_theta(bp, M=DEFAULT_M):
    return _workspace(bp, M)["theta"]


def solve_xi(bp, M=DEFAULT_M):
    return _workspace(bp, M)["xi"]


def solve_zeta(bp, M=DEFAULT_M):
    return _workspace(bp, M)["zeta"]


def cell_functions(bp, M=DEFAULT_M):
    """(chi, theta, xi) used by the corrector closures."""
    ws = _workspace(bp, M)
    return ws["chi"], ws["theta"], ws["xi"]


# ---------------------------------------------------------------------------
# identity verification

@dataclass(frozen=True)
class IdentityReport:
    """Named residuals of every cross-identity, plus the degeneracy flag."""

    residuals: dict
    degenerate: bool

    def max_residual(self):
        return max(self.residuals.values())

    def ok(self, tol):
        return self.max_residual() <= tol

    def __str__(self):
        width = max(len(name) for name in self.residuals)
        lines = [f"{name:<{width}}  {value:.3e}"
                 for name, value in self.residuals.items()]
        lines.append(f"{'degenerate':<{width}}  {self.degenerate}")
        return "\n".join(lines)


def verify_identities(bp, M=DEFAULT_M):
    """Residuals for all cross-identities the coefficients must satisfy."""
    ws = _workspace(bp, M)
    co = ws["coeffs"]
    inv_g, eps_g = ws["inv_g"], ws["eps_g"]
    chi, theta, xi, zeta = ws["chi"], ws["theta"], ws["xi"], ws["zeta"]

    sup = lambda v: float(np.max(np.abs(v)))

    flux = eps_g * (1.0 + chi.derivative)
    zeta_lhs = co.eps_hom ** -2 * _grid_mean(eps_g * (xi.values + zeta.derivative))

    residuals = {
        "mean_chi": abs(chi.mean()),
        "mean_theta": abs(theta.mean()),
        "mean_xi": abs(xi.mean()),
        "mean_zeta": abs(zeta.mean()),
        "flux_constancy": sup(flux - co.eps_hom),
        "chi_plus_dxi": sup(chi.values + xi.derivative),
        "xi0_plus_theta0": abs(float(xi.pp(0.0)) + co.theta0),
        "chi0_forms": max(abs(co.chi0 - ws["chi0_nested"]),
                          abs(co.chi0 - ws["chi0_single"])),
        "theta0_forms": abs(co.theta0 - ws["theta0_nested"]),
        "eps_cor_forms": abs(co.eps_cor - ws["eps_cor_b"]),
        "kappa_forms": abs(co.kappa - ws["kappa_b"]),
        "zeta_identity": abs(zeta_lhs + co.eps_cor),
        "ode_chi": sup(_grid_derivative(flux)),
        "ode_theta": sup(_grid_derivative(theta.derivative)
                         - (co.eps_hom * inv_g - 1.0)),
        "ode_xi": sup(_grid_derivative(eps_g * xi.derivative)
                      + _grid_derivative(eps_g * chi.values)),
        "ode_zeta": sup(_grid_derivative(eps_g * zeta.derivative) - ws["zeta_rhs"]),
    }
    return IdentityReport(residuals=residuals, degenerate=co.degenerate)
