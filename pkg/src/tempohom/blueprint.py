"""1-periodic permittivity blueprints and periodic-function calculus.

The modulation profile eps(tau) is 1-periodic and strictly positive.  All
cell problems and homogenized coefficients are built from iterated
antiderivatives of periodic functions, so this module provides a small
"polynomial + zero-mean periodic Fourier part" representation that is closed
under exact antidifferentiation: the Fourier part integrates termwise
(a_k -> a_k / (2 pi i k)) and the polynomial drift is carried explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import BlueprintInvalid, GridError

#: default number of tau-samples per period; overkill for single-harmonic
#: blueprints, headroom for user-supplied tabulated profiles
DEFAULT_M = 4096

_TWO_PI = 2.0 * np.pi


def _check_grid_size(M):
    if not isinstance(M, (int, np.integer)) or M < 8 or M & (M - 1) != 0:
        raise GridError(f"grid size must be a power of two >= 8, got {M!r}")


class PolyPeriodic:
    """q(tau) = polynomial(tau) + zero-mean 1-periodic trigonometric part.

    The periodic part is stored one-sided: value = Re sum_k a_k e^{2 pi i k tau}
    over positive wavenumbers k, which is automatically zero-mean.
    """

    def __init__(self, poly, wavenumbers=None, coeffs=None):
        self.poly = np.atleast_1d(np.asarray(poly, dtype=float))
        if wavenumbers is None:
            wavenumbers = np.empty(0, dtype=int)
            coeffs = np.empty(0, dtype=complex)
        self.k = np.asarray(wavenumbers, dtype=int)
        self.a = np.asarray(coeffs, dtype=complex)
        assert self.k.shape == self.a.shape
        assert np.all(self.k > 0), "periodic part must be stored one-sided"

    def __call__(self, tau):
        tau = np.asarray(tau, dtype=float)
        val = np.polynomial.polynomial.polyval(tau, self.poly)
        if self.k.size:
            phases = np.exp((2j * np.pi) * np.multiply.outer(tau, self.k))
            val = val + (phases @ self.a).real
        return val

    def antiderivative(self):
        """Exact antiderivative F with F(0) = 0."""
        ppoly = np.concatenate(([0.0], self.poly / np.arange(1, self.poly.size + 1)))
        b = self.a / (2j * np.pi * self.k) if self.k.size else self.a
        ppoly[0] = -b.real.sum()  # so the periodic part + constant vanish at 0
        return PolyPeriodic(ppoly, self.k, b)

    def derivative(self):
        dpoly = self.poly[1:] * np.arange(1, self.poly.size)
        if dpoly.size == 0:
            dpoly = np.zeros(1)
        return PolyPeriodic(dpoly, self.k, self.a * (2j * np.pi * self.k))

    def mean01(self):
        """Integral over one period [0, 1] (periodic part drops out)."""
        return float(np.sum(self.poly / np.arange(1, self.poly.size + 1)))

    def __add__(self, other):
        if np.isscalar(other):
            poly = self.poly.copy()
            poly[0] += other
            return PolyPeriodic(poly, self.k, self.a)
        n = max(self.poly.size, other.poly.size)
        poly = np.zeros(n)
        poly[: self.poly.size] += self.poly
        poly[: other.poly.size] += other.poly
        ks = np.union1d(self.k, other.k)
        a = np.zeros(ks.size, dtype=complex)
        a[np.searchsorted(ks, self.k)] += self.a
        a[np.searchsorted(ks, other.k)] += other.a
        return PolyPeriodic(poly, ks, a)

    __radd__ = __add__

    def __mul__(self, scalar):
        return PolyPeriodic(self.poly * scalar, self.k, self.a * scalar)

    __rmul__ = __mul__

    def __sub__(self, other):
        return self + (other * -1.0)

    def drift_degree(self, tol=1e-12):
        """Highest polynomial degree with a coefficient above tol."""
        idx = np.nonzero(np.abs(self.poly) > tol)[0]
        return int(idx.max()) if idx.size else 0

    def sample(self, M):
        """Values on the uniform grid tau_j = j/M (exact trig evaluation)."""
        _check_grid_size(M)
        if self.k.size and self.k.max() > M // 2:
            raise GridError("grid too coarse for the stored wavenumbers")
        c = np.zeros(M // 2 + 1, dtype=complex)
        for k, ak in zip(self.k, self.a):
            c[k] = ak / 2.0 if k < M // 2 else complex(ak.real)
        per = np.fft.irfft(c * M)
        tau = np.arange(M) / M
        return np.polynomial.polynomial.polyval(tau, self.poly) + per


@dataclass(frozen=True)
class PeriodicProfile:
    """A 1-periodic function held as M uniform samples + its Fourier data.

    fourier holds the one-sided coefficients a_k (k = 1 .. M/2) of the
    zero-mean part; mean is the tau-average.
    """

    samples: np.ndarray
    fourier: np.ndarray
    mean: float

    @property
    def M(self):
        return self.samples.size

    def as_polyperiodic(self, reltol=1e-14):
        scale = max(abs(self.mean), float(np.max(np.abs(self.fourier), initial=0.0)), 1.0)
        keep = np.abs(self.fourier) > reltol * scale
        k = np.nonzero(keep)[0] + 1
        return PolyPeriodic([self.mean], k, self.fourier[keep])

    def __call__(self, tau):
        return self.as_polyperiodic()(tau)


def profile_from_samples(samples):
    samples = np.asarray(samples, dtype=float)
    _check_grid_size(samples.size)
    M = samples.size
    c = np.fft.rfft(samples) / M
    a = 2.0 * c[1:]
    a[-1] = complex(c[-1].real)  # Nyquist mode enters once, as a cosine
    return PeriodicProfile(samples=samples, fourier=a, mean=float(c[0].real))


def antiderivative(p):
    """tau -> int_0^tau p, as mean*tau + zero-mean periodic part + constant.

    Accepts a PeriodicProfile or a PolyPeriodic; repeated application yields
    the nested integrals needed by the coefficient formulas, with the
    polynomial drift tracked exactly.
    """
    if isinstance(p, PeriodicProfile):
        p = p.as_polyperiodic()
    return p.antiderivative()


# ---------------------------------------------------------------------------
# blueprints

_CLOSED_FORM_KINDS = ("constant", "sine_inverse", "cosine_inverse")
_ALL_KINDS = _CLOSED_FORM_KINDS + ("fourier_of_inverse", "tabulated")


@dataclass(frozen=True)
class PermittivityBlueprint:
    """1-periodic, strictly positive modulation profile eps(tau).

    kind is one of: 'constant' (value c), 'sine_inverse'
    (eps = (2 + sin 2 pi tau)^-1), 'cosine_inverse' (eps = (2 + cos 2 pi tau)^-1),
    'fourier_of_inverse' (Fourier coefficients of eps^-1, as {k: c_k}),
    'tabulated' (eps values on a uniform tau-grid).
    """

    kind: str
    value: float = 1.0
    inv_coeffs: tuple = ()  # ((k, c_k), ...) with Hermitian pairs implied
    samples: tuple = field(default=(), repr=False)

    def __post_init__(self):
        if self.kind not in _ALL_KINDS:
            raise BlueprintInvalid(f"unknown blueprint kind {self.kind!r}")
        if self.kind == "constant" and not self.value > 0:
            raise BlueprintInvalid(f"constant blueprint needs c > 0, got {self.value}")
        if self.kind == "tabulated":
            vals = np.asarray(self.samples, dtype=float)
            _check_grid_size(vals.size)
            if not np.all(vals > 0):
                raise BlueprintInvalid("tabulated eps must be strictly positive")
        if self.kind == "fourier_of_inverse":
            # eps^-1 must be real and positive on a check grid
            inv = self._inv_eps_closed(np.arange(512) / 512.0)
            if not np.all(inv > 0):
                raise BlueprintInvalid("eps^-1 series is not strictly positive")

    # -- evaluation ---------------------------------------------------------

    def _inv_eps_closed(self, tau):
        """eps^-1 for the kinds where it is known in closed form."""
        tau = np.asarray(tau, dtype=float)
        if self.kind == "constant":
            return np.full_like(tau, 1.0 / self.value)
        if self.kind == "sine_inverse":
            return 2.0 + np.sin(_TWO_PI * tau)
        if self.kind == "cosine_inverse":
            return 2.0 + np.cos(_TWO_PI * tau)
        if self.kind == "fourier_of_inverse":
            val = np.zeros_like(tau)
            for k, c in self.inv_coeffs:
                if k == 0:
                    val = val + complex(c).real
                else:
                    val = val + 2.0 * (complex(c) * np.exp(_TWO_PI * 1j * k * tau)).real
            return val
        raise BlueprintInvalid(f"eps^-1 has no closed form for kind {self.kind!r}")

    def eval_eps(self, tau):
        """eps(tau mod 1); closed-form kinds analytically, tabulated by
        trigonometric interpolation."""
        tau = np.asarray(tau, dtype=float)
        if self.kind == "tabulated":
            vals = self._tab_interp()(np.mod(tau, 1.0))
        else:
            vals = 1.0 / self._inv_eps_closed(np.mod(tau, 1.0))
        if np.any(vals <= 0):
            raise BlueprintInvalid("eps evaluated non-positive")
        return vals if vals.shape else float(vals)

    def _tab_interp(self):
        interp = getattr(self, "_tab_cache", None)
        if interp is None:
            interp = profile_from_samples(np.asarray(self.samples)).as_polyperiodic()
            object.__setattr__(self, "_tab_cache", interp)
        return interp

    # -- constructors -------------------------------------------------------

    @staticmethod
    def constant(c):
        return PermittivityBlueprint(kind="constant", value=float(c))

    @staticmethod
    def sine_inverse():
        return PermittivityBlueprint(kind="sine_inverse")

    @staticmethod
    def cosine_inverse():
        return PermittivityBlueprint(kind="cosine_inverse")

    @staticmethod
    def fourier_of_inverse(coeffs):
        """coeffs: mapping k -> c_k of eps^-1 = sum c_k e^{2 pi i k tau}.

        Only k >= 0 entries are taken (negative k implied Hermitian); c_0
        must be real.
        """
        items = []
        for k, c in sorted(coeffs.items()):
            if k < 0:
                expected = np.conj(complex(coeffs.get(-k, 0.0)))
                if abs(complex(c) - expected) > 1e-14 * (1 + abs(expected)):
                    raise BlueprintInvalid("eps^-1 coefficients are not Hermitian")
                continue
            if k == 0 and abs(complex(c).imag) > 1e-14:
                raise BlueprintInvalid("mean of eps^-1 must be real")
            items.append((int(k), complex(c)))
        return PermittivityBlueprint(kind="fourier_of_inverse", inv_coeffs=tuple(items))

    @staticmethod
    def tabulated(samples):
        return PermittivityBlueprint(
            kind="tabulated", samples=tuple(float(v) for v in samples))


def eval_eps(bp, tau):
    return bp.eval_eps(tau)


def profile_of_inverse(bp, M=DEFAULT_M):
    """PeriodicProfile of tau -> 1/eps(tau) on the M-point grid."""
    _check_grid_size(M)
    tau = np.arange(M) / M
    if bp.kind == "tabulated":
        inv = 1.0 / bp.eval_eps(tau)
    else:
        inv = bp._inv_eps_closed(tau)
    if np.any(inv <= 0):
        raise BlueprintInvalid("eps^-1 sampled non-positive")
    return profile_from_samples(inv)


def shift_blueprint(bp, s):
    """Blueprint of the phase-shifted profile eps(tau + s)."""
    if bp.kind == "constant":
        return bp
    M = bp.samples and len(bp.samples) or DEFAULT_M
    tau = np.arange(M) / M
    return PermittivityBlueprint.tabulated(bp.eval_eps(tau + s))


def parse_blueprint(spec):
    """Parse `sine_inverse | cosine_inverse | constant:<c> | file:<path>`."""
    spec = spec.strip()
    if spec == "sine_inverse":
        return PermittivityBlueprint.sine_inverse()
    if spec == "cosine_inverse":
        return PermittivityBlueprint.cosine_inverse()
    if spec.startswith("constant:"):
        try:
            c = float(spec.split(":", 1)[1])
        except ValueError as exc:
            raise BlueprintInvalid(f"bad constant blueprint {spec!r}") from exc
        return PermittivityBlueprint.constant(c)
    if spec.startswith("file:"):
        path = Path(spec.split(":", 1)[1])
        try:
            vals = [float(line) for line in path.read_text().split()]
        except (OSError, ValueError) as exc:
            raise BlueprintInvalid(f"cannot read blueprint file {path}: {exc}") from exc
        return PermittivityBlueprint.tabulated(vals)
    raise BlueprintInvalid(f"unknown blueprint spec {spec!r}")
