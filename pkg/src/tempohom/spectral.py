"""Periodic pseudo-spectral discretization and Gauss-Legendre IRK4 stepping.

Every problem here is linear with a space-independent scalar coefficient
a(t), so each Fourier mode evolves by a small independent linear ODE system
and the two-stage Gauss-Legendre implicit Runge-Kutta stage equations are
solved exactly per mode by direct elimination -- no fixed-point iteration.

Two first-order forms are used (w is the companion variable of the state):

    electric:  a(t) d_tt u = Lu + f   ->  d_t u = w,      d_t w = (Lu + f)/a
    magnetic:  d_t(a(t) d_t u) = Lu + f -> d_t u = w/a(t), d_t w = Lu + f

with L = Delta + beta Delta^2 (symbol -k^2 + beta k^4).  The magnetic
companion is the momentum a(t) d_t u, which makes the initial condition
a(0) d_t u(0) = v1 exact without ever evaluating d_t a.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import GridError, GuardViolation, SingularStageSystem

ELECTRIC = "electric"
MAGNETIC = "magnetic"

# two-stage Gauss-Legendre tableau (order 4)
_SQRT3 = np.sqrt(3.0)
_IRK_C = np.array([0.5 - _SQRT3 / 6.0, 0.5 + _SQRT3 / 6.0])
_IRK_A = np.array([[0.25, 0.25 - _SQRT3 / 6.0],
                   [0.25 + _SQRT3 / 6.0, 0.25]])
_IRK_B = np.array([0.5, 0.5])


@dataclass(frozen=True)
class SpectralGrid:
    N: int
    L: float
    x: np.ndarray
    k: np.ndarray  # wavenumbers 2 pi j / L in FFT layout

    def to_hat(self, u):
        u = np.asarray(u, dtype=float)
        if u.shape != (self.N,):
            raise GridError(f"field shape {u.shape} does not match N={self.N}")
        return np.fft.fft(u) / self.N

    def from_hat(self, u_hat):
        return np.real(np.fft.ifft(u_hat * self.N))

    def norm_l2(self, u_hat):
        """|| u ||_{L^2} from coefficients: L * sum |u_hat|^2 under the 1/N
        forward normalization (so ||1||_{L^2(-1,1)} = sqrt(2))."""
        return float(np.sqrt(self.L * np.sum(np.abs(u_hat) ** 2)))


def make_grid(N, L=2.0):
    if not isinstance(N, (int, np.integer)) or N < 8 or N & (N - 1) != 0:
        raise GridError(f"N must be a power of two >= 8, got {N!r}")
    if not L > 0:
        raise GridError(f"domain length must be positive, got {L!r}")
    x = -L / 2.0 + L * np.arange(N) / N
    k = 2.0 * np.pi * np.fft.fftfreq(N, d=L / N)
    return SpectralGrid(N=int(N), L=float(L), x=x, k=k)


def laplacian(field, grid):
    """Spectral Delta of a physical field (symbol -k^2)."""
    return grid.from_hat(-grid.k ** 2 * grid.to_hat(field))


def bilaplacian(field, grid):
    """Spectral Delta^2 of a physical field (symbol +k^4)."""
    return grid.from_hat(grid.k ** 4 * grid.to_hat(field))


# ---------------------------------------------------------------------------
# coefficients and problems

@dataclass(frozen=True)
class Coefficient:
    """a(t): either a constant or a modulated blueprint eps(t/eta)."""

    value: float = 1.0
    blueprint: object = None
    eta: float = 0.0

    @staticmethod
    def constant(value):
        return Coefficient(value=float(value))

    @staticmethod
    def modulated(blueprint, eta):
        if not eta > 0:
            raise GuardViolation(f"eta must be positive, got {eta}")
        return Coefficient(blueprint=blueprint, eta=float(eta))

    @property
    def is_constant(self):
        return self.blueprint is None

    def __call__(self, t):
        if self.blueprint is None:
            return self.value if np.isscalar(t) else np.full_like(np.asarray(t, float), self.value)
        return self.blueprint.eval_eps(np.asarray(t) / self.eta)


@dataclass(frozen=True)
class CoupledBilaplacian:
    """Source f = gamma * Delta^2 u_src with u_src co-integrated (pair index)."""

    gamma: float
    src_pair: int = 0


@dataclass(frozen=True)
class PairSpec:
    """One (u, w) field pair inside a block system."""

    coefficient: Coefficient
    beta: float = 0.0
    source: CoupledBilaplacian = None


@dataclass(frozen=True)
class WaveProblem:
    """A single wave-type initial value problem on a periodic grid."""

    form: str  # ELECTRIC or MAGNETIC
    coefficient: Coefficient
    grid: SpectralGrid
    v0: np.ndarray  # initial field (physical samples)
    v1: np.ndarray  # initial companion: d_t u (electric) / momentum (magnetic)
    T: float
    dt: float
    beta: float = 0.0

    def __post_init__(self):
        if self.form not in (ELECTRIC, MAGNETIC):
            raise GridError(f"unknown problem form {self.form!r}")
        if not self.coefficient.is_constant:
            if self.dt > self.coefficient.eta / 16.0 * (1.0 + 1e-12):
                raise GuardViolation(
                    f"dt={self.dt} too coarse for eta={self.coefficient.eta}: "
                    "modulated runs require dt <= eta/16")


@dataclass(frozen=True)
class SolverState:
    u_hat: np.ndarray
    w_hat: np.ndarray
    t: float


class BlockWaveSystem:
    """Per-mode linear ODE system for one or more coupled (u, w) pairs.

    State y has shape (N, m) with m = 2 * npairs; columns 2j, 2j+1 hold
    (u_hat, w_hat) of pair j.  The per-mode system matrix A(t) is block
    lower-triangular in the pair couplings (sources reference other pairs),
    and fully constant in time when every coefficient is constant, in which
    case a single one-step matrix is precomputed.
    """

    def __init__(self, form, pairs, grid, dt):
        self.form = form
        self.pairs = tuple(pairs)
        self.grid = grid
        self.dt = float(dt)
        self.m = 2 * len(self.pairs)
        self.constant = all(p.coefficient.is_constant for p in self.pairs)
        self._step_matrix = self._one_step_matrix(0.0) if self.constant else None

    # -- assembly -----------------------------------------------------------

    def _matrices(self, t):
        """A(t) with shape (N, m, m)."""
        N, m = self.grid.N, self.m
        k2 = self.grid.k ** 2
        A = np.zeros((N, m, m))
        for j, pair in enumerate(self.pairs):
            a_t = pair.coefficient(t)
            sym = -k2 + pair.beta * k2 ** 2  # -k^2 + beta k^4
            iu, iw = 2 * j, 2 * j + 1
            if self.form == ELECTRIC:
                A[:, iu, iw] = 1.0
                A[:, iw, iu] = sym / a_t
                if pair.source is not None:
                    A[:, iw, 2 * pair.source.src_pair] += \
                        pair.source.gamma * k2 ** 2 / a_t
            else:
                A[:, iu, iw] = 1.0 / a_t
                A[:, iw, iu] = sym
                if pair.source is not None:
                    A[:, iw, 2 * pair.source.src_pair] += \
                        pair.source.gamma * k2 ** 2
        return A

    def _one_step_matrix(self, t):
        """S with y(t+dt) = S y(t), from the exact 2-stage Gauss solve."""
        dt, m, N = self.dt, self.m, self.grid.N
        A1 = self._matrices(t + _IRK_C[0] * dt)
        A2 = self._matrices(t + _IRK_C[1] * dt) if not self.constant else A1
        eye = np.broadcast_to(np.eye(m), (N, m, m))
        K = np.empty((N, 2 * m, 2 * m))
        K[:, :m, :m] = eye - dt * _IRK_A[0, 0] * A1
        K[:, :m, m:] = -dt * _IRK_A[0, 1] * A2
        K[:, m:, :m] = -dt * _IRK_A[1, 0] * A1
        K[:, m:, m:] = eye - dt * _IRK_A[1, 1] * A2
        rhs = np.concatenate([eye, eye], axis=1)  # (N, 2m, m)
        try:
            Y = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError as exc:
            raise SingularStageSystem(str(exc)) from exc
        S = eye + dt * (_IRK_B[0] * A1 @ Y[:, :m, :] + _IRK_B[1] * A2 @ Y[:, m:, :])
        if not np.all(np.isfinite(S)):
            raise SingularStageSystem("non-finite one-step matrix")
        return S

    # -- stepping -----------------------------------------------------------

    def step(self, y, t):
        S = self._step_matrix if self.constant else self._one_step_matrix(t)
        return np.einsum("nij,nj->ni", S, y)

    def run(self, y0, T):
        """Yield (t, y) at every step from t = 0 to t = T, including t = 0."""
        n = int(round(T / self.dt))
        if abs(n * self.dt - T) > 1e-9 * max(T, 1.0):
            raise GridError(f"T={T} is not an integral multiple of dt={self.dt}")
        y, t = y0, 0.0
        yield t, y
        for i in range(n):
            y = self.step(y, t)
            t = (i + 1) * self.dt
            yield t, y


def _problem_system(problem, dt=None):
    pair = PairSpec(coefficient=problem.coefficient, beta=problem.beta)
    return BlockWaveSystem(problem.form, [pair], problem.grid,
                           problem.dt if dt is None else dt)


def _initial_y(problem):
    y = np.empty((problem.grid.N, 2), dtype=complex)
    y[:, 0] = problem.grid.to_hat(problem.v0)
    y[:, 1] = problem.grid.to_hat(problem.v1)
    return y


def irk4_step(problem, state, dt):
    """Advance a SolverState by one step of size dt."""
    system = _problem_system(problem, dt=dt)
    y = np.stack([state.u_hat, state.w_hat], axis=1)
    y = system.step(y, state.t)
    return SolverState(u_hat=y[:, 0], w_hat=y[:, 1], t=state.t + dt)


def iterate(problem):
    """Generator of (t, SolverState) over the fixed-step integration,
    starting with the initial state at t = 0."""
    system = _problem_system(problem)
    for t, y in system.run(_initial_y(problem), problem.T):
        yield t, SolverState(u_hat=y[:, 0], w_hat=y[:, 1], t=t)


def solve(problem, observer=None):
    """Integrate from 0 to T; the observer receives every (t, state),
    including the initial one.  Returns the final state."""
    state = None
    for t, state in iterate(problem):
        if observer is not None:
            observer(t, state)
    return state


def quadratic_energy(grid, state, eps_const, form):
    """Conserved energy for constant-coefficient, source-free, beta = 0 runs:
    eps ||d_t u||^2 + ||d_x u||^2 (the magnetic companion is the momentum)."""
    grad2 = float(np.sum(grid.k ** 2 * np.abs(state.u_hat) ** 2)) * grid.L
    w2 = float(np.sum(np.abs(state.w_hat) ** 2)) * grid.L
    kinetic = eps_const * w2 if form == ELECTRIC else w2 / eps_const
    return kinetic + grad2


def dump_field(path, grid, u_physical, t):
    """Plain-text field dump: header `# t=<time> N=<N> L=<L>`, then N lines
    `x value`."""
    with open(path, "w") as fh:
        fh.write(f"# t={t:.17g} N={grid.N} L={grid.L:.17g}\n")
        for x, v in zip(grid.x, u_physical):
            fh.write(f"{x:.17g} {v:.17g}\n")
