"""Error taxonomy shared by all modules."""


class TempohomError(Exception):
    """Base class for all package errors."""


class BlueprintInvalid(TempohomError):
    """Modulation profile is not strictly positive / not well-formed."""


class GridError(TempohomError):
    """Invalid grid size, shape mismatch, or inconsistent discretization."""


class IllPosedCell(TempohomError):
    """Cell-problem right-hand side violates the zero-mean compatibility."""


class PositivityViolation(TempohomError):
    """A sign-definite coefficient came out with the wrong sign."""


class SingularStageSystem(TempohomError):
    """Per-mode implicit stage system is numerically singular."""


class MissingCoupling(TempohomError):
    """A corrector solve was requested without its co-integrated source."""


class OrderUnavailable(TempohomError):
    """Reconstruction order requested beyond the solved components."""


class GridMismatch(TempohomError):
    """Two trajectories do not share (grid, dt, T)."""


class InsufficientPoints(TempohomError):
    """Too few data points for a least-squares rate fit."""


class GuardViolation(TempohomError):
    """A resolution or scale-separation guard failed (dt vs eta, omega0 vs eta)."""


class BoundaryLeak(TempohomError):
    """Initial data is not negligible at the artificial domain boundary."""
