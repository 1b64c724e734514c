"""Homogenization pipeline for electromagnetic waves in time-modulated media.

The package solves the 1D wave equation with a rapidly time-periodic
permittivity (full pseudo-spectral reference), derives the effective medium
and its correctors from periodic cell problems, and reproduces the
convergence of the homogenized approximants in the modulation period.
"""

from .blueprint import (DEFAULT_M, PeriodicProfile, PermittivityBlueprint,
                        antiderivative, parse_blueprint, profile_from_samples,
                        profile_of_inverse, shift_blueprint)
from .cell import (CellFunction, EffectiveCoefficients, IdentityReport,
                   cell_functions, chi0, compute_coefficients, eps_cor,
                   eps_hom, kappa, solve_chi, solve_theta, solve_xi,
                   solve_zeta, theta0, verify_identities)
from .errors import (BlueprintInvalid, BoundaryLeak, GridError, GridMismatch,
                     GuardViolation, IllPosedCell, InsufficientPoints,
                     MissingCoupling, OrderUnavailable, PositivityViolation,
                     SingularStageSystem, TempohomError)
from .harness import (ErrorReport, PacketParams, convergence_study,
                      estimate_rate, full_wave_problem, l2t_l2x_error,
                      left_energy_fraction, packet_init, run_sweep_point,
                      temporal_reflection_fraction)
from .homogenize import (ORDERS, HomogenizedBundle, make_bundle,
                         oscillation_contrast, reconstruct, recover_E_from_D,
                         solve_corrector1, solve_corrector2, solve_effective,
                         solve_macroscopic2)
from .spectral import (ELECTRIC, MAGNETIC, Coefficient, SolverState,
                       SpectralGrid, WaveProblem, bilaplacian, dump_field,
                       irk4_step, iterate, laplacian, make_grid,
                       quadratic_energy, solve)
