"""Reaction-diffusion relaxation approximation of the fast diffusion equation.

The package solves the singular diffusion problem d/dt alpha(z) = lap z with
the power law alpha(s) = |s|^(q-2) s (q > 2) through a two-field relaxation
system, provides the normalized stationary profile and the separable exact
solution it seeds, and ships the experiment drivers that measure relaxation
convergence, residual scaling, and extinction behavior.
"""

from .backend import backend_name, has_compiled
from .constitutive import (PowerLaw, alpha, alpha_inverse, alpha_prime, eta,
                           eta_inverse, lipschitz_on, phi_alpha_inverse,
                           phi_eta_inverse, zeta_inverse)
from .errors import (ConfigurationError, DivergenceError, FdrelaxError,
                     H3AdvisoryWarning, NewtonError, QuadratureError,
                     RootFindError, ShapeError, StepFailureError)
from .grid import (Grid, TimeGrid, apply_laplacian, assemble_laplacian,
                   dump_field_csv, h1_seminorm_sq, l2_spacetime_norm, lq_norm,
                   restrict)
from .stationary import (ExactSolution, StationaryProfile, exact_solution,
                         exact_solution_at, extinction_time, initial_uv,
                         solve_lane_emden, solve_lane_emden_detailed)
from .stepper import (CoupledStepper, NewtonSettings, RunParameters, RunResult,
                      State, linf_ceiling, reaction_residual, run, step,
                      step_fde)
from .experiments import (CaseConfig, ErrorRecord, NormSample, ResidualRecord,
                          SweepCase, SweepConfig, ap_check, case_1d, case_2d,
                          convergence_sweep, error_records, extinction_study,
                          fit_order, log_linear_fit, residual_study)

__version__ = "0.1.0"
