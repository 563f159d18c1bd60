"""Blow-up solutions of -u'' - u'/r = lambda h(u) e^(u^p) on the unit disc.

Submodules
----------
nonlinearity     f(t) = h(t) e^(t^p) in log space
recurrence       the sequences (delta_k, a_k) that label the bubbles
profiles         Liouville limit profiles and envelope curves
radial_solver    log-radius shooting with Green-identity accumulators
bubble_analysis  bubbles, oscillation and intersection counts
bifurcation      singular solution and the diagram lambda(mu)
"""
from .errors import (
    BubbleTowerError,
    ConvergenceError,
    DomainError,
    NoBubblesError,
    NonMonotoneError,
    NoZeroError,
    RangeError,
    StepLimitError,
)
from .nonlinearity import LogValue, NonlinearitySpec, eval_F, eval_log_f, eval_log_f_prime, check_H1, h4, power_exp, unit_h
from .recurrence import beta_k, compute_hat_recurrence, compute_recurrence, limit_convergence_report
from .profiles import UBeta, VL, Tabulated, eval_curve, eval_profile, phi_of_profile, profile_mass, profile_residual
from .radial_solver import (
    SolverOptions,
    gelfand_oracle,
    identity_residuals,
    integrate_radial,
    pohozaev_check,
    pohozaev_residual,
    shoot_first_zero,
    to_unit_disc,
)
from .bubble_analysis import compute_phi_psi, count_intersections, detect_bubbles, oscillation_report
from .bifurcation import build_singular_solution, count_lambda_crossings, kaplan_check, trace_diagram

__version__ = "0.1.0"
