"""Exit transforms of spectrally negative Levy processes weighted by drawdown occupation time."""
from .errors import ConfigurationError, DomainError, NumericalError
from .exit import (ExitLaplaceReport, GerberShiu, HFunction, atom_at_zero, classical_sy_resolvent,
                   closure_identity, down_exit_laplace, exit_grid, exit_laplace, gerber_shiu_density,
                   h_function, occupation_potential_density, shifted_exit_laplace, up_exit_laplace)
from .mc import ExitKind, McEstimate, PathOutcome, estimate_exit_laplace, simulate_brownian_euler, simulate_cl_exact
from .models import BrownianDrift, CramerLundbergExp, laplace_exponent, model_from_dict, phi, quadratic_roots
from .omega import OmegaScaleGrid, reflected_weight_check, solve_omega_scale
from .scale import ScaleEval, eval_W, eval_W_prime, eval_Z, make_scale_eval
from .steps import alternative_up_exit, one_step_closed_form, step_scale_recursion, two_step_family
from .weights import Constant, GeneralStep, OneStep, WeightFunction, weight_from_dict

__all__ = [name for name in dir() if not name.startswith("_")]
