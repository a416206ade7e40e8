from .coefficients import Coefficients, DriftSpec, closed_form, drift_spec, initial_condition
from .spde_solver import RandomField, solve_mild, solve_coupled_pair, check_hypotheses, self_convergence
