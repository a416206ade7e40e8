"""Empirical normal concentration of Lipschitz functionals of the solution."""
from dataclasses import dataclass

import cvxpy as cp
import numpy as np
from sklearn.utils.validation import check_array

from .verifier import BaseVerifier
from ..errors.errors import ConfigurationError, DomainError, EmptyEnsembleError, FitError
from ..noise.noise_field import sample_white_noise
from ..solvers.spde_solver import RandomField, solve_mild
from ..utils.report import VerificationReport

SUP_NORM = "sup-norm"
POINT = "point"
MIN_ENSEMBLE = 100
MIN_EXCEEDANCES = 5


def evaluate_functional(functional, field, point=0.5):
    """1-Lipschitz functionals of a field: the node sup-norm or the value at (T, point)."""
    values = field.values if isinstance(field, RandomField) else np.asarray(field, dtype=float)
    if functional == SUP_NORM:
        return float(np.max(np.abs(values)))
    if functional == POINT:
        if not isinstance(field, RandomField):
            raise DomainError("evaluate_functional(): ", "point evaluation needs a RandomField")
        return float(values[-1, int(np.argmin(np.abs(field.grid.nodes - point)))])
    raise ConfigurationError("evaluate_functional(): ", "unknown functional {!r}, expected {!r} or {!r}"
                             .format(functional, SUP_NORM, POINT))


def tail_curve(samples, radii):
    """Empirical median m and tails P(F > m + r) for every radius."""
    samples = check_array(np.atleast_1d(samples).reshape(1, -1), dtype="float64").ravel()
    median = float(np.median(samples))
    radii = np.asarray(radii, dtype=float)
    counts = np.array([np.count_nonzero(samples > median + r) for r in radii])
    return median, counts / samples.size, counts


def fit_gaussian_tail(radii, tails, counts, min_exceedances=MIN_EXCEEDANCES):
    """Least-squares fit of log P(F > m + r) ~ log C - c r^2 with c >= 0.

    Only radii with at least ``min_exceedances`` exceedances enter the fit.
    Returns (C, c, number of radii used).
    """
    usable = np.asarray(counts) >= min_exceedances
    if np.count_nonzero(usable) < 2:
        raise FitError("fit_gaussian_tail(): ", "fewer than two radii with {} exceedances".format(min_exceedances))
    r2 = np.asarray(radii, dtype=float)[usable] ** 2
    y = np.log(np.asarray(tails, dtype=float)[usable])
    log_c = cp.Variable()
    c = cp.Variable(nonneg=True)
    problem = cp.Problem(cp.Minimize(cp.sum_squares(log_c - c * r2 - y)))
    problem.solve()
    if log_c.value is None or c.value is None:
        raise FitError("fit_gaussian_tail(): ", "the least-squares problem ended with status {}".format(problem.status))
    return float(np.exp(log_c.value)), max(float(c.value), 0.0), int(np.count_nonzero(usable))


@dataclass(frozen=True)
class ConcentrationProfile:
    """Median-tail curve of a functional and its Gaussian fit C exp(-c r^2).

    Concentration over all Borel sets is replaced by tails of 1-Lipschitz
    functionals above their median, which is the equivalent formulation.
    """
    functional: str
    radii: np.ndarray
    tails: np.ndarray
    median: float
    C_fit: float
    c_fit: float
    n_fit_radii: int
    n_samples: int


def _default_radii(samples, median, n_radii=12):
    spread = float(np.max(samples) - median)
    return np.linspace(0.0, spread, n_radii + 1)[:-1] if spread > 0 else np.zeros(1)


def concentration_profile(functional, ensemble, radii=None, min_exceedances=MIN_EXCEEDANCES, point=0.5):
    """Tail curve and Gaussian fit of ``functional`` over an ensemble of fields.

    Parameters
    ----------
    functional : {"sup-norm", "point"}
    ensemble : sequence of RandomField
        At least 100 members.
    radii : sequence of float, optional
        Defaults to 12 equally spaced radii between 0 and the largest excess
        over the median.

    Returns
    -------
    profile : ConcentrationProfile

    Raises
    ------
    FitError
        When fewer than two radii have enough exceedances (e.g. all tails empty).
    """
    members = list(ensemble)
    if not members:
        raise EmptyEnsembleError("concentration_profile(): ", "the ensemble is empty")
    if len(members) < MIN_ENSEMBLE:
        raise DomainError("concentration_profile(): ", "at least {} fields are needed, got {}"
                          .format(MIN_ENSEMBLE, len(members)))
    samples = np.array([evaluate_functional(functional, member, point) for member in members])
    return profile_from_samples(functional, samples, radii, min_exceedances)


def profile_from_samples(functional, samples, radii=None, min_exceedances=MIN_EXCEEDANCES):
    samples = np.asarray(samples, dtype=float)
    median = float(np.median(samples))
    radii = _default_radii(samples, median) if radii is None else np.asarray(radii, dtype=float)
    median, tails, counts = tail_curve(samples, radii)
    C_fit, c_fit, used = fit_gaussian_tail(radii, tails, counts, min_exceedances)
    return ConcentrationProfile(functional, radii, tails, median, C_fit, c_fit, used, samples.size)


def _functional_path(scenario, path_index, functional, point):
    W = sample_white_noise(scenario.grid, scenario.seed, path_index)
    u = solve_mild(scenario.initial_values(), scenario.coefficients(), W)
    return evaluate_functional(functional, u, point)


class ConcentrationVerifier(BaseVerifier):
    """Gaussian tail signature c_fit > 0 of a Lipschitz functional of the solution.

    Parameters
    ----------
    functional : {"sup-norm", "point"}, default="sup-norm"
    radii : sequence of float, optional
    point : float, default=0.5
        Space coordinate of the point functional (evaluated at t = T).

    Attributes
    ----------
    profile_ : ConcentrationProfile
    """
    check_name = "concentration"

    def __init__(self, functional=SUP_NORM, radii=None, point=0.5, n_jobs=1, batch_size=64, margin=2.0,
                 bound_scale=1.0, quiet=True):
        super().__init__(n_jobs, batch_size, margin, bound_scale, quiet)
        self.functional = functional
        self.radii = radii
        self.point = point

        self.profile_ = None

    def _verify(self, scenario):
        if int(scenario.n_paths) < MIN_ENSEMBLE:
            raise DomainError("ConcentrationVerifier(): ", "at least {} paths are needed".format(MIN_ENSEMBLE))
        samples = np.array(self._collect(scenario, _functional_path, self.functional, self.point))
        self.profile_ = profile_from_samples(self.functional, samples, self.radii)
        profile = self.profile_
        details = {"functional": self.functional, "median": profile.median, "C_fit": profile.C_fit,
                   "radii": profile.radii, "tails": profile.tails, "n_fit_radii": profile.n_fit_radii,
                   "proxy": "median tails of a 1-Lipschitz functional"}
        return VerificationReport(self.check_name, 0.0, profile.c_fit, 0.0, profile.n_samples, profile.c_fit > 0,
                                  details, **self._report_kwargs(scenario))
