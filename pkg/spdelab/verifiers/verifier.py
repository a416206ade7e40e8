from dataclasses import dataclass, field
import math
import time

import numpy as np
from joblib import Parallel, delayed
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from ..errors.errors import DomainError, EmptyEnsembleError
from ..kernels.heat_kernel import SpaceTimeGrid
from ..solvers.coefficients import Coefficients, drift_spec, initial_condition
from ..solvers.spde_solver import require_hypotheses, solve_mild


@dataclass(frozen=True)
class Scenario:
    """Everything needed to simulate an ensemble of the equation
    du = (1/2 u'' + b(u)) dt + sigma(u) W(dt, dx) on [0, T] x [0, 1].

    Coefficients, initial condition and drift are registry strings
    (``"bounded-rational(1)"``, ``"dirichlet-sine(1, 1)"``, ``"adapted-tanh(0.5)"``...),
    so a scenario is a plain value that can be echoed into manifests and
    shipped to worker processes.

    Parameters
    ----------
    u0, b, sigma, h : str
        Initial condition, drift coefficient, diffusion coefficient and
        noise drift used by the transport checks.
    grid : SpaceTimeGrid
    n_paths : int
    seed : int
        Master seed; path k uses the stream ``(seed, k)``.
    L_b, K_sigma, L_sigma : float, optional
        Declared constants; the exact values of the closed forms when omitted.
    probe_range : tuple of float
    n_probe : int
    scenario_id : str
    """
    u0: str = "zero"
    b: str = "zero"
    sigma: str = "constant(1)"
    h: str = "zero"
    grid: SpaceTimeGrid = field(default_factory=lambda: SpaceTimeGrid(1.0, 1024, 64))
    n_paths: int = 1000
    seed: int = 0
    L_b: float = None
    K_sigma: float = None
    L_sigma: float = None
    probe_range: tuple = (-10.0, 10.0)
    n_probe: int = 64
    scenario_id: str = "default"

    def __post_init__(self):
        if int(self.n_paths) < 1:
            raise DomainError("Scenario(): ", "n_paths must be positive")

    def coefficients(self):
        return Coefficients.from_names(self.b, self.sigma, self.L_b, self.K_sigma, self.L_sigma)

    def initial_values(self):
        return initial_condition(self.u0, self.grid)

    def drift(self):
        return drift_spec(self.h)

    def validate(self):
        """Check the declared constants on the probe range; raises HypothesisError with the witness."""
        return require_hypotheses(self.coefficients(), self.probe_range, self.n_probe)

    def as_dict(self):
        return {"u0": self.u0, "b": self.b, "sigma": self.sigma, "h": self.h, "grid": self.grid.as_dict(),
                "n_paths": int(self.n_paths), "seed": int(self.seed), "L_b": self.L_b, "K_sigma": self.K_sigma,
                "L_sigma": self.L_sigma, "probe_range": list(self.probe_range), "n_probe": int(self.n_probe),
                "scenario_id": self.scenario_id}


def sigma_field(scenario, W, coeffs=None):
    """Values sigma(u(t_n, x_i)) along the solution driven by ``W``, shape (nt + 1, nx).

    Constant diffusion coefficients skip the solve.
    """
    coeffs = scenario.coefficients() if coeffs is None else coeffs
    grid = scenario.grid
    if coeffs.names[1] == "zero" or coeffs.names[1].startswith("constant"):
        return np.full(grid.field_shape, float(coeffs.sigma(np.zeros(1))[0]))
    u = solve_mild(scenario.initial_values(), coeffs, W, grid)
    return np.asarray(coeffs.sigma(u.values), dtype=float)


def running_integral(values, dt, p):
    """sum_{m<nt} dt max_i |values(t_m, x_i)|^p, the discrete int_0^T sup_y |sigma|^p ds."""
    # summation order matches truncate_sigma
    return float(np.cumsum(dt * np.max(np.abs(values[:-1]), axis=1) ** p)[-1])


def mean_and_error(samples):
    """Sample mean and its standard error (0 for fewer than two samples)."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise EmptyEnsembleError("mean_and_error(): ", "no samples")
    if samples.size < 2:
        return float(samples.mean()), 0.0
    return float(samples.mean()), float(samples.std(ddof=1) / math.sqrt(samples.size))


class BaseVerifier(BaseEstimator):
    """Common machinery of the Monte Carlo checks.

    Parameters
    ----------
    n_jobs : int, default=1
        Number of joblib workers simulating paths.
    batch_size : int, default=64
        Paths dispatched per batch; results are reduced in path order so the
        output never depends on ``n_jobs``.
    margin : float, default=2.0
        Number of standard errors allowed above the bound.
    bound_scale : float, default=1.0
        Multiplies every theoretical bound; tiny values turn a check into a
        falsification control that must fail.
    quiet : bool, default=True
        Switches off the progress lines.

    Attributes
    ----------
    reports_ : list of VerificationReport
    n_paths_ : int
    runtime_ : float
        Wall time of the last :meth:`fit`, in seconds.
    """
    check_name = None

    def __init__(self, n_jobs=1, batch_size=64, margin=2.0, bound_scale=1.0, quiet=True):
        self.n_jobs = n_jobs
        self.batch_size = batch_size
        self.margin = margin
        self.bound_scale = bound_scale
        self.quiet = quiet

        self.reports_ = None
        self.n_paths_ = -1
        self.runtime_ = -1
        self.is_fitted_ = False

    def _log(self, message):
        if not self.quiet:
            print("spdelab verify: {}, {}".format(self.check_name, message))

    def _iter_paths(self, scenario, work, *args):
        """Yield ``work(scenario, k, *args)`` for k = 0..n_paths-1 in path order."""
        n_paths = int(scenario.n_paths)
        if self.batch_size < 1:
            raise DomainError("{}(): ".format(type(self).__name__), "batch_size must be positive")
        n_batches = -(-n_paths // self.batch_size)
        with Parallel(n_jobs=self.n_jobs) as parallel:
            for batch in range(n_batches):
                start = batch * self.batch_size
                stop = min(n_paths, start + self.batch_size)
                self._log("batch {}/{}".format(batch + 1, n_batches))
                for result in parallel(delayed(work)(scenario, k, *args) for k in range(start, stop)):
                    yield result

    def _collect(self, scenario, work, *args):
        return list(self._iter_paths(scenario, work, *args))

    def _log_scale(self):
        if not self.bound_scale > 0:
            raise DomainError("{}(): ".format(type(self).__name__), "bound_scale must be positive")
        return math.log(self.bound_scale)

    def _report_kwargs(self, scenario):
        return {"seed": int(scenario.seed), "grid": scenario.grid, "scenario_id": scenario.scenario_id}

    def _verify(self, X):
        raise NotImplementedError

    def fit(self, X, y=None):
        """Run the check.

        Parameters
        ----------
        X : Scenario
            The scenario to simulate (samples or a distribution for the
            layer-cake check).
        y : None
            Ignored.

        Returns
        -------
        self : object
        """
        start = time.perf_counter()
        reports = self._verify(X)
        self.reports_ = reports if isinstance(reports, list) else [reports]
        self.n_paths_ = self.reports_[0].n_paths
        self.runtime_ = time.perf_counter() - start
        self.is_fitted_ = True
        self._log("done in {:.3f}s, passed={}".format(self.runtime_, all(r.passed for r in self.reports_)))
        return self

    def report(self):
        """The single report of the last fit, or the list when the check produces several."""
        if not self.is_fitted_:
            raise NotFittedError("Call fit method first")
        return self.reports_[0] if len(self.reports_) == 1 else list(self.reports_)

    @property
    def passed_(self):
        if not self.is_fitted_:
            raise NotFittedError("Call fit method first")
        return all(r.passed for r in self.reports_)
