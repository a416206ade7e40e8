"""Moment and tail inequalities for the stochastic convolution."""
import math

import numpy as np
from sklearn.utils.validation import assert_all_finite

from .verifier import BaseVerifier, mean_and_error, running_integral, sigma_field
from ..constants.constants import DELTA_P, log_c_moment, log_c_small_p, log_c_small_p_eps
from ..convolution.stochastic_convolution import convolve_direct, truncate_sigma
from ..errors.errors import DomainError, EmptyEnsembleError
from ..noise.noise_field import sample_white_noise
from ..solvers.spde_solver import RandomField
from ..utils.report import VerificationReport


def _safe_log(value):
    return math.log(value) if value > 0 else -math.inf


def sup_norm_moment(ensemble, p):
    """Mean over paths of (max over the grid nodes of |field|)^p and its standard error.

    Parameters
    ----------
    ensemble : sequence of RandomField or array-like
    p : float
        Positive moment order.

    Returns
    -------
    estimate : float
    std_error : float
    """
    if not p > 0:
        raise DomainError("sup_norm_moment(): ", "p must be positive, got {}".format(p))
    members = list(ensemble)
    if not members:
        raise EmptyEnsembleError("sup_norm_moment(): ", "the ensemble is empty")
    grid = members[0].grid if isinstance(members[0], RandomField) else None
    sups = np.empty(len(members))
    for k, member in enumerate(members):
        if isinstance(member, RandomField):
            grid.check_same(member.grid, "sup_norm_moment()")
            values = member.values
        else:
            values = np.asarray(member, dtype=float)
        assert_all_finite(values)
        sups[k] = np.max(np.abs(values))
    return mean_and_error(sups ** p)


def _convolution_path(scenario, path_index, p, small_q=None, keep_field=False):
    """Per-path ingredients: sup |Z|, |sigma|^p on the nodes, the running integrals and sup |sigma|."""
    W = sample_white_noise(scenario.grid, scenario.seed, path_index)
    sigma = sigma_field(scenario, W)
    Z = convolve_direct(sigma, W)
    dt = scenario.grid.dt
    return {"sup": float(np.max(np.abs(Z.values))),
            "sigma_power": np.abs(sigma[:-1]) ** p if keep_field else None,
            "integral": running_integral(sigma, dt, p),
            "integral_q": running_integral(sigma, dt, small_q) if small_q is not None else None,
            "sup_sigma": float(np.max(np.abs(sigma[:-1])))}


class MomentBoundVerifier(BaseVerifier):
    """E sup |Z|^p <= C_{T,p} int_0^T sup_y E|sigma(s, y)|^p ds for the convolution Z of sigma(u).

    Parameters
    ----------
    p : float, default=12
        Moment order, above 10.
    n_jobs, batch_size, margin, bound_scale, quiet
        See :class:`BaseVerifier`.
    """
    check_name = "moment"

    def __init__(self, p=12.0, n_jobs=1, batch_size=64, margin=2.0, bound_scale=1.0, quiet=True):
        super().__init__(n_jobs, batch_size, margin, bound_scale, quiet)
        self.p = p

    def _verify(self, scenario):
        log_c, alpha_star = log_c_moment(scenario.grid.T, self.p)
        sups = []
        sigma_mean = np.zeros(scenario.grid.noise_shape)
        for result in self._iter_paths(scenario, _convolution_path, self.p, None, True):
            sups.append(result["sup"])
            sigma_mean += result["sigma_power"]
        sigma_mean /= len(sups)
        estimate, std_error = mean_and_error(np.array(sups) ** self.p)
        integral = float(np.sum(scenario.grid.dt * np.max(sigma_mean, axis=1)))
        log_bound = log_c + _safe_log(integral) + self._log_scale()
        bound = math.exp(log_bound) if log_bound < 709.0 else math.inf
        return VerificationReport.one_sided(
            self.check_name, bound, estimate, std_error, len(sups), self.margin, log_bound=log_bound,
            details={"p": self.p, "alpha_star": alpha_star, "log_c_moment": log_c, "sigma_integral": integral,
                     "bound_scale": self.bound_scale},
            **self._report_kwargs(scenario))


def _tail_path(scenario, path_index, p, lambdas, truncation):
    W = sample_white_noise(scenario.grid, scenario.seed, path_index)
    sigma = sigma_field(scenario, W)
    Z = convolve_direct(sigma, W).values
    integral = running_integral(sigma, scenario.grid.dt, p)
    violations = []
    binding = []
    if truncation:
        for lam in lambdas:
            truncated = convolve_direct(truncate_sigma(sigma, p, lam, scenario.grid), W).values
            binds = integral > lam ** p
            binding.append(binds)
            # off the truncation event both integrals must agree exactly
            violations.append(not binds and not np.array_equal(truncated, Z))
    return float(np.max(np.abs(Z))), integral, binding, violations


class TailBoundVerifier(BaseVerifier):
    """P(sup |Z| > lam) <= P(S > lam^p) + C_{T,p} lam^-p E min{lam^p, S}, S = int_0^T sup_y |sigma|^p ds.

    With ``truncation`` every path is also integrated against the truncated
    coefficient sigma 1{int_0^s sup_y |sigma|^p <= lam^p}; on paths where the
    truncation never fires both integrals must coincide, and the number of
    disagreements is reported as ``local_property_violations``.

    Parameters
    ----------
    p : float, default=12
    lambdas : sequence of float, default=(0.5, 1.0, 2.0)
    truncation : bool, default=True
    """
    check_name = "tail"

    def __init__(self, p=12.0, lambdas=(0.5, 1.0, 2.0), truncation=True, n_jobs=1, batch_size=64, margin=2.0,
                 bound_scale=1.0, quiet=True):
        super().__init__(n_jobs, batch_size, margin, bound_scale, quiet)
        self.p = p
        self.lambdas = lambdas
        self.truncation = truncation

    def _verify(self, scenario):
        lambdas = [float(lam) for lam in self.lambdas]
        if not lambdas:
            raise DomainError("TailBoundVerifier(): ", "at least one level lambda is required")
        if min(lambdas) <= 0:
            raise DomainError("TailBoundVerifier(): ", "levels must be positive")
        log_c, _ = log_c_moment(scenario.grid.T, self.p)
        results = self._collect(scenario, _tail_path, self.p, lambdas, self.truncation)
        sups = np.array([r[0] for r in results])
        integrals = np.array([r[1] for r in results])
        n = len(results)
        reports = []
        for j, lam in enumerate(lambdas):
            exceed = (sups > lam).astype(float)
            estimate = float(exceed.mean())
            std_error = math.sqrt(estimate * (1.0 - estimate) / n)
            level = lam ** self.p
            probability = float(np.mean(integrals > level))
            truncated_mean = float(np.mean(np.minimum(level, integrals)))
            log_bound = np.logaddexp(_safe_log(probability),
                                     log_c - self.p * math.log(lam) + _safe_log(truncated_mean))
            log_bound = float(log_bound) + self._log_scale()
            bound = math.exp(log_bound) if log_bound < 709.0 else math.inf
            details = {"lambda": lam, "p": self.p, "P_integral_exceeds": probability,
                       "mean_truncated_integral": truncated_mean, "bound_scale": self.bound_scale}
            if self.truncation:
                details["truncation_binding_paths"] = int(sum(r[2][j] for r in results))
                details["local_property_violations"] = int(sum(r[3][j] for r in results))
            report = VerificationReport.one_sided("{}(lambda={:g})".format(self.check_name, lam), bound, estimate,
                                                  std_error, n, self.margin, log_bound=log_bound, details=details,
                                                  **self._report_kwargs(scenario))
            if self.truncation and details["local_property_violations"] > 0:
                report.passed = False
            reports.append(report)
        return reports


class SmallMomentVerifier(BaseVerifier):
    """Moment bounds of order p <= 10.

    Exactly one of ``q`` and ``eps`` selects the inequality:

    - ``q``: E sup |Z|^p <= C_{T,p,q} E[(int_0^T sup_y |sigma|^q ds)^(p/q)];
    - ``eps``: E sup |Z|^p <= eps E[sup |sigma|^p] + C_{T,p,eps} E int_0^T sup_y |sigma|^p ds.

    Parameters
    ----------
    p : float, default=2
    q : float, optional
    eps : float, optional
    literal_reading : bool, default=False
        Use C_{T,p} instead of C_{T,q} inside C_{T,p,q}.
    """
    check_name = "small-p"

    def __init__(self, p=2.0, q=None, eps=None, literal_reading=False, n_jobs=1, batch_size=64, margin=2.0,
                 bound_scale=1.0, quiet=True):
        super().__init__(n_jobs, batch_size, margin, bound_scale, quiet)
        self.p = p
        self.q = q
        self.eps = eps
        self.literal_reading = literal_reading

    def _verify(self, scenario):
        if (self.q is None) == (self.eps is None):
            raise DomainError("SmallMomentVerifier(): ", "exactly one of q and eps must be given")
        if not 0 < self.p <= 10.0 - DELTA_P:
            raise DomainError("SmallMomentVerifier(): ", "p must lie in (0, 10 - {}], got {}".format(DELTA_P, self.p))
        T = scenario.grid.T
        if self.q is not None:
            log_c = log_c_small_p(T, self.p, self.q, self.literal_reading)
        else:
            if not self.eps > 0:
                raise DomainError("SmallMomentVerifier(): ", "eps must be positive, got {}".format(self.eps))
            log_c, q_star = log_c_small_p_eps(T, self.p, self.eps)
        results = self._collect(scenario, _convolution_path, self.p, self.q)
        estimate, std_error = mean_and_error(np.array([r["sup"] for r in results]) ** self.p)
        details = {"p": self.p, "log_constant": log_c, "bound_scale": self.bound_scale}
        if self.q is not None:
            rhs = float(np.mean([r["integral_q"] ** (self.p / self.q) for r in results]))
            log_bound = log_c + _safe_log(rhs)
            details.update({"mode": "q", "q": self.q, "mean_integral_power": rhs})
            name = "small-p-q"
        else:
            sup_term = float(np.mean([r["sup_sigma"] ** self.p for r in results]))
            integral = float(np.mean([r["integral"] for r in results]))
            log_bound = float(np.logaddexp(_safe_log(self.eps * sup_term), log_c + _safe_log(integral)))
            details.update({"mode": "eps", "eps": self.eps, "q_star": q_star, "mean_sup_sigma_power": sup_term,
                            "mean_integral": integral})
            name = "small-p-eps"
        log_bound += self._log_scale()
        bound = math.exp(log_bound) if log_bound < 709.0 else math.inf
        return VerificationReport.one_sided(name, bound, estimate, std_error, len(results), self.margin,
                                            log_bound=log_bound, details=details, **self._report_kwargs(scenario))


def verify_moment_bound(scenario, p=12.0, **kwargs):
    return MomentBoundVerifier(p=p, **kwargs).fit(scenario).report()


def verify_tail_bound(scenario, p=12.0, lambdas=(0.5, 1.0, 2.0), **kwargs):
    """One report per level lambda."""
    return list(TailBoundVerifier(p=p, lambdas=lambdas, **kwargs).fit(scenario).reports_)


def verify_small_p(scenario, p=2.0, q=None, eps=None, **kwargs):
    return SmallMomentVerifier(p=p, q=q, eps=eps, **kwargs).fit(scenario).report()
