"""Layer-cake identities and the local property of the stochastic integral."""
import math

import numpy as np
from scipy.integrate import quad
from sklearn.utils.validation import check_array

from .moments import _convolution_path
from .verifier import BaseVerifier, Scenario, sigma_field
from ..convolution.stochastic_convolution import convolve_direct
from ..errors.errors import DomainError, EmptyEnsembleError
from ..noise.noise_field import sample_white_noise
from ..utils.report import VerificationReport

LAYER_CAKE_RTOL = 1e-6
QUAD_OPTIONS = {"epsabs": 0.0, "epsrel": 1e-11, "limit": 400}


def _relative_gap(a, b):
    scale = max(abs(a), abs(b))
    return abs(a - b) / scale if scale > 0 else 0.0


def _check_orders(p, q, expression):
    if not 0 < p < q:
        raise DomainError(expression, "need 0 < p < q, got p = {}, q = {}".format(p, q))


def layer_cake_sides(samples, p, q):
    """Both sides of E X^p = int_0^inf p x^(p-1) P(X > x) dx and of
    int_0^inf x^-q E min{x^q, X} p x^(p-1) dx = q/(q-p) E X^(p/q) under the empirical law.

    The tail integrals are evaluated exactly, interval by interval between
    consecutive order statistics.

    Returns
    -------
    sides : dict
        ``moment``, ``moment_tail``, ``truncated_tail`` and ``fractional_moment``.
    """
    _check_orders(p, q, "layer_cake_sides(): ")
    x = np.sort(check_array(np.atleast_1d(samples).reshape(1, -1), dtype="float64").ravel())
    if np.any(x < 0):
        raise DomainError("layer_cake_sides(): ", "samples must be non-negative")
    n = x.size
    survival = (n - np.arange(n)) / n
    edges = np.concatenate([[0.0], x])
    moment_tail = float(np.sum(survival * np.diff(edges ** p)))
    # on (y_{k-1}, y_k], y = X^(1/q) sorted, E min{x^q, X} = A_k + B_k x^q
    y = np.concatenate([[0.0], x ** (1.0 / q)])
    below = np.concatenate([[0.0], np.cumsum(x)]) / n
    truncated_tail = 0.0
    for k in range(1, n + 1):
        lo, hi = y[k - 1], y[k]
        if hi > lo:
            truncated_tail += survival[k - 1] * (hi ** p - lo ** p)
            if below[k - 1] > 0:
                truncated_tail += below[k - 1] * p / (q - p) * (lo ** (p - q) - hi ** (p - q))
    if below[n] > 0:
        truncated_tail += below[n] * p / (q - p) * y[n] ** (p - q)
    return {"moment": float(np.mean(x ** p)), "moment_tail": moment_tail, "truncated_tail": truncated_tail,
            "fractional_moment": q / (q - p) * float(np.mean(x ** (p / q)))}


def layer_cake_sides_analytic(distribution, p, q):
    """Same four quantities for a frozen non-negative ``scipy.stats`` distribution, by adaptive quadrature."""
    _check_orders(p, q, "layer_cake_sides_analytic(): ")
    lower, upper = distribution.support()
    if lower < 0:
        raise DomainError("layer_cake_sides_analytic(): ", "the distribution must live on [0, inf)")
    median = float(distribution.median())

    def integrate(f, breakpoints, stop=np.inf):
        edges = [0.0] + sorted(b for b in set(breakpoints) if 0.0 < b < stop) + [stop]
        return sum(quad(f, lo, hi, **QUAD_OPTIONS)[0] for lo, hi in zip(edges[:-1], edges[1:]))

    def truncated_mean(level):
        # E min{level, X} = int_0^level P(X > y) dy
        return quad(distribution.sf, 0.0, min(level, upper), **QUAD_OPTIONS)[0]

    moment = distribution.expect(lambda v: v ** p, epsabs=0.0, epsrel=1e-11, limit=400)
    moment_tail = integrate(lambda v: p * v ** (p - 1) * distribution.sf(v), [median], stop=upper)
    roots = [median ** (1.0 / q)] + ([upper ** (1.0 / q)] if math.isfinite(upper) else [])
    truncated_tail = integrate(lambda v: p * v ** (p - 1 - q) * truncated_mean(v ** q) if v > 0 else 0.0, roots)
    fractional = q / (q - p) * distribution.expect(lambda v: v ** (p / q), epsabs=0.0, epsrel=1e-11, limit=400)
    return {"moment": float(moment), "moment_tail": float(moment_tail), "truncated_tail": float(truncated_tail),
            "fractional_moment": float(fractional)}


def _layer_cake_report(sides, p, q, n_samples, source, **kwargs):
    gaps = [_relative_gap(sides["moment"], sides["moment_tail"]),
            _relative_gap(sides["truncated_tail"], sides["fractional_moment"])]
    details = dict(sides, p=p, q=q, source=source, moment_gap=gaps[0], truncated_gap=gaps[1])
    return VerificationReport("layer-cake", LAYER_CAKE_RTOL, max(gaps), 0.0, n_samples,
                              max(gaps) <= LAYER_CAKE_RTOL, details, **kwargs)


def layer_cake_checks(samples, p, q):
    """Check both layer-cake identities on samples (or a frozen scipy.stats distribution) to 1e-6 relative."""
    if hasattr(samples, "sf") and hasattr(samples, "expect"):
        return _layer_cake_report(layer_cake_sides_analytic(samples, p, q), p, q, 0,
                                  "distribution {}".format(samples.dist.name))
    if np.size(samples) == 0:
        raise EmptyEnsembleError("layer_cake_checks(): ", "no samples")
    return _layer_cake_report(layer_cake_sides(samples, p, q), p, q, int(np.size(samples)), "samples")


class LayerCakeVerifier(BaseVerifier):
    """Layer-cake identities on samples, a distribution, or the sup-norms of a scenario's convolution.

    Parameters
    ----------
    p, q : float, default=2 and 4
        Orders with 0 < p < q.
    """
    check_name = "layer-cake"

    def __init__(self, p=2.0, q=4.0, n_jobs=1, batch_size=64, margin=2.0, bound_scale=1.0, quiet=True):
        super().__init__(n_jobs, batch_size, margin, bound_scale, quiet)
        self.p = p
        self.q = q

    def _verify(self, X):
        if isinstance(X, Scenario):
            samples = np.array([r["sup"] for r in self._collect(X, _convolution_path, self.p)])
            report = layer_cake_checks(samples, self.p, self.q)
            report.seed, report.grid, report.scenario_id = int(X.seed), X.grid.as_dict(), X.scenario_id
            report.details["source"] = "sup-norm of the convolution"
            return report
        return layer_cake_checks(X, self.p, self.q)


def _local_property_path(scenario, path_index, threshold):
    grid = scenario.grid
    W = sample_white_noise(grid, scenario.seed, path_index)
    first = W.increments[0] / np.sqrt(grid.cell_measure)
    event = bool(np.max(first) <= threshold)
    sigma = sigma_field(scenario, W)
    # sigma at t_n may only use increments before n; the event is known from t_1 on
    sigma[0] = 0.0
    if event:
        sigma[:] = 0.0
    integral = float(np.sum(np.sum(sigma[:-1] * W.increments, axis=1)))
    convolution = float(np.max(np.abs(convolve_direct(sigma, W).values)))
    return event, integral, convolution


class LocalPropertyVerifier(BaseVerifier):
    """The stochastic integral of a coefficient vanishing on an event is exactly 0 on that event.

    The coefficient is sigma(u(t, x)) 1{t > 0} 1{E^c} with
    E = {max_i dW(0, i) / sd_i <= threshold}, known after the first step.

    Parameters
    ----------
    threshold : float, default=2.0
    """
    check_name = "local-property"

    def __init__(self, threshold=2.0, n_jobs=1, batch_size=64, margin=2.0, bound_scale=1.0, quiet=True):
        super().__init__(n_jobs, batch_size, margin, bound_scale, quiet)
        self.threshold = threshold

    def _verify(self, scenario):
        results = self._collect(scenario, _local_property_path, self.threshold)
        on_event = [max(abs(r[1]), r[2]) for r in results if r[0]]
        off_event = [r for r in results if not r[0]]
        estimate = max(on_event) if on_event else 0.0
        details = {"threshold": self.threshold, "n_event": len(on_event), "n_complement": len(off_event),
                   "complement_nonzero": sum(1 for r in off_event if r[1] != 0.0)}
        return VerificationReport(self.check_name, 0.0, estimate, 0.0, len(results),
                                  bool(on_event) and estimate == 0.0, details, **self._report_kwargs(scenario))


def local_property_check(scenario, threshold=2.0, **kwargs):
    return LocalPropertyVerifier(threshold=threshold, **kwargs).fit(scenario).report()
