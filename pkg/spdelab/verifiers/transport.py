"""Coupling upper bound of the Wasserstein distance and the transportation cost inequality."""
import math

import numpy as np

from .verifier import BaseVerifier, mean_and_error
from ..constants.constants import log_c_tci
from ..noise.noise_field import WhiteNoiseSample, girsanov_shift, relative_entropy, sample_white_noise
from ..solvers.spde_solver import solve_coupled_pair
from ..utils.report import VerificationReport


def _coupled_path(scenario, path_index, form):
    """sup |u - v|^2 and int int h^2 for one path simulated under the tilted measure.

    The noise B drawn for the path is the Brownian sheet of the tilted
    measure, so v (driven by B) has the law of the solution and u (driven by
    B + int int h) has the shifted law.
    """
    coeffs = scenario.coefficients()
    B = sample_white_noise(scenario.grid, scenario.seed, path_index)
    h = scenario.drift().build(B)
    W = girsanov_shift(B, -h)
    v, u = solve_coupled_pair(scenario.initial_values(), coeffs, W, h, form=form)
    return (u - v).sup_norm() ** 2, h.square_integral()


class TransportVerifier(BaseVerifier):
    """W_2(nu, mu) <= sqrt(2 C H(nu | mu)) with W_2 replaced by its coupling upper bound.

    W_2^2 is bounded by E sup |u - v|^2 over the coupled pair, H is one half
    of E int int h^2 and C is the transportation constant of
    (T, L_b, L_sigma, K_sigma). The comparison runs in log space since C is
    astronomically large as soon as L_sigma > 0.

    Parameters
    ----------
    form : {"direct", "drift"}, default="direct"
        How the shifted solution of the coupled pair is computed.

    Attributes
    ----------
    w2_upper_ : float
    entropy_ : float
    """
    check_name = "tci"

    def __init__(self, form="direct", n_jobs=1, batch_size=64, margin=2.0, bound_scale=1.0, quiet=True):
        super().__init__(n_jobs, batch_size, margin, bound_scale, quiet)
        self.form = form

        self.w2_upper_ = None
        self.entropy_ = None

    def _verify(self, scenario):
        coeffs = scenario.coefficients()
        spec = scenario.drift()
        results = self._collect(scenario, _coupled_path, self.form)
        squares = np.array([r[0] for r in results])
        mean_square, error_square = mean_and_error(squares)
        self.w2_upper_ = math.sqrt(mean_square)
        std_error = error_square / (2.0 * self.w2_upper_) if self.w2_upper_ > 0 else 0.0
        if spec.adapted:
            self.entropy_, entropy_error = mean_and_error(0.5 * np.array([r[1] for r in results]))
        else:
            self.entropy_ = relative_entropy(spec.build(WhiteNoiseSample.zeros(scenario.grid)))
            entropy_error = 0.0
        log_c, eps_star = log_c_tci(scenario.grid.T, coeffs.L_b, coeffs.L_sigma, coeffs.K_sigma)
        if self.entropy_ > 0 and math.isfinite(log_c):
            log_bound = 0.5 * (math.log(2.0) + log_c + math.log(self.entropy_)) + self._log_scale()
        elif self.entropy_ > 0 and log_c > 0:
            log_bound = math.inf
        else:
            log_bound = -math.inf
        bound = math.exp(log_bound) if log_bound < 709.0 else math.inf
        details = {"entropy": self.entropy_, "entropy_std_error": entropy_error, "log_c_tci": log_c,
                   "eps_star": eps_star, "form": self.form, "drift": spec.name, "coefficients": coeffs.as_dict(),
                   "bound_scale": self.bound_scale, "w2": "coupling upper bound sqrt(E sup |u - v|^2)"}
        return VerificationReport.one_sided(self.check_name, bound, self.w2_upper_, std_error, len(results),
                                            self.margin, log_bound=log_bound, details=details,
                                            **self._report_kwargs(scenario))


def estimate_w2_and_entropy(scenario, **kwargs):
    """Returns (w2_upper, entropy, report)."""
    verifier = TransportVerifier(**kwargs).fit(scenario)
    return verifier.w2_upper_, verifier.entropy_, verifier.report()
