"""Explicit constants of the moment, tail and transportation inequalities.

Every constant is evaluated in log space first; the plain values are
exponentials of the logs and raise ConstantOverflowError (or return ``inf``
for the transportation constant) when they leave the double range.
"""
from dataclasses import dataclass
from functools import lru_cache
import math

import numpy as np
from scipy.optimize import minimize_scalar

from ..errors.errors import AdmissibilityError, ConstantOverflowError, DomainError
from ..kernels.heat_kernel import C2

DELTA_P = 1e-3
ALPHA_MARGIN = 1e-4
Q_STEP = 0.5
Q_LEVELS = 24
EPS_POINTS = 64
LOG_MAX = math.log(np.finfo(float).max)


def _exp_checked(log_value, expression):
    if log_value > LOG_MAX:
        raise ConstantOverflowError(expression, "constant exp({:.6g}) exceeds the double range".format(log_value),
                                    log_value=log_value)
    return math.exp(log_value)


def _check_T(T, expression):
    if not (T > 0 and math.isfinite(T)):
        raise DomainError(expression, "the horizon T must be positive and finite")


def alpha_range(p):
    """Open interval (3 / 2p, 1/4 - 1/p) of admissible factorisation exponents; empty unless p > 10."""
    if not p > 10:
        raise AdmissibilityError("alpha_range(): ", "the interval (3/(2p), 1/4 - 1/p) is empty for p = {}".format(p))
    return 3.0 / (2.0 * p), 0.25 - 1.0 / p


def default_alpha(p):
    lo, hi = alpha_range(p)
    return 0.5 * (lo + hi)


def log_c_components(T, p, alpha):
    """Logs of the two factors C'_{T,p,alpha} and C''_{T,p,alpha} of the moment constant."""
    _check_T(T, "log_c_components(): ")
    lo, hi = alpha_range(p)
    if not lo < alpha < hi:
        raise AdmissibilityError("log_c_components(): ", "alpha = {} is outside ({}, {})".format(alpha, lo, hi))
    log_T = math.log(T)
    log_prime = (p * math.log(abs(math.sin(math.pi * alpha) / math.pi)) + math.log(C2)
                 + (p - 1.0) * math.log((p - 1.0) / (alpha * p - 1.5))
                 + (alpha * p - 0.5) * log_T)
    log_double_prime = (0.5 * p * math.log(4.0 * C2 * p)
                        + 0.5 * (p - 2.0) * math.log((p - 2.0) / (0.5 * p - 2.0 - 2.0 * alpha * p))
                        + (0.25 * p - 1.0 - alpha * p) * log_T)
    return log_prime, log_double_prime


def c_components(T, p, alpha):
    """C'_{T,p,alpha} = |sin(pi alpha)/pi|^p C2 ((p-1)/(alpha p - 3/2))^(p-1) T^(alpha p - 1/2) and
    C''_{T,p,alpha} = (4 C2 p)^(p/2) ((p-2)/(p/2 - 2 - 2 alpha p))^((p-2)/2) T^(p/4 - 1 - alpha p)."""
    log_prime, log_double_prime = log_c_components(T, p, alpha)
    return (_exp_checked(log_prime, "c_components(): "),
            _exp_checked(log_double_prime, "c_components(): "))


def log_c_closed_form(T, p):
    """Log of the closed-form upper bound
    p^(p/2) T^(p/4 - 3/2) (2/pi)^p C2^(p/2 + 1) ((6p - 8)/(p - 10))^(3p/2 - 2)."""
    return (0.5 * p * math.log(p) + (0.25 * p - 1.5) * math.log(T) + p * math.log(2.0 / math.pi)
            + (0.5 * p + 1.0) * math.log(C2) + (1.5 * p - 2.0) * math.log((6.0 * p - 8.0) / (p - 10.0)))


def _check_moment_order(p, expression):
    if not p >= 10.0 + DELTA_P:
        raise AdmissibilityError(expression, "moment order p = {} must be at least 10 + {}".format(p, DELTA_P))


@lru_cache(maxsize=4096)
def _minimise_alpha(T, p):
    lo, hi = alpha_range(p)
    margin = min(ALPHA_MARGIN, 0.25 * (hi - lo))

    def objective(alpha):
        return sum(log_c_components(T, p, alpha))

    result = minimize_scalar(objective, bounds=(lo + margin, hi - margin), method="bounded",
                             options={"xatol": 1e-10})
    return float(result.x), float(result.fun)


def log_c_moment(T, p):
    """Log of C_{T,p} = min over admissible alpha of C'_{T,p,alpha} C''_{T,p,alpha}; returns (log value, alpha*)."""
    _check_T(T, "log_c_moment(): ")
    _check_moment_order(p, "log_c_moment(): ")
    alpha_star, log_value = _minimise_alpha(float(T), float(p))
    return log_value, alpha_star


@dataclass(frozen=True)
class MomentBoundConstants:
    """Moment constant C_{T,p} with its minimising exponent and the closed-form bound it improves on."""
    T: float
    p: float
    alpha_star: float
    c_prime: float
    c_double_prime: float
    c_moment: float
    c_closed_form: float
    log_c_moment: float
    log_c_closed_form: float

    def as_dict(self):
        return dict(self.__dict__)


def c_moment(T, p):
    """Minimise C'_{T,p,alpha} C''_{T,p,alpha} over alpha with a bounded scalar search.

    Parameters
    ----------
    T : float
        Time horizon.
    p : float
        Moment order, at least 10 + 1e-3.

    Returns
    -------
    constants : MomentBoundConstants
    """
    log_value, alpha_star = log_c_moment(T, p)
    log_prime, log_double_prime = log_c_components(T, p, alpha_star)
    log_closed = log_c_closed_form(T, p)
    return MomentBoundConstants(
        T=float(T), p=float(p), alpha_star=alpha_star,
        c_prime=_exp_checked(log_prime, "c_moment(): "),
        c_double_prime=_exp_checked(log_double_prime, "c_moment(): "),
        c_moment=_exp_checked(log_value, "c_moment(): "),
        c_closed_form=_exp_checked(log_closed, "c_moment(): "),
        log_c_moment=log_value, log_c_closed_form=log_closed)


def log_c_small_p(T, p, q, literal_reading=False):
    """Log of C_{T,p,q} = 1 + C q / (q - p).

    C is C_{T,q} by default. ``literal_reading=True`` uses C_{T,p} instead,
    which only exists for p > 10 and therefore fails on the intended range.
    Orders within DELTA_P below 10 are rejected along with p > 10.
    """
    if not 0 < p <= 10.0 - DELTA_P:
        raise DomainError("c_small_p(): ", "p must lie in (0, 10 - {}], got {}".format(DELTA_P, p))
    if not (q > 10 and q > p):
        raise AdmissibilityError("c_small_p(): ", "q must exceed both 10 and p, got q = {}".format(q))
    log_c = log_c_moment(T, p if literal_reading else q)[0]
    return float(np.logaddexp(0.0, log_c + math.log(q / (q - p))))


def c_small_p(T, p, q, literal_reading=False):
    return _exp_checked(log_c_small_p(T, p, q, literal_reading), "c_small_p(): ")


def log_young_constant(p, q, eps, log_c_pq):
    """Log of p ((q - p) / (eps / C_{T,p,q}))^((q - p)/p) q^(-q/p)."""
    return (math.log(p) + (q - p) / p * (math.log(q - p) + log_c_pq - math.log(eps))
            - q / p * math.log(q))


def q_grid(levels=Q_LEVELS, step=Q_STEP):
    return 10.0 + step * 2.0 ** np.arange(levels + 1)


def log_c_small_p_eps(T, p, eps, q_values=None):
    """Log of min over the q grid of C_{T,p,q} times the Young constant; returns (log value, q*).

    The infimum over q > 10 is replaced by the minimum over the finite grid
    10 + 0.5 * 2^k, k = 0..24, which bounds it from above.
    """
    if not (eps > 0 and math.isfinite(eps)):
        raise DomainError("c_small_p_eps(): ", "eps must be positive and finite, got {}".format(eps))
    q_values = q_grid() if q_values is None else q_values
    logs = np.empty(len(q_values))
    for k, q in enumerate(q_values):
        log_c_pq = log_c_small_p(T, p, float(q))
        logs[k] = log_c_pq + log_young_constant(p, float(q), eps, log_c_pq)
    k = int(np.argmin(logs))
    return float(logs[k]), float(q_values[k])


def c_small_p_eps(T, p, eps, q_values=None):
    log_value, q_star = log_c_small_p_eps(T, p, eps, q_values)
    return _exp_checked(log_value, "c_small_p_eps(): "), q_star


def eps_grid(L_sigma, points=EPS_POINTS):
    """Geometric grid strictly inside (0, 1 / (3 L_sigma^2))."""
    upper = 1.0 / (3.0 * L_sigma ** 2)
    return upper * np.geomspace(1e-6, 1.0 - 1e-3, points)


def _log_c_tci_unit(T, L_b, L_sigma):
    # constant for K_sigma = 1
    root = math.sqrt(2.0 * T / math.pi)
    if L_sigma == 0:
        return math.log(3.0 * root) + 3.0 * L_b ** 2 * T * root, None
    best, eps_star = math.inf, None
    for eps in eps_grid(L_sigma):
        shrink = 1.0 - 3.0 * eps * L_sigma ** 2
        log_c_eps = log_c_small_p_eps(T, 2.0, float(eps))[0]
        growth = 3.0 * L_sigma ** 2 * T / shrink
        value = (math.log(3.0 / shrink * root) + 3.0 * L_b ** 2 * T * root / shrink
                 + (math.exp(log_c_eps + math.log(growth)) if log_c_eps + math.log(growth) < LOG_MAX else math.inf))
        if value < best:
            best, eps_star = value, float(eps)
    return best, eps_star


def _check_tci_inputs(T, L_b, L_sigma, K_sigma):
    _check_T(T, "c_tci(): ")
    for label, value in (("L_b", L_b), ("L_sigma", L_sigma), ("K_sigma", K_sigma)):
        if not (value >= 0 and math.isfinite(value)):
            raise DomainError("c_tci(): ", "{} must be non-negative and finite, got {}".format(label, value))


def log_c_tci(T, L_b, L_sigma, K_sigma):
    """Log of the transportation constant C with W_2^2 <= 2 C H; returns (log value, eps*).

    For L_sigma = 0 the value is log(3 sqrt(2T/pi) K^2) + 3 L_b^2 T sqrt(2T/pi).
    """
    _check_tci_inputs(T, L_b, L_sigma, K_sigma)
    if K_sigma == 0:
        return -math.inf, None
    log_unit, eps_star = _log_c_tci_unit(float(T), float(L_b), float(L_sigma))
    return 2.0 * math.log(K_sigma) + log_unit, eps_star


def c_tci(T, L_b, L_sigma, K_sigma):
    """K_sigma^2 times the minimum over the eps grid of
    3/(1 - 3 eps L^2) sqrt(2T/pi) exp(3 L_b^2 T sqrt(2T/pi)/(1 - 3 eps L^2) + 3 C_{T,2,eps} L^2 T/(1 - 3 eps L^2)).

    Returns ``inf`` when the value exceeds the double range, which is the
    case at desk scale for every L_sigma > 0; use :func:`log_c_tci` then.
    """
    _check_tci_inputs(T, L_b, L_sigma, K_sigma)
    if K_sigma == 0:
        return 0.0
    log_unit, _ = _log_c_tci_unit(float(T), float(L_b), float(L_sigma))
    if log_unit > LOG_MAX:
        return math.inf
    return K_sigma ** 2 * math.exp(log_unit)


def constants_table(T, p, q=None, eps=None, L_b=0.0, L_sigma=0.0, K_sigma=1.0, small_p=2.0):
    """All constants for one parameter set, as a list of (name, value, log value) rows.

    ``p`` is the moment order of C_{T,p}; ``small_p`` is the order used by the
    small-moment constants C_{T,small_p,q} and C_{T,small_p,eps}.
    """
    moment = c_moment(T, p)
    rows = [("alpha_star", moment.alpha_star, math.log(moment.alpha_star)),
            ("c_prime", moment.c_prime, math.log(moment.c_prime)),
            ("c_double_prime", moment.c_double_prime, math.log(moment.c_double_prime)),
            ("c_moment", moment.c_moment, moment.log_c_moment),
            ("c_closed_form", moment.c_closed_form, moment.log_c_closed_form)]
    if q is not None:
        log_small = log_c_small_p(T, small_p, q)
        rows.append(("c_small_p", math.exp(log_small) if log_small <= LOG_MAX else math.inf, log_small))
    if eps is not None:
        log_eps, q_star = log_c_small_p_eps(T, small_p, eps)
        rows.append(("c_small_p_eps", math.exp(log_eps) if log_eps <= LOG_MAX else math.inf, log_eps))
        rows.append(("q_star", q_star, math.log(q_star)))
    rows.append(("c_tci", c_tci(T, L_b, L_sigma, K_sigma), log_c_tci(T, L_b, L_sigma, K_sigma)[0]))
    return rows
