"""Discrete stochastic convolutions and the factorisation operators J_alpha, J^(alpha-1).

All kernel matrices of a uniform Dirichlet grid are diagonal in the discrete
sine basis, so every operator here is evaluated mode by mode as a causal
convolution in time.
"""
from dataclasses import dataclass
import math

import numpy as np
from joblib import Parallel, delayed
from sklearn.utils.validation import check_array

from ..constants.constants import alpha_range
from ..errors.errors import AdmissibilityError, DomainError, GridError
from ..kernels.heat_kernel import DEFAULT_PARAMS, kernel_matrix, sine_basis, spectral_factors
from ..noise.noise_field import sample_white_noise
from ..solvers.spde_solver import RandomField

TRAPEZOIDAL = "trapezoidal"
RECTANGULAR = "rectangular"


@dataclass(frozen=True)
class FactorizationParams:
    """Exponent and quadrature rule of the factorisation.

    Parameters
    ----------
    alpha : float, optional
        Exponent in (3/(2p), 1/4 - 1/p); defaults to the midpoint of that interval.
    p : float, default=12
        Moment order fixing the admissible interval (must exceed 10).
    rule : {"trapezoidal", "rectangular"}, default="trapezoidal"
        Product-integration rule of J^(alpha-1). The rectangular rule freezes
        the integrand at the left end of every step; the trapezoidal rule
        interpolates it linearly, including the node s = t.
    """
    alpha: float = None
    p: float = 12.0
    rule: str = TRAPEZOIDAL

    def __post_init__(self):
        lo, hi = alpha_range(self.p)
        if self.alpha is None:
            object.__setattr__(self, "alpha", 0.5 * (lo + hi))
        if not lo < self.alpha < hi:
            raise AdmissibilityError("FactorizationParams(): ", "alpha = {} is outside the admissible interval "
                                                                "({}, {}) for p = {}".format(self.alpha, lo, hi, self.p))
        if self.rule not in (TRAPEZOIDAL, RECTANGULAR):
            raise DomainError("FactorizationParams(): ", "unknown rule {!r}".format(self.rule))

    @property
    def prefactor(self):
        return math.sin(math.pi * self.alpha) / math.pi


def j_alpha_weights(alpha, grid):
    """Mean of (s - r)^(-alpha) over the step k steps back: dt^-alpha (k^(1-alpha) - (k-1)^(1-alpha)) / (1-alpha)."""
    k = np.arange(grid.nt + 1, dtype=float)
    weights = np.zeros(grid.nt + 1)
    weights[1:] = grid.dt ** -alpha * (k[1:] ** (1 - alpha) - (k[1:] - 1) ** (1 - alpha)) / (1 - alpha)
    return weights


def j_alpha_minus_one_weights(alpha, grid, rule=TRAPEZOIDAL):
    """Product-integration weights of u^(alpha-1) on the lags u = k dt.

    Returns
    -------
    interior : ndarray, shape (nt + 1,)
        Weight of lag k when k is not the oldest node.
    end : ndarray, shape (nt + 1,)
        Weight of the oldest node (lag n, the value at s = 0) for a target at t_n.
    """
    k = np.arange(grid.nt + 1, dtype=float)
    if rule == RECTANGULAR:
        interior = np.zeros(grid.nt + 1)
        interior[1:] = grid.dt ** alpha * (k[1:] ** alpha - (k[1:] - 1) ** alpha) / alpha
        return interior, interior.copy()
    scale = grid.dt ** alpha / (alpha * (alpha + 1))
    interior = np.empty(grid.nt + 1)
    interior[0] = scale
    interior[1:] = scale * ((k[1:] + 1) ** (alpha + 1) - 2 * k[1:] ** (alpha + 1) + (k[1:] - 1) ** (alpha + 1))
    end = np.zeros(grid.nt + 1)
    end[1:] = scale * ((k[1:] - 1) ** (alpha + 1) - k[1:] ** alpha * (k[1:] - alpha - 1))
    return interior, end


def _field_values(field, grid, expression):
    values = field.values if isinstance(field, RandomField) else field
    if isinstance(field, RandomField):
        grid.check_same(field.grid, expression)
    values = check_array(np.atleast_2d(values), dtype="float64")
    if values.shape == grid.noise_shape:
        values = np.vstack([values, np.zeros((1, grid.nx))])
    if values.shape != grid.field_shape:
        raise GridError(expression + ": ", "field of shape {} does not fit grid {}".format(values.shape, grid))
    return values


def _causal(kernel, coefficients):
    """out[n] = sum_{k <= n} kernel[k] * coefficients[n - k], mode by mode."""
    rows = coefficients.shape[0]
    out = np.empty_like(coefficients)
    for mode in range(coefficients.shape[1]):
        out[:, mode] = np.convolve(kernel[:rows, mode], coefficients[:, mode])[:rows]
    return out


def _noise_integral(sigma_field, W, grid, params, lag_weights, expression):
    grid = W.grid if grid is None else grid
    grid.check_same(W.grid, expression)
    values = _field_values(sigma_field, grid, expression)
    basis = sine_basis(grid.nx)
    # row m of the integrand only reaches targets n > m
    integrand = (values[:grid.nt] * W.increments) @ basis
    kernel = spectral_factors(grid, params)[1:] / grid.dx
    if lag_weights is not None:
        kernel = kernel * lag_weights[1:, None]
    coefficients = np.zeros(grid.field_shape)
    coefficients[1:] = _causal(kernel, integrand)
    return RandomField(grid, coefficients @ basis, W.seed, W.path_index)


def constant_field(grid, c=1.0):
    return RandomField(grid, np.full(grid.field_shape, float(c)))


def convolve_direct(sigma_field, W, grid=None, params=DEFAULT_PARAMS):
    """Z(t_n, x_i) = sum_{m<n} sum_j p_{t_n - t_m}(x_i, x_j) sigma(t_m, x_j) dW(m, j).

    Parameters
    ----------
    sigma_field : RandomField or array-like, shape (nt + 1, nx) or (nt, nx)
        Adapted integrand; row n is only used for targets after t_n.
    W : WhiteNoiseSample
    grid : SpaceTimeGrid, optional

    Returns
    -------
    field : RandomField
        Row 0 is zero.
    """
    return _noise_integral(sigma_field, W, grid, params, None, "convolve_direct()")


def apply_j_alpha(sigma_field, W, params, grid=None, kernel_params=DEFAULT_PARAMS):
    """J_alpha sigma(s_n, y_i) = sum_{m<n} sum_j w_{n-m} p_{s_n - t_m}(y_i, x_j) sigma(t_m, x_j) dW(m, j)
    with w the exact step average of (s - r)^(-alpha)."""
    weights = j_alpha_weights(params.alpha, W.grid if grid is None else grid)
    return _noise_integral(sigma_field, W, grid, kernel_params, weights, "apply_j_alpha()")


def apply_j_alpha_minus_one(f_field, params, grid=None, kernel_params=DEFAULT_PARAMS):
    """J^(alpha-1) f(t_n, x_i) = sin(pi alpha)/pi int_0^t_n (t_n - s)^(alpha-1) sum_j dx p_{t_n - s}(x_i, x_j) f(s, x_j) ds.

    The singular factor is integrated exactly against the piecewise constant
    (rectangular) or piecewise linear (trapezoidal) interpolant of
    s -> P_{t_n - s} f(s) on the time grid, with P_0 the identity.
    """
    if grid is None:
        if not isinstance(f_field, RandomField):
            raise GridError("apply_j_alpha_minus_one(): ", "a grid is required for raw arrays")
        grid = f_field.grid
    values = _field_values(f_field, grid, "apply_j_alpha_minus_one()")
    basis = sine_basis(grid.nx)
    coefficients = values @ basis
    factors = spectral_factors(grid, kernel_params)
    interior, end = j_alpha_minus_one_weights(params.alpha, grid, params.rule)
    out = _causal(factors * interior[:, None], coefficients)
    out[0] = 0.0
    if params.rule == TRAPEZOIDAL:
        out[1:] += (end[1:] - interior[1:])[:, None] * factors[1:] * coefficients[0]
    out *= params.prefactor
    seed, path_index = (f_field.seed, f_field.path_index) if isinstance(f_field, RandomField) else (0, 0)
    return RandomField(grid, out @ basis, seed, path_index)


def factorization_fields(sigma_field, W, params, grid=None, kernel_params=DEFAULT_PARAMS):
    """The direct convolution and its factorised form J^(alpha-1)(J_alpha sigma) on the same noise."""
    direct = convolve_direct(sigma_field, W, grid, kernel_params)
    composed = apply_j_alpha_minus_one(apply_j_alpha(sigma_field, W, params, grid, kernel_params), params,
                                       grid, kernel_params)
    return direct, composed


def factorization_residual(sigma_field, W, params, grid=None, kernel_params=DEFAULT_PARAMS):
    """Sup over the nodes of |convolve_direct - J^(alpha-1)(J_alpha sigma)|."""
    direct, composed = factorization_fields(sigma_field, W, params, grid, kernel_params)
    return float(np.max(np.abs(direct.values - composed.values)))


def _study_path(grid, params, seed, path_index, sigma, kernel_params):
    W = sample_white_noise(grid, seed, path_index)
    direct, composed = factorization_fields(constant_field(grid, sigma), W, params, grid, kernel_params)
    return float(np.max(np.abs(direct.values - composed.values))), float(np.max(np.abs(direct.values)))


def factorization_study(grids, params, n_paths=16, seed=0, sigma=1.0, n_jobs=1, kernel_params=DEFAULT_PARAMS):
    """Residual of the factorisation across grid refinements for a constant integrand.

    Returns
    -------
    rows : list of dict
        One row per grid with keys nt, nx, residual (mean over paths),
        std_error, sup_direct (mean sup of the direct convolution) and relative
        (residual / sup_direct).
    """
    rows = []
    for grid in grids:
        spectral_factors(grid, kernel_params)
        results = Parallel(n_jobs=n_jobs)(delayed(_study_path)(grid, params, seed, k, sigma, kernel_params)
                                          for k in range(n_paths))
        residuals = np.array([r[0] for r in results])
        sups = np.array([r[1] for r in results])
        rows.append({"nt": grid.nt, "nx": grid.nx, "residual": float(residuals.mean()),
                     "std_error": float(residuals.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else 0.0,
                     "sup_direct": float(sups.mean()),
                     "relative": float(residuals.mean() / sups.mean()) if sups.mean() > 0 else 0.0})
    return rows


def discrete_variance(grid, params=DEFAULT_PARAMS):
    """Exact variance of convolve_direct for sigma = 1: sum_{k=1}^{n} sum_j p_{k dt}(x_i, x_j)^2 dt w_j."""
    variance = np.zeros(grid.field_shape)
    measure = grid.cell_measure
    for k in range(1, grid.nt + 1):
        variance[k] = variance[k - 1] + kernel_matrix(k * grid.dt, grid, params) ** 2 @ measure
    return variance


def truncate_sigma(sigma_field, p, lam, grid=None):
    """Truncated integrand sigma(t_n) 1{sum_{m<n} dt max_i |sigma(t_m, x_i)|^p <= lam^p}.

    The indicator at t_n only looks at rows before n, so the truncated field
    stays adapted.
    """
    if grid is None:
        grid = sigma_field.grid
    values = _field_values(sigma_field, grid, "truncate_sigma()")
    if not lam > 0 or not p > 0:
        raise DomainError("truncate_sigma(): ", "lam and p must be positive")
    running = np.concatenate([[0.0], np.cumsum(grid.dt * np.max(np.abs(values[:-1]), axis=1) ** p)])
    keep = running <= lam ** p
    return RandomField(grid, values * keep[:, None])
