"""Dirichlet heat kernel of the operator 1/2 d^2/dx^2 on [0, 1].

The kernel is evaluated either from its eigenfunction expansion (large times)
or from the method of images (small times); both series converge
super-exponentially in their own regime.
"""
from dataclasses import dataclass, field
from functools import lru_cache
import math

import numpy as np
from numpy.polynomial.legendre import leggauss
from sklearn.utils.validation import check_array

from ..errors.errors import DomainError, GridError, QuadratureError

C2 = 1.0 / math.sqrt(2.0 * math.pi)
QUADRATURE_RTOL = 1e-10


@dataclass(frozen=True)
class KernelParams:
    """Truncation parameters of the two kernel representations.

    Parameters
    ----------
    series_terms : int, default=64
        Number of terms kept in the eigenfunction expansion.
    image_terms : int, default=8
        Reflections kept on each side in the image sum.
    method_switch_time : float, default=0.05
        Times at or above this value use the eigen expansion, below it the image sum.
    """
    series_terms: int = 64
    image_terms: int = 8
    method_switch_time: float = 0.05

    def __post_init__(self):
        if self.series_terms < 1 or self.image_terms < 1:
            raise DomainError("KernelParams(): ", "series_terms and image_terms must be at least 1")
        if not self.method_switch_time > 0:
            raise DomainError("KernelParams(): ", "method_switch_time must be positive")

    def eigen_tail(self, t):
        """Upper bound 2 exp(-N^2 pi^2 t / 2) of the truncated eigen tail at time t."""
        return 2.0 * math.exp(-self.series_terms ** 2 * math.pi ** 2 * t / 2.0)


DEFAULT_PARAMS = KernelParams()


@dataclass(frozen=True)
class SpaceTimeGrid:
    """Uniform discretisation of [0, T] x [0, 1].

    Parameters
    ----------
    T : float
        Time horizon.
    nt : int
        Number of time steps.
    nx : int
        Number of interior space nodes; the boundary nodes 0 and 1 are pinned to zero.

    Attributes
    ----------
    dt : float
        Time step T / nt.
    dx : float
        Space step 1 / (nx + 1).
    """
    T: float
    nt: int
    nx: int
    dt: float = field(init=False, repr=False, compare=False)
    dx: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise GridError("SpaceTimeGrid(): ", "the horizon T must be positive and finite")
        if int(self.nt) != self.nt or int(self.nx) != self.nx or self.nt < 1 or self.nx < 1:
            raise GridError("SpaceTimeGrid(): ", "nt and nx must be positive integers")
        object.__setattr__(self, "nt", int(self.nt))
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "dt", self.T / self.nt)
        object.__setattr__(self, "dx", 1.0 / (self.nx + 1))

    @property
    def times(self):
        return np.arange(self.nt + 1) * self.dt

    @property
    def nodes(self):
        return np.arange(1, self.nx + 1) * self.dx

    @property
    def cell_widths(self):
        """Widths of the noise cells attached to the interior nodes.

        Interior cells are centred on their node and have width dx; the two
        outermost cells are stretched up to the boundary so that the cells tile
        [0, 1] exactly.
        """
        widths = np.full(self.nx, self.dx)
        if self.nx == 1:
            widths[0] = 1.0
        else:
            widths[0] += 0.5 * self.dx
            widths[-1] += 0.5 * self.dx
        return widths

    @property
    def cell_measure(self):
        """Lebesgue measure dt * width of every space-time noise cell, shape (nx,)."""
        return self.dt * self.cell_widths

    @property
    def field_shape(self):
        return self.nt + 1, self.nx

    @property
    def noise_shape(self):
        return self.nt, self.nx

    def as_dict(self):
        return {"T": self.T, "nt": self.nt, "nx": self.nx}

    def check_same(self, other, expression="grid"):
        if (self.T, self.nt, self.nx) != (other.T, other.nt, other.nx):
            raise GridError(expression + ": ", "objects live on different grids {} and {}".format(self, other))


def gaussian_bound(t, x, y):
    """Free-space Gaussian density (2 pi t)^(-1/2) exp(-(x - y)^2 / 2t) dominating the kernel."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    return np.exp(-(x - y) ** 2 / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)


def _check_time(t, expression):
    if not (np.isscalar(t) and math.isfinite(t) and t > 0):
        raise DomainError(expression, "time must be a positive finite scalar, got {}".format(t))


def _check_unit(z, expression):
    z = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(z)) or np.any(z < 0.0) or np.any(z > 1.0):
        raise DomainError(expression, "coordinates must lie in [0, 1]")
    return z


def _eigen_series(t, x, y, n_terms):
    n = np.arange(1, n_terms + 1) * math.pi
    decay = np.exp(-n ** 2 * t / 2.0)
    return 2.0 * np.sum(np.sin(x[..., None] * n) * np.sin(y[..., None] * n) * decay, axis=-1)


def _image_sum(t, x, y, n_images):
    shifts = 2.0 * np.arange(-n_images, n_images + 1)
    direct = x[..., None] - y[..., None] + shifts
    mirror = x[..., None] + y[..., None] + shifts
    norm = 1.0 / math.sqrt(2.0 * math.pi * t)
    return norm * np.sum(np.exp(-direct ** 2 / (2.0 * t)) - np.exp(-mirror ** 2 / (2.0 * t)), axis=-1)


def kernel_value(t, x, y, params=DEFAULT_PARAMS):
    """Dirichlet heat kernel p_t(x, y) of 1/2 d^2/dx^2 on [0, 1].

    Parameters
    ----------
    t : float
        Positive time.
    x, y : float or array-like
        Points of [0, 1]; arrays are broadcast against each other.
    params : KernelParams
        Truncation of the two series.

    Returns
    -------
    value : float or ndarray
        Non-negative density; exactly zero when x or y is on the boundary.
    """
    _check_time(t, "kernel_value(): ")
    x = _check_unit(x, "kernel_value(): ")
    y = _check_unit(y, "kernel_value(): ")
    x, y = np.broadcast_arrays(x, y)
    if t >= params.method_switch_time:
        value = _eigen_series(t, x, y, params.series_terms)
    else:
        value = _image_sum(t, x, y, params.image_terms)
    boundary = (x == 0.0) | (x == 1.0) | (y == 0.0) | (y == 1.0)
    value = np.where(boundary, 0.0, np.maximum(value, 0.0))
    return float(value) if value.ndim == 0 else value


@lru_cache(maxsize=8)
def _legendre_rule(order):
    return leggauss(order)


def unit_interval_quadrature(f, rtol=QUADRATURE_RTOL, order=20, max_level=16):
    """Integrate a vectorised function over [0, 1] with composite Gauss-Legendre.

    The number of panels is doubled until two successive estimates agree to
    ``rtol`` (relative, with an absolute floor of rtol * 1e-6). QuadratureError
    is raised when ``max_level`` doublings do not get there.
    """
    nodes, weights = _legendre_rule(order)
    previous = None
    panels = 4
    for _ in range(max_level):
        edges = np.linspace(0.0, 1.0, panels + 1)
        half = 0.5 * (edges[1:] - edges[:-1])
        mid = 0.5 * (edges[1:] + edges[:-1])
        points = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
        estimate = float(np.sum(np.asarray(f(points)).reshape(panels, order) * weights[None, :] * half[:, None]))
        if previous is not None and abs(estimate - previous) <= rtol * max(abs(estimate), 1e-6):
            return estimate
        gap = abs(estimate - previous) if previous is not None else math.inf
        previous = estimate
        panels *= 2
    raise QuadratureError("unit_interval_quadrature(): ", "no convergence to rtol = {} after {} levels, last change {}"
                          .format(rtol, max_level, gap), estimate=previous)


def kernel_integrals(t, x, params=DEFAULT_PARAMS, rtol=QUADRATURE_RTOL):
    """Mass and squared L2 norm of y -> p_t(x, y).

    Returns
    -------
    mass : float
        Integral of p_t(x, .) over [0, 1]; strictly inside (0, 1) for interior x.
    l2 : float
        Integral of p_t(x, .)^2, equal to p_{2t}(x, x) and below C2 / sqrt(t).
    """
    _check_time(t, "kernel_integrals(): ")
    _check_unit(x, "kernel_integrals(): ")
    mass = unit_interval_quadrature(lambda y: kernel_value(t, x, y, params), rtol)
    l2 = unit_interval_quadrature(lambda y: kernel_value(t, x, y, params) ** 2, rtol)
    return mass, l2


@lru_cache(maxsize=64)
def _kernel_matrix_cached(t, grid, params):
    nodes = grid.nodes
    if t >= params.method_switch_time:
        n = np.arange(1, params.series_terms + 1) * math.pi
        sines = np.sin(nodes[:, None] * n[None, :])
        matrix = 2.0 * (sines * np.exp(-n ** 2 * t / 2.0)) @ sines.T
        matrix = np.maximum(0.5 * (matrix + matrix.T), 0.0)
    else:
        matrix = kernel_value(t, nodes[:, None], nodes[None, :], params)
    matrix.setflags(write=False)
    return matrix


def kernel_matrix(t, grid, params=DEFAULT_PARAMS):
    """Matrix p_t(x_i, x_j) over the interior nodes of ``grid`` (read-only, cached)."""
    _check_time(t, "kernel_matrix(): ")
    return _kernel_matrix_cached(float(t), grid, params)


def kernel_stack(grid, n_lags=None, params=DEFAULT_PARAMS):
    """Kernel matrices for the lags k dt, k = 1..n_lags (all nt lags by default), shape (n_lags, nx, nx)."""
    n_lags = grid.nt if n_lags is None else int(n_lags)
    if not 1 <= n_lags <= grid.nt:
        raise DomainError("kernel_stack(): ", "n_lags must lie in [1, {}], got {}".format(grid.nt, n_lags))
    return np.stack([kernel_matrix(k * grid.dt, grid, params) for k in range(1, n_lags + 1)])


@lru_cache(maxsize=16)
def sine_basis(nx):
    """Orthonormal discrete sine basis; column l samples sqrt(2 dx) sin(l pi x)."""
    j = np.arange(1, nx + 1)
    basis = math.sqrt(2.0 / (nx + 1)) * np.sin(np.pi * np.outer(j, j) / (nx + 1))
    basis.setflags(write=False)
    return basis


@lru_cache(maxsize=8)
def _spectral_factors_cached(grid, params):
    basis = sine_basis(grid.nx)
    factors = np.empty(grid.field_shape)
    factors[0] = 1.0
    for k, matrix in enumerate(kernel_stack(grid, params=params), start=1):
        factors[k] = grid.dx * np.einsum("il,il->l", basis, matrix @ basis)
    factors.setflags(write=False)
    return factors


def spectral_factors(grid, params=DEFAULT_PARAMS):
    """Eigenvalues of dx * p_{k dt}(x_i, x_j) in the discrete sine basis, for k = 0..nt.

    Every kernel matrix on a uniform Dirichlet grid is diagonal in the sine
    basis, so ``dx * kernel_matrix(k dt) == basis @ diag(factors[k]) @ basis.T``.
    Row 0 is the identity (factor 1 for every mode).
    """
    return _spectral_factors_cached(grid, params)


def apply_semigroup(u0, t, grid, params=DEFAULT_PARAMS):
    """Discrete heat semigroup (P_t u0)(x_i) = sum_j dx p_t(x_i, x_j) u0(x_j).

    Parameters
    ----------
    u0 : array-like, shape (nx,)
        Values on the interior nodes (the boundary values are zero).
    t : float
        Non-negative time; t = 0 returns a copy of ``u0``.
    grid : SpaceTimeGrid

    Returns
    -------
    row : ndarray, shape (nx,)
    """
    u0 = check_array(np.atleast_1d(u0), ensure_2d=False, dtype="float64")
    if u0.ndim != 1 or u0.shape[0] != grid.nx:
        raise GridError("apply_semigroup(): ", "expected {} node values, got shape {}".format(grid.nx, u0.shape))
    if t == 0:
        return u0.copy()
    _check_time(t, "apply_semigroup(): ")
    return grid.dx * (kernel_matrix(t, grid, params) @ u0)
