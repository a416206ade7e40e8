"""Registries of named closed forms for the coefficients, initial conditions and drifts.

Forms are addressed by strings such as ``"affine(2, 1)"`` or ``"bounded-rational(1)"``;
hyphens and underscores are interchangeable and arguments are floats.
"""
import math
import re

import numpy as np

from ..errors.errors import ConfigurationError, DomainError
from ..noise.noise_field import DriftField

_FORM = re.compile(r"^\s*([A-Za-z][A-Za-z0-9_\-]*)\s*(?:\((.*)\))?\s*$")


class ClosedForm:
    """A named scalar function with its exact bound, Lipschitz and growth constants.

    Parameters
    ----------
    name : str
        Canonical string, e.g. ``"sine(1, 1)"``.
    func : callable
        Vectorised map of ndarray to ndarray.
    bound : float
        sup |f|, ``inf`` when unbounded.
    lipschitz : float
        Smallest Lipschitz constant.
    growth : float
        Smallest L with |f(x)| <= L (1 + |x|).
    """

    def __init__(self, name, func, bound, lipschitz, growth):
        self.name = name
        self.func = func
        self.bound = bound
        self.lipschitz = lipschitz
        self.growth = growth

    def __call__(self, x):
        return self.func(np.asarray(x, dtype=float))

    def __repr__(self):
        return self.name


def parse_form(text):
    """Split ``"name(a, b)"`` into the canonical name and a tuple of floats."""
    match = _FORM.match(str(text))
    if match is None:
        raise ConfigurationError("parse_form(): ", "cannot parse closed form {!r}".format(text))
    name = match.group(1).lower().replace("_", "-")
    args = match.group(2)
    try:
        params = tuple(float(a) for a in args.split(",")) if args and args.strip() else ()
    except ValueError:
        raise ConfigurationError("parse_form(): ", "non numeric argument in {!r}".format(text))
    return name, params


def _canonical(name, params):
    return name if not params else "{}({})".format(name, ", ".join("{:g}".format(p) for p in params))


def _zero():
    return lambda x: np.zeros_like(x), 0.0, 0.0, 0.0


def _constant(c):
    return lambda x: np.full_like(x, c), abs(c), 0.0, abs(c)


def _affine(a, b=0.0):
    return lambda x: a * x + b, math.inf, abs(a), max(abs(a), abs(b))


def _sine(a=1.0, w=1.0):
    return lambda x: a * np.sin(w * x), abs(a), abs(a * w), abs(a)


def _bounded_rational(K=1.0):
    # max of |d/dx 1/(1+x^2)| is 3 sqrt(3) / 8, reached at x = 1/sqrt(3)
    return lambda x: K / (1.0 + x ** 2), abs(K), abs(K) * 3.0 * math.sqrt(3.0) / 8.0, abs(K)


def _clipped_linear(K=1.0):
    if K <= 0:
        raise DomainError("clipped-linear(): ", "the clipping level must be positive")
    return lambda x: np.clip(x, -K, K), K, 1.0, 1.0


COEFFICIENT_FORMS = {
    "zero": _zero,
    "constant": _constant,
    "affine": _affine,
    "sine": _sine,
    "bounded-rational": _bounded_rational,
    "clipped-linear": _clipped_linear,
}


def _build(registry, text, kind):
    name, params = parse_form(text)
    if name not in registry:
        raise ConfigurationError("{}: ".format(kind), "unknown closed form {!r}, expected one of {}"
                                 .format(name, sorted(registry)))
    try:
        return name, params, registry[name](*params)
    except TypeError:
        raise ConfigurationError("{}: ".format(kind), "wrong number of arguments in {!r}".format(text))


def closed_form(text):
    name, params, (func, bound, lipschitz, growth) = _build(COEFFICIENT_FORMS, text, "closed_form()")
    return ClosedForm(_canonical(name, params), func, bound, lipschitz, growth)


class Coefficients:
    """Drift b and diffusion sigma of the equation together with their declared constants.

    Parameters
    ----------
    b : callable
        Vectorised drift.
    sigma : callable
        Vectorised diffusion coefficient.
    L_b : float
        Declared growth and Lipschitz constant of b.
    K_sigma : float
        Declared uniform bound of sigma.
    L_sigma : float
        Declared Lipschitz constant of sigma.
    names : tuple of str, optional
        Closed-form names of (b, sigma), echoed in reports.
    """

    def __init__(self, b, sigma, L_b, K_sigma, L_sigma, names=None):
        for label, value in (("L_b", L_b), ("K_sigma", K_sigma), ("L_sigma", L_sigma)):
            if not value >= 0:
                raise DomainError("Coefficients(): ", "{} must be non-negative, got {}".format(label, value))
        self.b = b
        self.sigma = sigma
        self.L_b = float(L_b)
        self.K_sigma = float(K_sigma)
        self.L_sigma = float(L_sigma)
        self.names = names if names is not None else (getattr(b, "name", repr(b)), getattr(sigma, "name", repr(sigma)))

    @classmethod
    def from_names(cls, b="zero", sigma="constant(1)", L_b=None, K_sigma=None, L_sigma=None):
        """Build coefficients from the registry; undeclared constants take the exact values of the forms."""
        drift = closed_form(b)
        diffusion = closed_form(sigma)
        L_b = max(drift.growth, drift.lipschitz) if L_b is None else L_b
        K_sigma = diffusion.bound if K_sigma is None else K_sigma
        L_sigma = diffusion.lipschitz if L_sigma is None else L_sigma
        return cls(drift, diffusion, L_b, K_sigma, L_sigma, (drift.name, diffusion.name))

    def is_additive(self):
        return self.L_sigma == 0.0

    def as_dict(self):
        return {"b": self.names[0], "sigma": self.names[1], "L_b": self.L_b,
                "K_sigma": self.K_sigma, "L_sigma": self.L_sigma}

    def __repr__(self):
        return "Coefficients(b={}, sigma={}, L_b={}, K_sigma={}, L_sigma={})".format(
            self.names[0], self.names[1], self.L_b, self.K_sigma, self.L_sigma)


def _ic_zero():
    return lambda x: np.zeros_like(x)


def _ic_dirichlet_sine(a=1.0, k=1.0):
    if k != int(k) or k < 1:
        raise DomainError("dirichlet-sine(): ", "the mode k must be a positive integer")
    return lambda x: a * np.sin(k * np.pi * x)


def _ic_tent(a=1.0):
    return lambda x: a * (1.0 - np.abs(2.0 * x - 1.0))


INITIAL_CONDITIONS = {
    "zero": _ic_zero,
    "dirichlet-sine": _ic_dirichlet_sine,
    "tent": _ic_tent,
}


def initial_condition(text, grid):
    """Node values of a named initial condition, validated for boundary compatibility."""
    name, params, func = _build(INITIAL_CONDITIONS, text, "initial_condition()")
    ends = func(np.array([0.0, 1.0]))
    if np.max(np.abs(ends)) > 1e-12:
        raise DomainError("initial_condition(): ", "{!r} does not vanish at x = 0 and x = 1".format(text))
    row = func(grid.nodes)
    if not np.all(np.isfinite(row)):
        raise DomainError("initial_condition(): ", "{!r} is not finite on the grid".format(text))
    return row


class DriftSpec:
    """Recipe producing the Girsanov drift of one path.

    Deterministic drifts ignore the noise; adapted drifts are built from the
    past increments of the noise sample passed to :meth:`build`.
    """

    def __init__(self, name, builder, adapted, bound):
        self.name = name
        self.builder = builder
        self.adapted = adapted
        self.bound = bound

    def build(self, noise):
        return self.builder(noise)

    def is_zero(self):
        return self.bound == 0.0

    def __repr__(self):
        return self.name


def _h_zero():
    return (lambda noise: DriftField.zero(noise.grid)), False, 0.0


def _h_constant(c):
    return (lambda noise: DriftField.constant(noise.grid, c)), False, abs(c)


def _h_sine(a=1.0):
    return (lambda noise: DriftField.from_function(noise.grid, lambda t, x: a * np.sin(np.pi * x))), False, abs(a)


def _h_adapted_tanh(c=1.0):
    def builder(noise):
        scale = np.sqrt(noise.grid.cell_measure)

        def functional(n, past):
            if n == 0:
                return np.zeros(noise.grid.nx)
            return c * np.tanh(past.sum(axis=0) / (scale * math.sqrt(n)))

        return DriftField.adapted(noise, functional)

    return builder, True, abs(c)


DRIFTS = {
    "zero": _h_zero,
    "constant": _h_constant,
    "sine": _h_sine,
    "adapted-tanh": _h_adapted_tanh,
}


def drift_spec(text):
    name, params, (builder, adapted, bound) = _build(DRIFTS, text, "drift_spec()")
    return DriftSpec(_canonical(name, params), builder, adapted, bound)
