import math

import numpy as np
import pytest

from ..coefficients import Coefficients, closed_form, drift_spec, initial_condition, parse_form
from ...errors.errors import ConfigurationError, DomainError
from ...kernels.heat_kernel import SpaceTimeGrid
from ...noise.noise_field import sample_white_noise


def test_parse_form():
    assert parse_form("zero") == ("zero", ())
    assert parse_form("affine(2, 1)") == ("affine", (2.0, 1.0))
    assert parse_form(" Bounded_Rational(0.5) ") == ("bounded-rational", (0.5,))
    assert parse_form("sine()") == ("sine", ())
    with pytest.raises(ConfigurationError):
        parse_form("affine(2, x)")
    with pytest.raises(ConfigurationError):
        parse_form("(2)")


def test_closed_forms():
    x = np.linspace(-3.0, 3.0, 7)
    assert np.all(closed_form("zero")(x) == 0.0)
    assert np.all(closed_form("constant(2.5)")(x) == 2.5)
    assert np.allclose(closed_form("affine(2, 1)")(x), 2 * x + 1)
    assert np.allclose(closed_form("sine")(x), np.sin(x))
    assert np.allclose(closed_form("clipped-linear(2)")(x), np.clip(x, -2, 2))
    rational = closed_form("bounded-rational(2)")
    assert rational.bound == 2.0
    assert rational.lipschitz == pytest.approx(2.0 * 3.0 * math.sqrt(3.0) / 8.0)
    assert closed_form("affine(2, 1)").bound == math.inf
    assert closed_form("sine(2, 3)").lipschitz == 6.0
    assert repr(closed_form("affine(2, 1)")) == "affine(2, 1)"
    with pytest.raises(ConfigurationError):
        closed_form("cosine")
    with pytest.raises(ConfigurationError):
        closed_form("affine(1, 2, 3)")
    with pytest.raises(DomainError):
        closed_form("clipped-linear(0)")


def test_coefficients_from_names():
    coeffs = Coefficients.from_names(b="affine(2, 1)", sigma="bounded-rational(1)")
    assert coeffs.L_b == 2.0
    assert coeffs.K_sigma == 1.0
    assert coeffs.L_sigma == pytest.approx(3.0 * math.sqrt(3.0) / 8.0)
    assert coeffs.as_dict()["sigma"] == "bounded-rational(1)"
    declared = Coefficients.from_names(sigma="constant(1)", K_sigma=3.0)
    assert declared.K_sigma == 3.0 and declared.is_additive()
    with pytest.raises(DomainError):
        Coefficients(np.sin, np.sin, -1.0, 1.0, 1.0)


def test_initial_conditions():
    grid = SpaceTimeGrid(1.0, 4, 9)
    assert np.all(initial_condition("zero", grid) == 0.0)
    assert np.allclose(initial_condition("dirichlet-sine(2, 1)", grid), 2 * np.sin(np.pi * grid.nodes))
    tent = initial_condition("tent", grid)
    assert tent.max() == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(DomainError):
        initial_condition("dirichlet-sine(1, 0.5)", grid)
    with pytest.raises(ConfigurationError):
        initial_condition("gaussian", grid)


def test_drift_specs():
    grid = SpaceTimeGrid(1.0, 8, 5)
    W = sample_white_noise(grid, 7, 0)
    assert drift_spec("zero").is_zero()
    constant = drift_spec("constant(0.5)").build(W)
    assert constant.kind == "deterministic" and np.all(constant.values == 0.5)
    sine = drift_spec("sine(2)").build(W)
    assert np.allclose(sine.values[3], 2 * np.sin(np.pi * grid.nodes))
    spec = drift_spec("adapted_tanh(0.3)")
    assert spec.adapted and spec.name == "adapted-tanh(0.3)"
    h = spec.build(W)
    assert h.kind == "adapted"
    assert np.all(np.abs(h.values) <= 0.3)
    assert np.all(h.values[0] == 0.0)
