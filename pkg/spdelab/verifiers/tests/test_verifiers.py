import math

import numpy as np
import pytest
from scipy import stats
from sklearn.exceptions import NotFittedError

from ..appendix import LayerCakeVerifier, layer_cake_checks, layer_cake_sides, local_property_check
from ..concentration import (ConcentrationVerifier, concentration_profile, evaluate_functional, fit_gaussian_tail,
                             tail_curve)
from ..moments import MomentBoundVerifier, SmallMomentVerifier, sup_norm_moment, verify_moment_bound, \
    verify_small_p, verify_tail_bound
from ..transport import TransportVerifier, estimate_w2_and_entropy
from ..verifier import Scenario, mean_and_error, running_integral
from ...convolution.stochastic_convolution import convolve_direct, discrete_variance, truncate_sigma
from ...errors.errors import ConfigurationError, DomainError, EmptyEnsembleError, FitError
from ...kernels.heat_kernel import SpaceTimeGrid
from ...noise.noise_field import DriftField, sample_white_noise
from ...solvers.spde_solver import RandomField, deterministic_drift_response

SMALL = SpaceTimeGrid(0.25, 16, 7)


def scenario(**kwargs):
    values = {"grid": SMALL, "n_paths": 40, "seed": 7}
    values.update(kwargs)
    return Scenario(**values)


def test_scenario():
    with pytest.raises(DomainError):
        Scenario(n_paths=0)
    s = scenario(sigma="bounded-rational(1)", u0="tent")
    assert s.coefficients().names == ("zero", "bounded-rational(1)")
    assert s.initial_values().shape == (SMALL.nx,)
    assert s.as_dict()["grid"] == {"T": 0.25, "nt": 16, "nx": 7}
    assert s.validate() is not None


def test_mean_and_error():
    assert mean_and_error([3.0]) == (3.0, 0.0)
    mean, error = mean_and_error([1.0, 3.0])
    assert mean == 2.0
    assert error == pytest.approx(1.0)
    with pytest.raises(EmptyEnsembleError):
        mean_and_error([])


def test_running_integral_matches_truncation():
    rng = np.random.default_rng(3)
    sigma = rng.uniform(0.5, 1.5, SMALL.field_shape)
    total = running_integral(sigma, SMALL.dt, 2.0)
    for lam in [0.1, 0.5, math.sqrt(total), math.sqrt(total) * 1.01]:
        kept = truncate_sigma(sigma, 2.0, lam, SMALL)
        assert np.array_equal(kept, sigma) == (not total > lam ** 2)


def test_sup_norm_moment():
    fields = [RandomField(SMALL, np.full(SMALL.field_shape, -2.0), 0, k) for k in range(5)]
    assert sup_norm_moment(fields, 3.0) == (8.0, 0.0)
    assert sup_norm_moment([np.zeros(SMALL.field_shape)] * 3, 12.0) == (0.0, 0.0)
    with pytest.raises(DomainError):
        sup_norm_moment(fields, 0.0)
    with pytest.raises(EmptyEnsembleError):
        sup_norm_moment([], 2.0)
    bad = [np.full(SMALL.field_shape, np.nan)]
    with pytest.raises(ValueError):
        sup_norm_moment(bad, 2.0)


def test_moment_bound():
    report = verify_moment_bound(scenario(), p=12.0)
    assert report.check_name == "moment"
    assert report.passed
    assert report.empirical_estimate > 0
    assert report.n_paths == 40
    assert report.details["sigma_integral"] == pytest.approx(SMALL.T)
    assert 0 < report.details["alpha_star"] < 1

    zero = verify_moment_bound(scenario(sigma="zero"), p=12.0)
    assert zero.empirical_estimate == 0.0
    assert zero.passed

    control = verify_moment_bound(scenario(), p=12.0, bound_scale=1e-40, margin=0.0)
    assert not control.passed


def test_verifier_not_fitted():
    verifier = MomentBoundVerifier()
    with pytest.raises(NotFittedError):
        verifier.report()
    with pytest.raises(NotFittedError):
        verifier.passed_


def test_verifier_is_deterministic():
    s = scenario(sigma="bounded-rational(1)", n_paths=24)
    serial = MomentBoundVerifier(batch_size=5).fit(s).report()
    parallel = MomentBoundVerifier(batch_size=8, n_jobs=2).fit(s).report()
    assert serial.empirical_estimate == parallel.empirical_estimate
    assert serial.std_error == parallel.std_error
    assert serial.theoretical_bound == parallel.theoretical_bound


def test_tail_bound():
    reports = verify_tail_bound(scenario(sigma="bounded-rational(1)"), p=12.0, lambdas=(0.5, 1.0, 100.0))
    assert [r.check_name for r in reports] == ["tail(lambda=0.5)", "tail(lambda=1)", "tail(lambda=100)"]
    assert all(r.passed for r in reports)
    assert all(r.details["local_property_violations"] == 0 for r in reports)
    assert reports[-1].empirical_estimate == 0.0
    assert reports[0].empirical_estimate >= reports[1].empirical_estimate
    with pytest.raises(DomainError):
        verify_tail_bound(scenario(), lambdas=(0.0,))


def test_small_p():
    q_report = verify_small_p(scenario(), p=2.0, q=12.0)
    assert q_report.check_name == "small-p-q"
    assert q_report.passed
    assert q_report.details["mean_integral_power"] == pytest.approx(SMALL.T ** (1.0 / 6.0))

    eps_report = verify_small_p(scenario(), p=2.0, eps=0.5)
    assert eps_report.check_name == "small-p-eps"
    assert eps_report.passed
    assert eps_report.details["mean_sup_sigma_power"] == pytest.approx(1.0)

    with pytest.raises(DomainError):
        SmallMomentVerifier(p=2.0).fit(scenario())
    with pytest.raises(DomainError):
        SmallMomentVerifier(p=2.0, q=12.0, eps=0.5).fit(scenario())
    with pytest.raises(DomainError):
        SmallMomentVerifier(p=12.0, q=14.0).fit(scenario())


def test_transport_zero_drift():
    w2, entropy, report = estimate_w2_and_entropy(scenario(sigma="bounded-rational(1)", n_paths=8))
    assert w2 == 0.0
    assert entropy == 0.0
    assert report.passed


def test_transport_additive_matches_drift_response():
    s = scenario(h="constant(1)", n_paths=6)
    verifier = TransportVerifier().fit(s)
    D = deterministic_drift_response(1.0, DriftField.constant(SMALL, 1.0))
    assert verifier.w2_upper_ == pytest.approx(D.sup_norm(), rel=1e-9)
    assert verifier.entropy_ == pytest.approx(0.5 * SMALL.T)
    assert verifier.report().passed
    assert verifier.report().std_error == pytest.approx(0.0, abs=1e-12)


def test_transport_adapted_drift():
    s = scenario(sigma="bounded-rational(1)", h="adapted-tanh(0.5)", n_paths=20)
    for form in ["direct", "drift"]:
        verifier = TransportVerifier(form=form).fit(s)
        assert 0 < verifier.entropy_ <= 0.5 * 0.25 * SMALL.T
        assert verifier.w2_upper_ > 0
        assert verifier.passed_


def test_evaluate_functional():
    values = np.zeros(SMALL.field_shape)
    values[-1, 3] = -1.5
    values[2, 0] = 2.0
    field = RandomField(SMALL, values)
    assert evaluate_functional("sup-norm", field) == 2.0
    assert evaluate_functional("point", field, 0.5) == -1.5
    with pytest.raises(ConfigurationError):
        evaluate_functional("mean", field)


def test_tail_curve_and_fit():
    median, tails, counts = tail_curve(np.arange(11.0), [0.0, 2.0, 10.0])
    assert median == 5.0
    assert list(counts) == [5, 3, 0]
    assert tails[0] == pytest.approx(5 / 11)

    radii = np.linspace(0.0, 1.0, 6)
    C, c, used = fit_gaussian_tail(radii, 0.5 * np.exp(-2.0 * radii ** 2), np.full(6, 1000))
    assert C == pytest.approx(0.5, rel=1e-2)
    assert c == pytest.approx(2.0, rel=1e-2)
    assert used == 6
    with pytest.raises(FitError):
        fit_gaussian_tail(radii, np.zeros(6), np.zeros(6, dtype=int))


def test_concentration_degenerate():
    fields = [RandomField(SMALL, np.zeros(SMALL.field_shape), 0, k) for k in range(120)]
    with pytest.raises(FitError):
        concentration_profile("sup-norm", fields)
    with pytest.raises(DomainError):
        concentration_profile("sup-norm", fields[:50])
    with pytest.raises(EmptyEnsembleError):
        concentration_profile("sup-norm", [])


def test_concentration_gaussian_signature():
    s = Scenario(grid=SpaceTimeGrid(0.25, 8, 7), n_paths=400, seed=11)
    verifier = ConcentrationVerifier(functional="point").fit(s)
    assert verifier.passed_
    assert verifier.profile_.c_fit > 0
    assert verifier.profile_.n_samples == 400
    with pytest.raises(DomainError):
        ConcentrationVerifier().fit(scenario())


def test_point_functional_has_gaussian_tail():
    grid = SpaceTimeGrid(0.25, 8, 7)
    ones = np.ones(grid.field_shape)
    fields = [convolve_direct(ones, sample_white_noise(grid, 13, k)) for k in range(400)]
    values = np.array([evaluate_functional("point", field, 0.5) for field in fields])
    assert np.array_equal(values, [field.values[-1, 3] for field in fields])
    # sigma = 1: Z(T, 1/2) is centred Gaussian with the discrete Ito isometry variance
    sd = math.sqrt(discrete_variance(grid)[-1, 3])
    assert abs(values.var(ddof=1) / sd ** 2 - 1.0) <= 4.0 * math.sqrt(2.0 / (values.size - 1))

    radii = sd * np.array([0.0, 0.5, 1.0, 1.5, 2.0])
    profile = concentration_profile("point", fields, radii)
    expected = stats.norm.sf((profile.median + radii) / sd)
    ci = 4.0 * np.sqrt(expected * (1.0 - expected) / values.size) + 0.01
    assert np.all(np.abs(profile.tails - expected) <= ci)
    assert profile.c_fit > 0
    assert profile.n_samples == 400


def test_layer_cake_samples():
    samples = np.random.default_rng(5).uniform(0.0, 1.0, 1000)
    report = layer_cake_checks(samples, 2.0, 4.0)
    assert report.passed
    assert report.empirical_estimate <= 1e-6

    sides = layer_cake_sides(np.ones(10), 1.0, 2.0)
    assert sides["fractional_moment"] == pytest.approx(2.0)
    assert sides["truncated_tail"] == pytest.approx(2.0)

    zeros = layer_cake_checks(np.zeros(20), 2.0, 4.0)
    assert zeros.passed
    assert zeros.empirical_estimate == 0.0

    with pytest.raises(DomainError):
        layer_cake_checks(samples, 4.0, 2.0)
    with pytest.raises(EmptyEnsembleError):
        layer_cake_checks(np.array([]), 2.0, 4.0)


def test_layer_cake_distribution():
    report = layer_cake_checks(stats.uniform(), 2.0, 4.0)
    assert report.passed
    assert report.details["moment"] == pytest.approx(1.0 / 3.0)
    assert report.details["fractional_moment"] == pytest.approx(4.0 / 3.0)
    assert report.n_paths == 0


def test_layer_cake_on_scenario():
    report = LayerCakeVerifier(p=2.0, q=4.0).fit(scenario()).report()
    assert report.passed
    assert report.n_paths == 40
    assert report.scenario_id == "default"


def test_local_property():
    report = local_property_check(scenario(sigma="bounded-rational(1)", n_paths=30))
    assert report.check_name == "local-property"
    assert report.passed
    assert report.empirical_estimate == 0.0
    assert report.details["n_event"] + report.details["n_complement"] == 30
    assert report.details["n_event"] > 0

    never = local_property_check(scenario(n_paths=5), threshold=-100.0)
    assert not never.passed
    assert never.details["n_event"] == 0
    assert never.details["complement_nonzero"] == 5
