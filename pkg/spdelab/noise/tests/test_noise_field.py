import numpy as np
import pytest

from ..noise_field import (DriftField, WhiteNoiseSample, coarsen, girsanov_density, girsanov_log_density,
                           girsanov_shift, relative_entropy, sample_white_noise)
from ...errors.errors import DomainError, EmptyEnsembleError, GridError
from ...kernels.heat_kernel import SpaceTimeGrid

SEED = 20240601


def test_sampling_is_deterministic():
    grid = SpaceTimeGrid(1.0, 16, 7)
    first = sample_white_noise(grid, SEED, 3)
    second = sample_white_noise(grid, SEED, 3)
    other = sample_white_noise(grid, SEED, 4)
    assert np.array_equal(first.increments, second.increments)
    assert not np.array_equal(first.increments, other.increments)
    assert np.all(np.isfinite(first.increments))
    with pytest.raises(ValueError):
        first.increments[0, 0] = 1.0
    with pytest.raises(DomainError):
        sample_white_noise(grid, -1, 0)


def test_cell_variance():
    grid = SpaceTimeGrid(1.0, 2, 2)
    draws = np.array([sample_white_noise(grid, SEED, k).increments for k in range(10000)])
    variance = draws.var(axis=0, ddof=1)
    expected = np.broadcast_to(grid.cell_measure, grid.noise_shape)
    assert np.all(np.abs(variance / expected - 1.0) < 0.05)


def test_boundary_cells_reach_the_boundary():
    grid = SpaceTimeGrid(0.5, 4, 5)
    expected = np.array([1.5, 1.0, 1.0, 1.0, 1.5]) * grid.dt * grid.dx
    assert np.allclose(grid.cell_measure, expected, rtol=1e-14)
    assert grid.cell_widths.sum() == pytest.approx(1.0, rel=1e-14)
    assert SpaceTimeGrid(0.5, 4, 1).cell_measure[0] == pytest.approx(grid.dt)
    draws = np.array([sample_white_noise(grid, SEED + 2, k).increments for k in range(4000)])
    pooled = draws.reshape(-1, grid.nx).var(axis=0, ddof=1) / (grid.dt * grid.dx)
    # 16000 draws per column, relative standard error about 1.1%
    assert np.all(np.abs(pooled[[0, -1]] - 1.5) < 0.075)
    assert np.all(np.abs(pooled[1:-1] - 1.0) < 0.05)


def test_total_mass_variance():
    grid = SpaceTimeGrid(1.0, 8, 5)
    totals = np.array([sample_white_noise(grid, SEED + 1, k).total() for k in range(10000)])
    se = grid.T * np.sqrt(2.0 / (totals.size - 1))
    assert abs(totals.var(ddof=1) - grid.T) <= 3.0 * se


def test_girsanov_shift():
    grid = SpaceTimeGrid(0.5, 8, 5)
    W = sample_white_noise(grid, SEED, 0)
    assert np.array_equal(girsanov_shift(W, DriftField.zero(grid)).increments, W.increments)
    shifted = girsanov_shift(W, DriftField.constant(grid, 2.0))
    assert np.allclose(W.increments - shifted.increments, 2.0 * grid.cell_measure[None, :], rtol=0, atol=1e-15)
    h = DriftField.from_function(grid, lambda t, x: np.sin(np.pi * x) * (1.0 + t))
    back = girsanov_shift(girsanov_shift(W, h), -h)
    assert np.allclose(back.increments, W.increments, rtol=0, atol=1e-15)
    integral = np.cumsum(np.cumsum(h.values * grid.cell_measure[None, :], axis=0), axis=1)
    sheet_gap = W.sheet()[1:] - girsanov_shift(W, h).sheet()[1:]
    assert np.allclose(sheet_gap, integral, rtol=0, atol=1e-14)
    with pytest.raises(GridError):
        girsanov_shift(W, DriftField.zero(SpaceTimeGrid(0.5, 4, 5)))


def test_log_density():
    grid = SpaceTimeGrid(1.0, 8, 3)
    W = sample_white_noise(grid, SEED, 0)
    assert girsanov_log_density(W, DriftField.zero(grid)) == 0.0
    h = DriftField.constant(grid, 0.5)
    assert girsanov_density(W, h) > 0.0
    logs = np.array([girsanov_log_density(sample_white_noise(grid, SEED + 2, k), h) for k in range(10000)])
    densities = np.exp(logs)
    assert abs(densities.mean() - 1.0) <= 3.0 * densities.std(ddof=1) / np.sqrt(densities.size)
    expected = -0.5 * h.square_integral()
    assert abs(logs.mean() - expected) <= 3.0 * logs.std(ddof=1) / np.sqrt(logs.size)


def test_relative_entropy():
    grid = SpaceTimeGrid(2.0, 32, 9)
    assert relative_entropy(DriftField.zero(grid)) == 0.0
    one = DriftField.constant(grid, 1.0)
    assert relative_entropy(one) == pytest.approx(grid.T / 2.0, rel=1e-12)
    h = DriftField.from_function(grid, lambda t, x: np.cos(3.0 * x) + t)
    assert relative_entropy(2 * h) == 4.0 * relative_entropy(h)
    assert relative_entropy(h) > 0.0
    with pytest.raises(EmptyEnsembleError):
        relative_entropy(ensemble=[])


def test_adapted_drift_sees_only_the_past():
    grid = SpaceTimeGrid(1.0, 6, 4)
    W = sample_white_noise(grid, SEED, 1)
    seen = []

    def functional(n, past):
        seen.append(past.shape[0])
        return np.tanh(past.sum(axis=0))

    h = DriftField.adapted(W, functional)
    assert seen == list(range(grid.nt))
    assert h.kind == "adapted"
    assert np.all(h.values[0] == 0.0)
    with pytest.raises(EmptyEnsembleError):
        relative_entropy(h)
    assert relative_entropy(ensemble=[h, h]) == pytest.approx(relative_entropy(ensemble=[h]))


def test_coarsen():
    grid = SpaceTimeGrid(1.0, 8, 7)
    W = sample_white_noise(grid, SEED, 5)
    in_time = coarsen(W, time_factor=4)
    assert in_time.grid == SpaceTimeGrid(1.0, 2, 7)
    expected = np.stack([W.increments[:4].sum(axis=0), W.increments[4:].sum(axis=0)])
    assert np.allclose(in_time.increments, expected, rtol=0, atol=1e-15)
    both = coarsen(W, time_factor=2, space_refined=True)
    assert both.grid == SpaceTimeGrid(1.0, 4, 3)
    assert both.total() == pytest.approx(W.total(), abs=1e-12)
    assert np.array_equal(coarsen(W, 2, True).increments, both.increments)
    with pytest.raises(GridError):
        coarsen(W, time_factor=3)
    with pytest.raises(GridError):
        coarsen(sample_white_noise(SpaceTimeGrid(1.0, 8, 6), SEED, 0), space_refined=True)


def test_coarsened_noise_has_white_noise_variance():
    fine = SpaceTimeGrid(1.0, 4, 7)
    coarse = SpaceTimeGrid(1.0, 2, 3)
    draws = np.array([coarsen(sample_white_noise(fine, SEED, k), 2, True).increments for k in range(2000)])
    normalised = draws ** 2 / coarse.cell_measure[None, None, :]
    assert abs(normalised.mean() - 1.0) < 0.05


def test_binary_persistence(tmp_path):
    grid = SpaceTimeGrid(0.75, 6, 5)
    W = sample_white_noise(grid, SEED, 9)
    path = str(tmp_path / "noise.bin")
    W.save(path)
    with open(path, "rb") as handle:
        assert len(handle.read()) == 48 + 8 * grid.nt * grid.nx
    loaded = WhiteNoiseSample.load(path)
    assert loaded.grid == grid
    assert (loaded.seed, loaded.path_index) == (SEED, 9)
    assert np.array_equal(loaded.increments, W.increments)
