"""Mild-form time stepping of the stochastic reaction-diffusion equation

    du = 1/2 u'' dt + b(u) dt + sigma(u) W(dt, dx),    u(t, 0) = u(t, 1) = 0,

and of the synchronously coupled pair used for the transportation inequality.
"""
import numpy as np
from sklearn.utils.validation import check_array

from .coefficients import initial_condition
from ..errors.errors import BlowUpError, DomainError, GridError, HypothesisError
from ..kernels.heat_kernel import DEFAULT_PARAMS, SpaceTimeGrid, kernel_matrix
from ..noise.noise_field import FIELD_MAGIC, coarsen, girsanov_shift, read_binary, sample_white_noise, write_binary
from ..utils.report import VerificationReport

BLOW_UP_THRESHOLD = 1e12


class RandomField:
    """Values of a field on the interior nodes at every time level.

    Parameters
    ----------
    grid : SpaceTimeGrid
    values : array-like, shape (nt + 1, nx)
        Row 0 is the initial condition; the boundary values are zero and not stored.
    """

    def __init__(self, grid, values, seed=0, path_index=0):
        values = check_array(values, dtype="float64", copy=True)
        if values.shape != grid.field_shape:
            raise GridError("RandomField(): ", "values of shape {} do not fit grid {}".format(values.shape, grid))
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.seed = int(seed)
        self.path_index = int(path_index)

    def sup_norm(self):
        return float(np.max(np.abs(self.values)))

    def __sub__(self, other):
        self.grid.check_same(other.grid, "RandomField.__sub__()")
        return RandomField(self.grid, self.values - other.values, self.seed, self.path_index)

    def with_boundary(self):
        """Values including the pinned boundary columns, shape (nt + 1, nx + 2)."""
        return np.pad(self.values, ((0, 0), (1, 1)))

    def to_csv(self, path):
        t, x = np.meshgrid(self.grid.times, self.grid.nodes, indexing="ij")
        table = np.column_stack([t.ravel(), x.ravel(), self.values.ravel()])
        np.savetxt(path, table, delimiter=",", header="t,x,value", comments="", fmt="%.17g")

    def save(self, path):
        write_binary(path, FIELD_MAGIC, self.grid, self.seed, self.path_index, self.values)

    @classmethod
    def load(cls, path):
        grid, seed, path_index, body = read_binary(path, FIELD_MAGIC, rows_extra=1)
        return cls(grid, body, seed, path_index)


def _check_inputs(u0, W, grid, expression):
    if grid is None:
        grid = W.grid
    grid.check_same(W.grid, expression)
    u0 = check_array(np.atleast_1d(u0), ensure_2d=False, dtype="float64")
    if u0.shape != (grid.nx,):
        raise GridError(expression + ": ", "initial row has shape {}, expected ({},)".format(u0.shape, grid.nx))
    return u0, grid


def solve_mild(u0, coeffs, W, grid=None, params=DEFAULT_PARAMS, noise_drift=None):
    """One path of the exponential Euler mild scheme.

    u^{n+1} = dx P (u^n + b(u^n) dt) + P (sigma(u^n) dW^n), where P is the
    kernel matrix p_dt(x_i, x_j) and the noise term uses the left point.

    Parameters
    ----------
    u0 : array-like, shape (nx,)
        Initial values on the interior nodes.
    coeffs : Coefficients
    W : WhiteNoiseSample
    grid : SpaceTimeGrid, optional
        Defaults to the grid of ``W``; a different grid raises GridError.
    params : KernelParams
    noise_drift : DriftField, optional
        Adds sigma(u^n) h^n dt w_j to the noise increments, i.e. solves against
        the drift-shifted equation driven by ``W``.

    Returns
    -------
    field : RandomField
    """
    u0, grid = _check_inputs(u0, W, grid, "solve_mild()")
    if noise_drift is not None:
        grid.check_same(noise_drift.grid, "solve_mild()")
    P = kernel_matrix(grid.dt, grid, params)
    measure = grid.cell_measure
    values = np.empty(grid.field_shape)
    values[0] = u0
    for n in range(grid.nt):
        current = values[n]
        sigma = coeffs.sigma(current)
        deterministic = grid.dx * (P @ (current + coeffs.b(current) * grid.dt))
        if noise_drift is None:
            stochastic = P @ (sigma * W.increments[n])
        else:
            stochastic = P @ (sigma * W.increments[n] + sigma * noise_drift.values[n] * measure)
        values[n + 1] = deterministic + stochastic
        if not np.all(np.isfinite(values[n + 1])) or np.max(np.abs(values[n + 1])) > BLOW_UP_THRESHOLD:
            raise BlowUpError("solve_mild(): ", "solution left [-1e12, 1e12] at step {}".format(n + 1), step=n + 1)
    return RandomField(grid, values, W.seed, W.path_index)


def solve_coupled_pair(u0, coeffs, W, h, grid=None, params=DEFAULT_PARAMS, form="direct"):
    """Coupled solutions (v, u) sharing the shifted noise W~ = W - int int h.

    v solves the equation driven by W~. u solves it driven by W~ plus the drift
    sigma(u) h; with ``form="direct"`` u is computed against W itself, which is
    the same discrete equation and makes u bitwise equal to ``solve_mild(u0, coeffs, W)``.
    ``form="drift"`` evaluates the drift term explicitly.
    """
    u0, grid = _check_inputs(u0, W, grid, "solve_coupled_pair()")
    grid.check_same(h.grid, "solve_coupled_pair()")
    shifted = girsanov_shift(W, h)
    v = solve_mild(u0, coeffs, shifted, grid, params)
    if form == "direct":
        u = solve_mild(u0, coeffs, W, grid, params)
    elif form == "drift":
        u = solve_mild(u0, coeffs, shifted, grid, params, noise_drift=h)
    else:
        raise DomainError("solve_coupled_pair(): ", "form must be 'direct' or 'drift', got {!r}".format(form))
    return v, u


def deterministic_drift_response(K, h, grid=None, params=DEFAULT_PARAMS):
    """Field D solving D^{n+1} = dx P D^n + P (K h^n dt w), D^0 = 0.

    It is the exact difference u - v of the coupled pair when sigma is the
    constant K and b is zero.
    """
    grid = h.grid if grid is None else grid
    grid.check_same(h.grid, "deterministic_drift_response()")
    P = kernel_matrix(grid.dt, grid, params)
    values = np.zeros(grid.field_shape)
    for n in range(grid.nt):
        values[n + 1] = grid.dx * (P @ values[n]) + P @ (K * h.values[n] * grid.cell_measure)
    return RandomField(grid, values)


def _pairwise_ratio(f, probes):
    diffs = probes[:, None] - probes[None, :]
    upper = np.triu(np.ones_like(diffs, dtype=bool), k=1)
    values = f(probes)
    ratios = np.abs(values[:, None] - values[None, :])[upper] / np.abs(diffs[upper])
    k = int(np.argmax(ratios))
    rows, cols = np.nonzero(upper)
    return float(ratios[k]), (float(probes[rows[k]]), float(probes[cols[k]]))


def check_hypotheses(coeffs, value_range=(-10.0, 10.0), n_probe=64):
    """Probe the growth, bound and Lipschitz hypotheses on ``n_probe`` points and all their pairs.

    The estimate of the report is the largest relative excess
    (observed - declared) / max(1, declared) over the three constants; the
    check passes when it does not exceed 1e-9.
    """
    lo, hi = float(value_range[0]), float(value_range[1])
    if not lo < hi:
        raise DomainError("check_hypotheses(): ", "empty probe range [{}, {}]".format(lo, hi))
    if n_probe < 2:
        raise DomainError("check_hypotheses(): ", "n_probe must be at least 2")
    probes = np.linspace(lo, hi, int(n_probe))
    b_values = np.asarray(coeffs.b(probes), dtype=float)
    growth = np.abs(b_values) / (1.0 + np.abs(probes))
    lip_b, pair_b = _pairwise_ratio(coeffs.b, probes)
    sigma_values = np.abs(np.asarray(coeffs.sigma(probes), dtype=float))
    lip_sigma, pair_sigma = _pairwise_ratio(coeffs.sigma, probes)
    observed = {
        "L_b": (max(float(growth.max()), lip_b),
                {"point": float(probes[np.argmax(growth)])} if growth.max() >= lip_b else {"pair": pair_b}),
        "K_sigma": (float(sigma_values.max()), {"point": float(probes[np.argmax(sigma_values)])}),
        "L_sigma": (lip_sigma, {"pair": pair_sigma}),
    }
    declared = {"L_b": coeffs.L_b, "K_sigma": coeffs.K_sigma, "L_sigma": coeffs.L_sigma}
    # an unbounded declaration never satisfies the hypotheses
    excess = {name: (observed[name][0] - declared[name]) / max(1.0, declared[name])
              if np.isfinite(declared[name]) else np.inf for name in declared}
    worst = max(excess, key=excess.get)
    witness = {"constant": worst, "observed": observed[worst][0], "declared": declared[worst]}
    witness.update(observed[worst][1])
    details = {"observed": {name: value[0] for name, value in observed.items()},
               "declared": declared, "range": [lo, hi], "n_probe": int(n_probe),
               "coefficients": coeffs.as_dict()}
    passed = excess[worst] <= 1e-9
    if not passed:
        details["witness"] = witness
    return VerificationReport("hypotheses", 1e-9, excess[worst], 0.0, 0, passed, details)


def require_hypotheses(coeffs, value_range=(-10.0, 10.0), n_probe=64):
    """Raise HypothesisError with the witness when :func:`check_hypotheses` fails."""
    report = check_hypotheses(coeffs, value_range, n_probe)
    if not report.passed:
        raise HypothesisError("require_hypotheses(): ", "declared constants are violated: {}"
                              .format(report.details["witness"]), witness=report.details["witness"])
    return report


def self_convergence(u0, coeffs, grid, seed, n_paths=20, levels=3, params=DEFAULT_PARAMS):
    """Sup-norm differences between successive refinements driven by coupled noise.

    Level k + 1 has 4 times as many steps and 2 nx + 1 nodes, so every coarse
    node and time level is also one of the finer grid. Noise is drawn on the
    finest grid and aggregated with :func:`coarsen`.

    Parameters
    ----------
    u0 : str or callable
        Registry name or vectorised function of x of the initial condition.
    grid : SpaceTimeGrid
        The coarsest grid.

    Returns
    -------
    grids : list of SpaceTimeGrid
    differences : ndarray, shape (n_paths, levels - 1)
        Entry (k, l) is the sup over common nodes of |u_l - u_{l+1}| on path k.
    """
    if levels < 2:
        raise DomainError("self_convergence(): ", "at least two levels are needed")
    grids = [grid]
    for _ in range(levels - 1):
        grids.append(SpaceTimeGrid(grid.T, grids[-1].nt * 4, grids[-1].nx * 2 + 1))
    rows = [initial_condition(u0, g) if isinstance(u0, str) else np.asarray(u0(g.nodes), dtype=float)
            for g in grids]
    differences = np.empty((n_paths, levels - 1))
    for k in np.arange(n_paths):
        noise = sample_white_noise(grids[-1], seed, int(k))
        samples = [noise]
        for _ in range(levels - 1):
            samples.insert(0, coarsen(samples[0], time_factor=4, space_refined=True))
        fields = [solve_mild(row, coeffs, W, g, params).values for row, W, g in zip(rows, samples, grids)]
        for level in np.arange(levels - 1):
            coarse, fine = fields[level], fields[level + 1]
            restricted = fine[::4, 1::2]
            differences[k, level] = np.max(np.abs(restricted - coarse))
    return grids, differences
