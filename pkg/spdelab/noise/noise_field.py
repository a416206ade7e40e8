"""Discretised space-time white noise, Girsanov shifts and relative entropy."""
import numpy as np
from sklearn.utils.validation import check_array

from ..errors.errors import DomainError, EmptyEnsembleError, GridError
from ..kernels.heat_kernel import SpaceTimeGrid

NOISE_MAGIC = b"SPDEWN01"
FIELD_MAGIC = b"SPDERF01"
HEADER_DTYPE = np.dtype([("magic", "S8"), ("nt", "<i8"), ("nx", "<i8"), ("T", "<f8"),
                         ("seed", "<u8"), ("path_index", "<i8")])

DETERMINISTIC = "deterministic"
ADAPTED = "adapted"


def path_generator(seed, path_index, stream=0):
    """Counter-based generator dedicated to one ensemble member.

    The Philox key is derived from (seed, path_index, stream) only, so a path
    draws the same numbers whatever worker runs it.
    """
    if seed is None or int(seed) < 0 or int(seed) >= 2 ** 64:
        raise DomainError("path_generator(): ", "seed must be an integer in [0, 2**64)")
    if int(path_index) < 0:
        raise DomainError("path_generator(): ", "path_index must be non-negative")
    key = [int(seed), int(path_index)] + ([int(stream)] if stream else [])
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def write_binary(path, magic, grid, seed, path_index, body):
    header = np.zeros(1, dtype=HEADER_DTYPE)
    header[0] = (magic, grid.nt, grid.nx, grid.T, seed, path_index)
    with open(path, "wb") as handle:
        handle.write(header.tobytes())
        handle.write(np.ascontiguousarray(body, dtype="<f8").tobytes())


def read_binary(path, magic, rows_extra=0):
    with open(path, "rb") as handle:
        raw = handle.read()
    if len(raw) < HEADER_DTYPE.itemsize:
        raise GridError("read_binary(): ", "{} is too short to hold a header".format(path))
    header = np.frombuffer(raw[:HEADER_DTYPE.itemsize], dtype=HEADER_DTYPE)[0]
    if header["magic"] != magic:
        raise GridError("read_binary(): ", "{} does not hold the expected record type".format(path))
    grid = SpaceTimeGrid(float(header["T"]), int(header["nt"]), int(header["nx"]))
    body = np.frombuffer(raw[HEADER_DTYPE.itemsize:], dtype="<f8").astype(float)
    shape = (grid.nt + rows_extra, grid.nx)
    if body.size != shape[0] * shape[1]:
        raise GridError("read_binary(): ", "body of {} does not match its header".format(path))
    return grid, int(header["seed"]), int(header["path_index"]), body.reshape(shape)


class WhiteNoiseSample:
    """Cell increments of a Brownian sheet on a space-time grid.

    Parameters
    ----------
    grid : SpaceTimeGrid
    increments : array-like, shape (nt, nx)
        Entry (n, i) is W(cell [t_n, t_{n+1}] x cell_i); its variance is
        ``grid.cell_measure[i]``, i.e. dt * dx for interior nodes and
        dt * 1.5 dx for the two outermost nodes, whose cells reach the
        boundary (dt for a single node).
    seed : int, default=0
        Master seed the increments were drawn from.
    path_index : int, default=0
        Ensemble member index.
    """

    def __init__(self, grid, increments, seed=0, path_index=0):
        increments = check_array(increments, dtype="float64", copy=True)
        if increments.shape != grid.noise_shape:
            raise GridError("WhiteNoiseSample(): ", "increments of shape {} do not fit grid {}"
                            .format(increments.shape, grid))
        increments.setflags(write=False)
        self.grid = grid
        self.increments = increments
        self.seed = int(seed)
        self.path_index = int(path_index)

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.noise_shape))

    def sheet(self):
        """Brownian sheet W(t_n, right edge of cell i) for n = 0..nt, time-major cumulative sums."""
        values = np.zeros(self.grid.field_shape)
        values[1:] = np.cumsum(np.cumsum(self.increments, axis=0), axis=1)
        return values

    def total(self):
        return float(np.sum(self.increments))

    def save(self, path):
        write_binary(path, NOISE_MAGIC, self.grid, self.seed, self.path_index, self.increments)

    @classmethod
    def load(cls, path):
        grid, seed, path_index, body = read_binary(path, NOISE_MAGIC)
        return cls(grid, body, seed, path_index)

    def __repr__(self):
        return "WhiteNoiseSample(grid={}, seed={}, path_index={})".format(self.grid, self.seed, self.path_index)


def sample_white_noise(grid, seed, path_index):
    """Draw the increments of path ``path_index`` of the ensemble keyed by ``seed``.

    Entries are independent centred Gaussians of variance dt * dx, except
    in the first and last space columns where the cells extend to the
    boundary and the variance is dt * 1.5 dx. The cells tile [0, T] x [0, 1],
    so the total mass has variance T.
    """
    if not isinstance(grid, SpaceTimeGrid):
        raise GridError("sample_white_noise(): ", "a SpaceTimeGrid is required")
    rng = path_generator(seed, path_index)
    increments = rng.standard_normal(grid.noise_shape) * np.sqrt(grid.cell_measure)[None, :]
    return WhiteNoiseSample(grid, increments, seed, path_index)


def coarsen(W, time_factor=1, space_refined=False):
    """Aggregate a fine noise sample onto a coarser grid.

    Time blocks of ``time_factor`` steps are summed. When ``space_refined`` the
    fine grid is taken to have 2 nx + 1 nodes and every coarse node x_i
    coincides with fine node 2i; fine cells straddling a coarse cell edge are
    split in two halves with an independent Brownian bridge draw from a
    dedicated stream of the same (seed, path_index), so the coarse sample has
    the exact law of white noise on the coarse grid and stays coupled to W.
    """
    grid = W.grid
    if time_factor < 1 or grid.nt % time_factor:
        raise GridError("coarsen(): ", "nt={} is not a multiple of time_factor={}".format(grid.nt, time_factor))
    increments = W.increments.reshape(grid.nt // time_factor, time_factor, grid.nx).sum(axis=1)
    nx = grid.nx
    if space_refined:
        if nx < 3 or nx % 2 == 0:
            raise GridError("coarsen(): ", "space coarsening needs an odd fine nx >= 3, got {}".format(nx))
        coarse_dt = grid.dt * time_factor
        rng = path_generator(W.seed, W.path_index, stream=1)
        # fine cells 3, 5, ..., nx - 2 straddle a coarse cell edge
        odd = increments[:, 2:nx - 1:2]
        bridge = rng.standard_normal(odd.shape) * np.sqrt(coarse_dt * grid.dx / 4.0)
        left = 0.5 * odd + bridge
        right = 0.5 * odd - bridge
        even = increments[:, 1::2]
        coarse = even.copy()
        coarse[:, 0] += increments[:, 0]
        coarse[:, -1] += increments[:, -1]
        coarse[:, :-1] += left
        coarse[:, 1:] += right
        increments = coarse
        nx = (nx - 1) // 2
    coarse_grid = SpaceTimeGrid(grid.T, grid.nt // time_factor, nx)
    return WhiteNoiseSample(coarse_grid, increments, W.seed, W.path_index)


class DriftField:
    """Drift h(t_n, x_i) of a Girsanov shift, one row per time step.

    Parameters
    ----------
    grid : SpaceTimeGrid
    values : array-like, shape (nt, nx)
        Row n is the value of h on [t_n, t_{n+1}).
    kind : {"deterministic", "adapted"}
        Adapted drifts are functionals of the noise; row n only depends on
        increments with time index < n.
    """

    def __init__(self, grid, values, kind=DETERMINISTIC):
        values = check_array(values, dtype="float64", copy=True)
        if values.shape != grid.noise_shape:
            raise GridError("DriftField(): ", "values of shape {} do not fit grid {}".format(values.shape, grid))
        if kind not in (DETERMINISTIC, ADAPTED):
            raise DomainError("DriftField(): ", "unknown kind {!r}".format(kind))
        values.setflags(write=False)
        self.grid = grid
        self.values = values
        self.kind = kind

    @classmethod
    def zero(cls, grid):
        return cls(grid, np.zeros(grid.noise_shape))

    @classmethod
    def constant(cls, grid, c):
        return cls(grid, np.full(grid.noise_shape, float(c)))

    @classmethod
    def from_function(cls, grid, f):
        """Sample a closed form f(t, x) at the left time point of every step."""
        t, x = np.meshgrid(grid.times[:-1], grid.nodes, indexing="ij")
        return cls(grid, np.broadcast_to(np.asarray(f(t, x), dtype=float), grid.noise_shape))

    @classmethod
    def adapted(cls, noise, functional):
        """Build h row by row from ``functional(n, past)`` where ``past`` holds increments 0..n-1 only."""
        grid = noise.grid
        values = np.empty(grid.noise_shape)
        for n in range(grid.nt):
            values[n] = functional(n, noise.increments[:n])
        return cls(grid, values, ADAPTED)

    def __neg__(self):
        return DriftField(self.grid, -self.values, self.kind)

    def __mul__(self, factor):
        return DriftField(self.grid, float(factor) * self.values, self.kind)

    __rmul__ = __mul__

    def is_zero(self):
        return not np.any(self.values)

    def square_integral(self):
        """Discrete integral of h^2 over [0, T] x [0, 1], summed time-major."""
        rows = np.sum(self.values ** 2 * self.grid.cell_measure[None, :], axis=1)
        return float(np.sum(rows))


def _check_pair(W, h, expression):
    W.grid.check_same(h.grid, expression)


def girsanov_shift(W, h):
    """Shifted increments W(cell) - h dt w_i, the discrete sheet W - int int h."""
    _check_pair(W, h, "girsanov_shift()")
    shifted = W.increments - h.values * W.grid.cell_measure[None, :]
    return WhiteNoiseSample(W.grid, shifted, W.seed, W.path_index)


def girsanov_log_density(W, h):
    """log M_T = sum h dW - 1/2 sum h^2 dt w_i, both sums time-major."""
    _check_pair(W, h, "girsanov_log_density()")
    stochastic = float(np.sum(np.sum(h.values * W.increments, axis=1)))
    return stochastic - 0.5 * h.square_integral()


def girsanov_density(W, h):
    return float(np.exp(girsanov_log_density(W, h)))


def relative_entropy(h=None, ensemble=None):
    """Relative entropy 1/2 E[int int h^2] of the tilted law.

    Parameters
    ----------
    h : DriftField, optional
        A deterministic drift; used alone when ``ensemble`` is not given.
    ensemble : sequence of DriftField, optional
        Realisations of an adapted drift drawn under the tilted measure.

    Returns
    -------
    entropy : float
    """
    members = list(ensemble) if ensemble is not None else ([h] if h is not None else [])
    if not members:
        raise EmptyEnsembleError("relative_entropy(): ", "at least one drift realisation is required")
    if ensemble is None and h.kind == ADAPTED:
        raise EmptyEnsembleError("relative_entropy(): ", "an adapted drift needs an ensemble of realisations")
    grid = members[0].grid
    totals = np.empty(len(members))
    for k, member in enumerate(members):
        grid.check_same(member.grid, "relative_entropy()")
        totals[k] = member.square_integral()
    return 0.5 * float(np.mean(totals))
