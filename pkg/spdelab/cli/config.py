"""Run configuration: flat ``key = value`` files, command-line overrides and validation."""
from configparser import ConfigParser, Error as ParserError
from dataclasses import dataclass, field
import os

from ..errors.errors import ConfigurationError, Error
from ..kernels.heat_kernel import SpaceTimeGrid
from ..verifiers.verifier import Scenario

SECTION = "spdelab"
OUTPUT_ENV = "SPDELAB_OUTPUT_DIR"
DEFAULT_OUTPUT = "spdelab-output"
FORMATS = ("json", "csv")
CHECK_IDS = ("hypotheses", "moment", "tail", "small-p-q", "small-p-eps", "tci", "concentration", "layer-cake",
             "local-property", "factorization")

# every key is also a command-line flag --<key>
DEFAULTS = {
    "T": "1.0",
    "nt": "1024",
    "nx": "64",
    "paths": "1000",
    "seed": "0",
    "workers": "1",
    "out": "",
    "format": "json, csv",
    "checks": "hypotheses, moment, tail, small-p-q, small-p-eps, tci, layer-cake, local-property",
    "u0": "zero",
    "b": "zero",
    "sigma": "constant(1)",
    "h": "zero",
    "L_b": "",
    "K_sigma": "",
    "L_sigma": "",
    "p": "12",
    "small_p": "2",
    "q": "12",
    "eps": "0.5",
    "lambdas": "0.5, 1, 2",
    "alpha": "",
    "probe_range": "-10, 10",
    "n_probe": "64",
    "margin": "2",
    "bound_scale": "1",
    "scenario_id": "default",
    "layer_cake_source": "scenario",
    "radii": "",
    "functional": "sup-norm",
    "form": "direct",
    "threshold": "2",
    "batch_size": "64",
}


def _split(text):
    return [item.strip() for item in text.replace(";", ",").split(",") if item.strip()]


def _number(settings, key, kind=float, optional=False):
    text = settings[key].strip()
    if not text:
        if optional:
            return None
        raise ConfigurationError("config: ", "key {!r} needs a value".format(key))
    try:
        value = float(text)
    except ValueError:
        value = None
    if value is None or (kind is int and not value.is_integer()):
        raise ConfigurationError("config: ", "key {!r} = {!r} is not a valid {}".format(key, text, kind.__name__))
    return int(value) if kind is int else value


def _numbers(settings, key):
    try:
        return tuple(float(item) for item in _split(settings[key]))
    except ValueError:
        raise ConfigurationError("config: ", "key {!r} = {!r} is not a list of numbers".format(key, settings[key]))


def read_settings(path=None, overrides=None):
    """Merge the defaults, the file at ``path`` and the non-None ``overrides``, in that order.

    Files hold ``key = value`` lines without section header; ``#`` starts a comment.
    """
    parser = ConfigParser(interpolation=None, inline_comment_prefixes=("#",))
    parser.optionxform = str
    parser.read_dict({SECTION: DEFAULTS})
    if path is not None:
        try:
            with open(path) as handle:
                text = handle.read()
        except OSError as error:
            raise ConfigurationError("config: ", "cannot read {}: {}".format(path, error))
        try:
            parser.read_string("[{}]\n{}".format(SECTION, text), source=str(path))
        except ParserError as error:
            raise ConfigurationError("config: ", "malformed configuration {}: {}".format(path, error))
    settings = dict(parser[SECTION])
    for key, value in (overrides or {}).items():
        if value is not None:
            settings[key] = ", ".join(str(v) for v in value) if isinstance(value, (list, tuple)) else str(value)
    unknown = sorted(set(settings) - set(DEFAULTS))
    if unknown:
        raise ConfigurationError("config: ", "unknown keys {}".format(unknown))
    return settings


def scenario_from_settings(settings):
    try:
        grid = SpaceTimeGrid(_number(settings, "T"), _number(settings, "nt", int), _number(settings, "nx", int))
        probe_range = _numbers(settings, "probe_range")
        if len(probe_range) != 2:
            raise ConfigurationError("config: ", "probe_range needs two numbers")
        return Scenario(u0=settings["u0"], b=settings["b"], sigma=settings["sigma"], h=settings["h"], grid=grid,
                        n_paths=_number(settings, "paths", int), seed=_number(settings, "seed", int),
                        L_b=_number(settings, "L_b", optional=True),
                        K_sigma=_number(settings, "K_sigma", optional=True),
                        L_sigma=_number(settings, "L_sigma", optional=True),
                        probe_range=probe_range, n_probe=_number(settings, "n_probe", int),
                        scenario_id=settings["scenario_id"])
    except ConfigurationError:
        raise
    except Error as error:
        raise ConfigurationError("config: ", str(error))


@dataclass
class RunConfig:
    """A validated batch run.

    Parameters
    ----------
    scenario : Scenario
    checks : tuple of str
        Check identifiers, see ``CHECK_IDS``.
    output_dir : str
    formats : tuple of str
        Subset of ``("json", "csv")``.
    master_seed : int
    workers : int
    settings : dict
        The merged ``key -> text`` settings; check parameters are read from it
        and it is echoed into the run manifest.
    """
    scenario: Scenario
    checks: tuple
    output_dir: str
    formats: tuple
    master_seed: int
    workers: int
    settings: dict = field(default_factory=dict)

    @classmethod
    def from_settings(cls, settings, environ=None):
        environ = os.environ if environ is None else environ
        out = settings["out"].strip() or environ.get(OUTPUT_ENV, "") or DEFAULT_OUTPUT
        config = cls(scenario=scenario_from_settings(settings), checks=tuple(_split(settings["checks"])),
                     output_dir=out, formats=tuple(_split(settings["format"])),
                     master_seed=_number(settings, "seed", int), workers=_number(settings, "workers", int),
                     settings=dict(settings, out=out))
        config.validate()
        return config

    def validate(self):
        unknown = [check for check in self.checks if check not in CHECK_IDS]
        if unknown or not self.checks:
            raise ConfigurationError("RunConfig: ", "unknown or missing check ids {}, expected a subset of {}"
                                     .format(unknown, list(CHECK_IDS)))
        if not self.formats or any(f not in FORMATS for f in self.formats):
            raise ConfigurationError("RunConfig: ", "formats must be a subset of {}".format(list(FORMATS)))
        if self.workers < 1:
            raise ConfigurationError("RunConfig: ", "workers must be at least 1")
        if self.master_seed < 0:
            raise ConfigurationError("RunConfig: ", "the seed must be non-negative")
        return self

    def number(self, key, kind=float, optional=False):
        return _number(self.settings, key, kind, optional)

    def numbers(self, key):
        return _numbers(self.settings, key)

    def prepare_output(self):
        """Create the output directory; ConfigurationError when it is not writable."""
        try:
            os.makedirs(self.output_dir, exist_ok=True)
        except OSError as error:
            raise ConfigurationError("RunConfig: ", "cannot create {}: {}".format(self.output_dir, error))
        if not os.access(self.output_dir, os.W_OK):
            raise ConfigurationError("RunConfig: ", "output directory {} is not writable".format(self.output_dir))
        return self.output_dir

    def as_dict(self):
        return {"scenario": self.scenario.as_dict(), "checks": list(self.checks), "output_dir": self.output_dir,
                "formats": list(self.formats), "master_seed": self.master_seed, "workers": self.workers,
                "settings": dict(self.settings)}


def load_config(path=None, overrides=None, environ=None):
    """Read, merge and validate a run configuration; returns a :class:`RunConfig`."""
    return RunConfig.from_settings(read_settings(path, overrides), environ)
