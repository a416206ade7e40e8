"""Command line runner: ``spdelab <subcommand> [flags]``.

Exit status is 0 when every check passed, 1 when a check failed and 2 on a
configuration error (unknown check id, malformed file, violated hypotheses).
"""
import argparse
import csv
import json
import os
import sys
import time

import numpy as np
from scipy import stats

from .config import CHECK_IDS, DEFAULTS, load_config
from .._version import __version__
from ..constants.constants import constants_table
from ..convolution.stochastic_convolution import FactorizationParams, factorization_study
from ..errors.errors import ConfigurationError, Error, HypothesisError
from ..kernels.heat_kernel import SpaceTimeGrid, kernel_value
from ..noise.noise_field import sample_white_noise
from ..solvers.coefficients import parse_form
from ..solvers.spde_solver import check_hypotheses, self_convergence, solve_mild
from ..utils.report import VerificationReport, write_reports
from ..verifiers.appendix import LayerCakeVerifier, LocalPropertyVerifier
from ..verifiers.concentration import ConcentrationVerifier
from ..verifiers.moments import MomentBoundVerifier, SmallMomentVerifier, TailBoundVerifier
from ..verifiers.transport import TransportVerifier

EXIT_PASSED = 0
EXIT_FAILED = 1
EXIT_CONFIGURATION = 2
FACTORIZATION_PATHS = 16
FACTORIZATION_RTOL = 0.05
DEFAULT_STUDY_GRIDS = "256x32, 512x48, 1024x64"


def _stamp(report, scenario):
    report.seed, report.grid, report.scenario_id = int(scenario.seed), scenario.grid.as_dict(), scenario.scenario_id
    return report


def layer_cake_input(config):
    """The scenario itself or a frozen scipy.stats distribution such as ``expon`` or ``gamma(2)``."""
    source = config.settings["layer_cake_source"].strip()
    if source == "scenario":
        return config.scenario
    name, params = parse_form(source)
    distribution = getattr(stats, name.replace("-", "_"), None)
    if not isinstance(distribution, stats.rv_continuous):
        raise ConfigurationError("layer_cake_source: ", "{!r} is neither 'scenario' nor a continuous scipy.stats "
                                 "distribution".format(source))
    return distribution(*params)


def _factorization_check(config, options):
    scenario = config.scenario
    params = FactorizationParams(alpha=config.number("alpha", optional=True), p=config.number("p"))
    n_paths = min(int(scenario.n_paths), FACTORIZATION_PATHS)
    row = factorization_study([scenario.grid], params, n_paths=n_paths, seed=scenario.seed,
                              n_jobs=options["n_jobs"])[0]
    std_error = row["std_error"] / row["sup_direct"] if row["sup_direct"] > 0 else 0.0
    details = dict(row, alpha=params.alpha, rule=params.rule, sigma="constant(1)")
    report = VerificationReport("factorization", FACTORIZATION_RTOL, row["relative"], std_error, n_paths,
                                row["relative"] <= FACTORIZATION_RTOL, details)
    return [_stamp(report, scenario)]


def run_check(check, config, quiet=True):
    """Run one check of ``config`` and return its list of reports."""
    scenario = config.scenario
    options = {"n_jobs": config.workers, "batch_size": config.number("batch_size", int),
               "margin": config.number("margin"), "bound_scale": config.number("bound_scale"), "quiet": quiet}
    if check == "hypotheses":
        report = check_hypotheses(scenario.coefficients(), scenario.probe_range, scenario.n_probe)
        return [_stamp(report, scenario)]
    if check == "factorization":
        return _factorization_check(config, options)
    X = scenario
    if check == "moment":
        verifier = MomentBoundVerifier(p=config.number("p"), **options)
    elif check == "tail":
        verifier = TailBoundVerifier(p=config.number("p"), lambdas=config.numbers("lambdas"), **options)
    elif check == "small-p-q":
        verifier = SmallMomentVerifier(p=config.number("small_p"), q=config.number("q"), **options)
    elif check == "small-p-eps":
        verifier = SmallMomentVerifier(p=config.number("small_p"), eps=config.number("eps"), **options)
    elif check == "tci":
        verifier = TransportVerifier(form=config.settings["form"], **options)
    elif check == "concentration":
        verifier = ConcentrationVerifier(functional=config.settings["functional"],
                                         radii=config.numbers("radii") or None, **options)
    elif check == "layer-cake":
        verifier = LayerCakeVerifier(p=config.number("small_p"), q=config.number("q"), **options)
        X = layer_cake_input(config)
    elif check == "local-property":
        verifier = LocalPropertyVerifier(threshold=config.number("threshold"), **options)
    else:
        raise ConfigurationError("run_check(): ", "unknown check id {!r}, expected one of {}"
                                 .format(check, list(CHECK_IDS)))
    reports = verifier.fit(X).reports_
    return [_stamp(r, scenario) if r.seed is None else r for r in reports]


def _write_manifest(config_echo, output_dir, status, started, artifacts, extra=None):
    manifest = {"version": __version__, "config": config_echo, "exit_status": status,
                "wall_time": time.perf_counter() - started, "artifacts": artifacts}
    manifest.update(extra or {})
    path = os.path.join(output_dir, "manifest.json")
    with open(path, "w") as handle:
        json.dump(manifest, handle, sort_keys=True, indent=2, default=str)
        handle.write("\n")
    return manifest


def run(config, quiet=True):
    """Execute every check of ``config`` and write one report file per check plus ``manifest.json``.

    Returns
    -------
    status : int
        0 when all checks passed, 1 when one failed, 2 when the scenario violates its hypotheses.
        Library errors raised by a check propagate after a manifest recording
        the error and the artifacts written so far.
    reports : list of VerificationReport
    """
    started = time.perf_counter()
    output_dir = config.prepare_output()
    try:
        config.scenario.validate()
    except HypothesisError as error:
        _write_manifest(config.as_dict(), output_dir, EXIT_CONFIGURATION, started, [],
                        {"error": str(error), "witness": error.witness})
        return EXIT_CONFIGURATION, []
    reports = []
    artifacts = []
    for check in config.checks:
        if not quiet:
            print("spdelab run: {}".format(check))
        try:
            check_reports = run_check(check, config, quiet)
        except Error as error:
            # partial manifest, the caller maps the error to exit status 2
            _write_manifest(config.as_dict(), output_dir, EXIT_CONFIGURATION, started,
                            [os.path.basename(a) for a in artifacts],
                            {"error": str(error), "error_type": type(error).__name__, "failed_check": check,
                             "passed": {r.check_name: r.passed for r in reports}})
            raise
        artifacts += write_reports(check_reports, os.path.join(output_dir, check), config.formats)
        reports += check_reports
    status = EXIT_PASSED if all(r.passed for r in reports) else EXIT_FAILED
    _write_manifest(config.as_dict(), output_dir, status, started, [os.path.basename(a) for a in artifacts],
                    {"passed": {r.check_name: r.passed for r in reports}})
    return status, reports


def _write_rows(header, rows, path=None):
    handle = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)
    finally:
        if path:
            handle.close()


def _table_path(args, name):
    if not args.out:
        return None
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _floats(text):
    try:
        return [float(item) for item in text.replace(";", ",").split(",") if item.strip()]
    except ValueError:
        raise ConfigurationError("flags: ", "{!r} is not a list of numbers".format(text))


def _overrides(args):
    return {key: getattr(args, key, None) for key in DEFAULTS}


def cmd_run(args):
    status, _ = run(load_config(args.config, _overrides(args)), quiet=not args.verbose)
    return status


def cmd_verify(args):
    overrides = _overrides(args)
    overrides["checks"] = args.check_ids
    status, reports = run(load_config(args.config, overrides), quiet=not args.verbose)
    for report in reports:
        print(report)
    return status


def cmd_kernel_table(args):
    times = _floats(args.t)
    points = _floats(args.points)
    rows = [(t, x, y, repr(float(kernel_value(t, x, y)))) for t in times for x in points for y in points]
    _write_rows(["t", "x", "y", "value"], rows, _table_path(args, "kernel_table.csv"))
    return EXIT_PASSED


def cmd_constants(args):
    rows = constants_table(args.T, args.p, q=args.q, eps=args.eps, L_b=args.L_b, L_sigma=args.L_sigma,
                           K_sigma=args.K_sigma, small_p=args.small_p)
    _write_rows(["name", "value", "log_value"], [(name, repr(v), repr(lv)) for name, v, lv in rows],
                _table_path(args, "constants.csv"))
    return EXIT_PASSED


def cmd_simulate(args):
    config = load_config(args.config, _overrides(args))
    scenario = config.scenario
    output_dir = config.prepare_output()
    coeffs = scenario.coefficients()
    u0 = scenario.initial_values()
    for k in range(int(scenario.n_paths)):
        W = sample_white_noise(scenario.grid, scenario.seed, k)
        solve_mild(u0, coeffs, W).to_csv(os.path.join(output_dir, "field_{:05d}.csv".format(k)))
        if args.save_noise:
            W.save(os.path.join(output_dir, "noise_{:05d}.bin".format(k)))
        if args.verbose:
            print("spdelab simulate: path {}/{}".format(k + 1, scenario.n_paths))
    return EXIT_PASSED


def _study_grids(text, T):
    grids = []
    for item in text.replace(";", ",").split(","):
        if item.strip():
            try:
                nt, nx = (int(v) for v in item.lower().split("x"))
            except ValueError:
                raise ConfigurationError("--grids: ", "expected entries like 256x32, got {!r}".format(item))
            grids.append(SpaceTimeGrid(T, nt, nx))
    return grids


def cmd_convergence(args):
    config = load_config(args.config, _overrides(args))
    scenario = config.scenario
    path = os.path.join(config.prepare_output(), "convergence_{}.csv".format(args.study))
    if args.study == "factorization":
        params = FactorizationParams(alpha=config.number("alpha", optional=True), p=config.number("p"))
        rows = factorization_study(_study_grids(args.grids, scenario.grid.T), params,
                                   n_paths=min(int(scenario.n_paths), FACTORIZATION_PATHS), seed=scenario.seed,
                                   n_jobs=config.workers)
        header = ["nt", "nx", "residual", "std_error", "sup_direct", "relative"]
        _write_rows(header, [[row[key] for key in header] for row in rows], path)
        residuals = [row["residual"] for row in rows]
        decreasing = all(a > b for a, b in zip(residuals[:-1], residuals[1:]))
        return EXIT_PASSED if decreasing and rows[-1]["relative"] <= FACTORIZATION_RTOL else EXIT_FAILED
    grids, differences = self_convergence(scenario.u0, scenario.coefficients(), scenario.grid, scenario.seed,
                                          n_paths=int(scenario.n_paths), levels=args.levels)
    rows = [[level, grids[level + 1].nt, grids[level + 1].nx, float(np.mean(differences[:, level])),
             float(np.std(differences[:, level], ddof=1) / np.sqrt(len(differences))) if len(differences) > 1
             else 0.0] for level in range(len(grids) - 1)]
    _write_rows(["level", "fine_nt", "fine_nx", "mean_sup_difference", "std_error"], rows, path)
    return EXIT_PASSED


def _add_run_flags(parser):
    parser.add_argument("--config", default=None, help="flat key = value configuration file")
    parser.add_argument("--verbose", action="store_true", help="print progress lines")
    for key in DEFAULTS:
        if key != "checks":
            parser.add_argument("--" + key, dest=key, default=None, help="overrides '{}' (default {!r})"
                                .format(key, DEFAULTS[key]))


def build_parser():
    parser = argparse.ArgumentParser(prog="spdelab", description="Monte Carlo checks of moment, tail and "
                                     "transportation inequalities for the stochastic heat equation.")
    parser.add_argument("--version", action="version", version="%(prog)s " + __version__)
    commands = parser.add_subparsers(dest="command", required=True)

    run_parser = commands.add_parser("run", help="run the checks listed in a configuration")
    _add_run_flags(run_parser)
    run_parser.add_argument("--checks", dest="checks", default=None, help="comma separated check ids")
    run_parser.set_defaults(func=cmd_run)

    verify = commands.add_parser("verify", help="run the given checks")
    verify.add_argument("check_ids", nargs="+", choices=CHECK_IDS, metavar="check", help=", ".join(CHECK_IDS))
    _add_run_flags(verify)
    verify.set_defaults(func=cmd_verify)

    table = commands.add_parser("kernel-table", help="values of the Dirichlet heat kernel")
    table.add_argument("--t", default="0.5", help="comma separated times")
    table.add_argument("--points", default="0, 0.25, 0.5, 0.75, 1", help="comma separated space points")
    table.add_argument("--out", default=None, help="directory for kernel_table.csv (stdout otherwise)")
    table.set_defaults(func=cmd_kernel_table)

    constants = commands.add_parser("constants", help="explicit constants of the inequalities")
    constants.add_argument("--T", type=float, default=1.0)
    constants.add_argument("--p", type=float, default=12.0)
    constants.add_argument("--q", type=float, default=None)
    constants.add_argument("--eps", type=float, default=None)
    constants.add_argument("--small_p", type=float, default=2.0)
    constants.add_argument("--L_b", type=float, default=0.0)
    constants.add_argument("--L_sigma", type=float, default=0.0)
    constants.add_argument("--K_sigma", type=float, default=1.0)
    constants.add_argument("--out", default=None, help="directory for constants.csv (stdout otherwise)")
    constants.set_defaults(func=cmd_constants)

    simulate = commands.add_parser("simulate", help="solve paths and write them as t,x,value CSV")
    _add_run_flags(simulate)
    simulate.add_argument("--save-noise", dest="save_noise", action="store_true",
                          help="also write the noise increments of every path in binary form")
    simulate.set_defaults(func=cmd_simulate)

    convergence = commands.add_parser("convergence", help="refinement studies")
    convergence.add_argument("study", choices=("factorization", "solver"))
    _add_run_flags(convergence)
    convergence.add_argument("--grids", default=DEFAULT_STUDY_GRIDS, help="factorization grids, e.g. 256x32,512x48")
    convergence.add_argument("--levels", type=int, default=3, help="solver refinement levels")
    convergence.set_defaults(func=cmd_convergence)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Error as error:
        print("spdelab: {}".format(error), file=sys.stderr)
        return EXIT_CONFIGURATION


if __name__ == "__main__":
    sys.exit(main())
