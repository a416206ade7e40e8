import csv
import json
import math

import numpy as np

CSV_COLUMNS = ["check_name", "theoretical_bound", "empirical_estimate", "std_error", "n_paths", "passed",
               "seed", "T", "nt", "nx", "scenario_id", "details"]


def one_sided_pass(estimate, std_error, bound=None, log_bound=None, margin=2.0):
    """Decide ``estimate - margin * std_error <= bound``.

    When the bound is only known through its logarithm the comparison is done
    in log space, which keeps bounds far beyond the double range usable.
    """
    lower = estimate - margin * std_error
    if lower <= 0.0:
        return True
    if log_bound is not None:
        return math.log(lower) <= log_bound
    return lower <= bound


def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return _plain(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    return value


class VerificationReport:
    """Outcome of one check of an inequality or identity.

    Parameters
    ----------
    check_name : str
    theoretical_bound : float
        Right-hand side of the checked inequality (``inf`` when it exceeds
        the double range; see ``details["log_bound"]``).
    empirical_estimate : float
        Monte Carlo (or exact) value of the left-hand side.
    std_error : float
        Standard error of ``empirical_estimate``; 0 for deterministic checks.
    n_paths : int
        Number of simulated paths or samples; 0 for deterministic checks.
    passed : bool
    details : dict, optional
        Free-form JSON-serialisable extras.
    seed : int, optional
    grid : SpaceTimeGrid or dict, optional
    scenario_id : str, optional
    """

    def __init__(self, check_name, theoretical_bound, empirical_estimate, std_error, n_paths, passed,
                 details=None, seed=None, grid=None, scenario_id=None):
        self.check_name = check_name
        self.theoretical_bound = float(theoretical_bound)
        self.empirical_estimate = float(empirical_estimate)
        self.std_error = max(float(std_error), 0.0)
        self.n_paths = int(n_paths)
        self.passed = bool(passed)
        self.details = _plain(details or {})
        self.seed = seed
        self.grid = grid.as_dict() if hasattr(grid, "as_dict") else grid
        self.scenario_id = scenario_id

    @classmethod
    def one_sided(cls, check_name, bound, estimate, std_error, n_paths, margin=2.0, log_bound=None, **kwargs):
        """Report of ``estimate <= bound`` decided with a ``margin``-standard-error allowance."""
        passed = one_sided_pass(estimate, std_error, bound, log_bound, margin)
        details = dict(kwargs.pop("details", None) or {})
        details["margin"] = margin
        if log_bound is not None:
            details["log_bound"] = log_bound
        return cls(check_name, bound, estimate, std_error, n_paths, passed, details, **kwargs)

    def as_dict(self):
        return {"check_name": self.check_name,
                "theoretical_bound": self.theoretical_bound,
                "empirical_estimate": self.empirical_estimate,
                "std_error": self.std_error,
                "n_paths": self.n_paths,
                "passed": self.passed,
                "seed": self.seed,
                "grid": self.grid,
                "scenario_id": self.scenario_id,
                "details": self.details}

    def to_json(self):
        return json.dumps(self.as_dict(), sort_keys=True, indent=2)

    def csv_row(self):
        grid = self.grid or {}
        row = self.as_dict()
        row.update({"T": grid.get("T"), "nt": grid.get("nt"), "nx": grid.get("nx"),
                    "details": json.dumps(self.details, sort_keys=True)})
        return [row[column] for column in CSV_COLUMNS]

    def __repr__(self):
        return "VerificationReport({}: estimate={:.6g} +/- {:.3g}, bound={:.6g}, passed={})".format(
            self.check_name, self.empirical_estimate, self.std_error, self.theoretical_bound, self.passed)


def write_reports(reports, path_stem, formats=("json", "csv")):
    """Write a list of reports as ``<stem>.json`` and/or ``<stem>.csv``; returns the written paths."""
    written = []
    if "json" in formats:
        with open(path_stem + ".json", "w") as handle:
            json.dump([r.as_dict() for r in reports], handle, sort_keys=True, indent=2)
            handle.write("\n")
        written.append(path_stem + ".json")
    if "csv" in formats:
        with open(path_stem + ".csv", "w", newline="") as handle:
            writer = csv.writer(handle)
            writer.writerow(CSV_COLUMNS)
            for report in reports:
                writer.writerow(report.csv_row())
        written.append(path_stem + ".csv")
    return written
