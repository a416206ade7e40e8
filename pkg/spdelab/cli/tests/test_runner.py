import csv
import filecmp
import json
import os
from os.path import dirname, join

import pytest

from ..config import CHECK_IDS, OUTPUT_ENV, load_config, read_settings
from ..runner import main, run
from ...errors.errors import ConfigurationError
from ...noise.noise_field import WhiteNoiseSample, sample_white_noise

SCENARIO_DIR = join(dirname(__file__), "..", "..", "..", "scenarios")
SMALL_FLAGS = ["--T", "0.25", "--nt", "8", "--nx", "7", "--paths", "12", "--seed", "5"]


def write_config(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_read_settings(tmp_path):
    path = write_config(tmp_path, "# comment\nT = 0.5\nsigma = bounded-rational(2)  # inline\nchecks = moment, tail\n")
    settings = read_settings(path, {"nt": 32, "nx": None, "lambdas": [1.0, 2.0]})
    assert settings["T"] == "0.5"
    assert settings["sigma"] == "bounded-rational(2)"
    assert settings["nt"] == "32"
    assert settings["nx"] == "64"
    assert settings["lambdas"] == "1.0, 2.0"
    with pytest.raises(ConfigurationError):
        read_settings(write_config(tmp_path, "colour = blue\n"))
    with pytest.raises(ConfigurationError):
        read_settings(str(tmp_path / "missing.cfg"))


def test_load_config(tmp_path):
    config = load_config(overrides={"T": "0.5", "nt": "16", "nx": "7", "checks": "moment, tci", "out": str(tmp_path)})
    assert config.checks == ("moment", "tci")
    assert config.formats == ("json", "csv")
    assert config.scenario.grid.as_dict() == {"T": 0.5, "nt": 16, "nx": 7}
    assert config.scenario.n_paths == 1000
    assert config.output_dir == str(tmp_path)
    assert config.numbers("lambdas") == (0.5, 1.0, 2.0)
    assert config.number("alpha", optional=True) is None

    env = load_config(environ={OUTPUT_ENV: str(tmp_path / "env")})
    assert env.output_dir == str(tmp_path / "env")

    for overrides in [{"checks": "moment, bogus"}, {"workers": "0"}, {"format": "xml"}, {"nt": "1.5"},
                      {"T": "-1"}, {"probe_range": "1"}]:
        with pytest.raises(ConfigurationError):
            load_config(overrides=overrides)


@pytest.mark.skipif(not os.path.isdir(SCENARIO_DIR), reason="scenario files are not installed")
def test_scenario_files():
    for name in ["default", "additive", "multiplicative", "drifted"]:
        config = load_config(join(SCENARIO_DIR, name + ".cfg"))
        assert config.scenario.scenario_id == name
        assert all(check in CHECK_IDS for check in config.checks)
        assert config.scenario.validate().passed


def test_constants_command(capsys):
    assert main(["constants", "--T", "1", "--p", "12", "--q", "12", "--eps", "0.5"]) == 0
    names = [row[0] for row in csv.reader(capsys.readouterr().out.splitlines()[1:])]
    for name in ["alpha_star", "c_moment", "c_closed_form", "c_small_p", "c_small_p_eps", "c_tci"]:
        assert name in names


def test_kernel_table_command(tmp_path):
    assert main(["kernel-table", "--t", "0.5", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "kernel_table.csv") as handle:
        assert handle.readline().strip() == "t,x,y,value"
        handle.seek(0)
        rows = list(csv.DictReader(handle))
    assert len(rows) == 25
    centre = [r for r in rows if float(r["x"]) == 0.5 and float(r["y"]) == 0.5][0]
    assert float(centre["value"]) == pytest.approx(0.169548, rel=1e-3)
    assert all(float(r["value"]) == 0.0 for r in rows if float(r["x"]) in (0.0, 1.0))


def test_verify_layer_cake_distribution(tmp_path):
    status = main(["verify", "layer-cake", "--layer_cake_source", "uniform", "--out", str(tmp_path)] + SMALL_FLAGS)
    assert status == 0
    with open(tmp_path / "layer-cake.json") as handle:
        reports = json.load(handle)
    assert reports[0]["check_name"] == "layer-cake"
    assert reports[0]["passed"]
    with open(tmp_path / "manifest.json") as handle:
        manifest = json.load(handle)
    assert manifest["exit_status"] == 0
    assert manifest["config"]["checks"] == ["layer-cake"]
    assert sorted(manifest["artifacts"]) == ["layer-cake.csv", "layer-cake.json"]


def test_hypothesis_violation(tmp_path):
    status = main(["verify", "moment", "--sigma", "affine(1, 0)", "--K_sigma", "1", "--out", str(tmp_path)]
                  + SMALL_FLAGS)
    assert status == 2
    with open(tmp_path / "manifest.json") as handle:
        manifest = json.load(handle)
    assert manifest["exit_status"] == 2
    assert manifest["witness"]["constant"] == "K_sigma"
    assert "point" in manifest["witness"]
    assert not os.path.exists(tmp_path / "moment.json")


def test_configuration_errors(tmp_path):
    assert main(["run", "--checks", "bogus", "--out", str(tmp_path)]) == 2
    assert main(["verify", "moment", "--sigma", "cubic(1)", "--out", str(tmp_path)] + SMALL_FLAGS) == 2
    with pytest.raises(SystemExit) as exit_info:
        main(["verify", "bogus"])
    assert exit_info.value.code == 2


def test_run_is_reproducible(tmp_path):
    outputs = []
    for name, workers in [("a", "1"), ("b", "1"), ("c", "4"), ("d", "8")]:
        config = load_config(overrides={"T": "0.25", "nt": "8", "nx": "7", "paths": "12", "seed": "5",
                                        "sigma": "bounded-rational(1)", "h": "constant(1)", "workers": workers,
                                        "batch_size": "5",
                                        "checks": "hypotheses, moment, tail, small-p-q, tci, local-property",
                                        "out": str(tmp_path / name)})
        status, reports = run(config)
        assert status == 0
        assert len(reports) == 8
        outputs.append(tmp_path / name)
    for other in outputs[1:]:
        for check in ["moment", "tail", "small-p-q", "tci", "local-property"]:
            for suffix in [".json", ".csv"]:
                assert filecmp.cmp(outputs[0] / (check + suffix), other / (check + suffix), shallow=False)


def test_falsification_control_fails(tmp_path):
    status = main(["verify", "moment", "--bound_scale", "1e-40", "--margin", "0", "--out", str(tmp_path)]
                  + SMALL_FLAGS)
    assert status == 1


def test_falsification_control_with_default_margin(tmp_path):
    status = main(["verify", "moment", "--bound_scale", "1e-30", "--T", "1", "--nt", "128", "--nx", "15",
                   "--paths", "2000", "--seed", "0", "--out", str(tmp_path)])
    assert status == 1
    with open(tmp_path / "moment.json") as handle:
        report = json.load(handle)[0]
    assert report["details"]["margin"] == 2.0
    assert report["empirical_estimate"] - 2.0 * report["std_error"] > report["theoretical_bound"]


def test_failing_check_leaves_a_manifest(tmp_path):
    status = main(["verify", "moment", "concentration", "--out", str(tmp_path)] + SMALL_FLAGS)
    assert status == 2
    with open(tmp_path / "manifest.json") as handle:
        manifest = json.load(handle)
    assert manifest["exit_status"] == 2
    assert manifest["failed_check"] == "concentration"
    assert manifest["error_type"] == "DomainError"
    assert sorted(manifest["artifacts"]) == ["moment.csv", "moment.json"]
    assert manifest["passed"] == {"moment": True}


def test_simulate_command(tmp_path):
    assert main(["simulate", "--save-noise", "--out", str(tmp_path), "--sigma", "bounded-rational(1)"]
                + SMALL_FLAGS[:-4] + ["--paths", "2", "--seed", "5"]) == 0
    assert sorted(os.listdir(tmp_path)) == ["field_00000.csv", "field_00001.csv", "noise_00000.bin",
                                           "noise_00001.bin"]
    W = WhiteNoiseSample.load(str(tmp_path / "noise_00001.bin"))
    expected = sample_white_noise(W.grid, 5, 1)
    assert (W.increments == expected.increments).all()
    with open(tmp_path / "field_00000.csv") as handle:
        assert handle.readline().strip() == "t,x,value"
        assert len(handle.readlines()) == 9 * 7


def test_convergence_command(tmp_path):
    assert main(["convergence", "solver", "--levels", "2", "--T", "0.25", "--nt", "2", "--nx", "3", "--paths", "3",
                 "--sigma", "bounded-rational(1)", "--u0", "tent", "--out", str(tmp_path)]) == 0
    with open(tmp_path / "convergence_solver.csv") as handle:
        rows = list(csv.DictReader(handle))
    assert len(rows) == 1
    assert rows[0]["fine_nt"] == "8"
    assert rows[0]["fine_nx"] == "7"
    assert float(rows[0]["mean_sup_difference"]) > 0
