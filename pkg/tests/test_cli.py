# tests/test_cli.py

import logging
import os

import numpy as np
import pytest
import yaml

from decoherence_lab import orchestrator
from decoherence_lab.config import load_config, validate_config
from decoherence_lab.errors import ConfigNotFoundError, ConfigValidationError, ObservableError
from decoherence_lab.logging_config import LIBRARY_LOGGER
from decoherence_lab.main import EXIT_CONFIG_INVALID, EXIT_CONFIG_NOT_FOUND, EXIT_OK, main
from decoherence_lab.models import Grid1D, MapOrder
from decoherence_lab.observables import Profile, TimeSeries
from decoherence_lab.results_io import write_columns, write_csv
from decoherence_lab.wigner import PhaseSpaceField

GRAVITY_CONFIG = {
    "scenario": "ehrenfest",
    "physics": {"x0": 0.0, "p0": 3.0, "g": 1.0},
    "gamma_inv_list": [0.0, 0.5],
    "grids": {"time_points": 11},
}


def _write_yaml(path, data) -> str:
    with open(path, "w", encoding="utf-8") as f:
        yaml.safe_dump(data, f)
    return str(path)


# --- Config ---

def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigNotFoundError):
        load_config(str(tmp_path / "nope.yaml"))


def test_unknown_key_is_rejected(tmp_path):
    raw = dict(GRAVITY_CONFIG, physics={**GRAVITY_CONFIG["physics"], "frictoin": 0.1})
    with pytest.raises(ConfigValidationError, match="frictoin"):
        load_config(_write_yaml(tmp_path / "bad.yaml", raw))


def test_empty_gamma_list_is_rejected():
    with pytest.raises(ConfigValidationError):
        validate_config(dict(GRAVITY_CONFIG, gamma_inv_list=[]))


@pytest.mark.parametrize(
    "change",
    [
        {"gamma_inv_list": [-0.1]},
        {"times": [0.0, 2.0, 1.0]},
        {"physics": {"x0": 0.0, "p0": 1.0}},
        {"grids": {"R_points": 200}},
    ],
)
def test_invalid_contents(change):
    with pytest.raises(ConfigValidationError):
        validate_config(dict(GRAVITY_CONFIG, **change))


def test_missing_physics_is_named():
    with pytest.raises(ConfigValidationError, match="physics.V0"):
        validate_config({"scenario": "tunnel", "physics": {"sigma0": 1.0, "x0": -10.0, "p0": 2.0, "L": 1.0}})


def test_scenario_comes_from_the_command_line(tmp_path):
    raw = {k: v for k, v in GRAVITY_CONFIG.items() if k != "scenario"}
    path = _write_yaml(tmp_path / "cfg.yaml", raw)
    assert load_config(path, scenario="ehrenfest").scenario == "ehrenfest"
    with pytest.raises(ConfigValidationError):
        load_config(_write_yaml(tmp_path / "other.yaml", GRAVITY_CONFIG), scenario="tunnel")


def test_overrides_replace_file_values(tmp_path, monkeypatch):
    monkeypatch.setenv("DECOHERENCE_LAB_OUTPUT_DIR", "from_env")
    path = _write_yaml(tmp_path / "cfg.yaml", GRAVITY_CONFIG)
    config = load_config(path)
    assert config.output_dir == "from_env"
    assert config.map_order is MapOrder.FIRST_ORDER

    config = load_config(path, overrides={"gamma_inv_list": [0.3], "map_order": "exact", "run": {"output_dir": "cli"}})
    assert config.gamma_inv_list == [0.3]
    assert config.map_order is MapOrder.EXACT
    assert config.output_dir == "cli"


def test_shipped_configs_validate():
    config_dir = os.path.join(os.path.dirname(os.path.dirname(__file__)), "configs")
    for name in orchestrator.PLUGIN_REGISTRY:
        assert load_config(os.path.join(config_dir, f"{name}.yaml")).scenario == name


# --- CSV output ---

def test_time_series_csv(tmp_path):
    series = TimeSeries(times=[0.0, 0.5, 1.0], values=[0.0, 0.25, 1.0], label="transmission")
    assert write_csv(series, str(tmp_path / "s.csv")) == "s.csv"
    lines = (tmp_path / "s.csv").read_text(encoding="utf-8").split("\n")
    assert lines[0] == "t [hbar=m=1 units],transmission"
    assert lines[2] == "0.5,0.25"
    assert len([line for line in lines if line]) == 4


def test_profile_csv_uses_coordinate_and_unit(tmp_path):
    profile = Profile(coordinates=np.arange(3.0), values=np.ones(3), label="weights", coordinate_name="n")
    write_csv(profile, str(tmp_path / "p.csv"), value_name="weight", value_unit="probability")
    assert (tmp_path / "p.csv").read_text(encoding="utf-8").startswith("n,weight [probability]\n")


def test_phase_space_csv_is_long_format(tmp_path):
    R, u = Grid1D(lower=0.0, upper=1.0, count=3), Grid1D(lower=-1.0, upper=1.0, count=5)
    field = PhaseSpaceField(R_grid=R, u_grid=u, values=np.zeros((3, 5)))
    write_csv(field, str(tmp_path / "w.csv"))
    lines = (tmp_path / "w.csv").read_text(encoding="utf-8").splitlines()
    assert lines[0] == "R,u,W"
    assert len(lines) == 16


def test_empty_result_writes_header_only(tmp_path):
    write_csv(TimeSeries(times=[], values=[], label="empty"), str(tmp_path / "e.csv"))
    assert (tmp_path / "e.csv").read_text(encoding="utf-8").splitlines() == ["t [hbar=m=1 units],empty"]


def test_non_finite_values_are_refused(tmp_path):
    with pytest.raises(ObservableError):
        write_columns({"t": np.array([0.0, 1.0]), "x": np.array([1.0, np.nan])}, str(tmp_path / "nan.csv"))
    assert not (tmp_path / "nan.csv").exists()


# --- Runs ---

def test_run_scenario_writes_outputs_and_metadata(tmp_path):
    config = validate_config(GRAVITY_CONFIG)
    report = orchestrator.run_scenario(config, output_dir=str(tmp_path))
    assert report["status"] == "success"
    for name in ("gravity_moments_ginv0.csv", "gravity_moments_ginv0.5.csv", "metadata.txt", "run.log"):
        assert (tmp_path / name).exists()
    metadata = (tmp_path / "metadata.txt").read_text(encoding="utf-8")
    assert "status = success" in metadata
    assert "summary.gravity.ginv0.peak_height = 4.5" in metadata


def test_failed_run_leaves_no_partial_outputs(tmp_path, monkeypatch):
    plugin = orchestrator.PLUGIN_REGISTRY["ehrenfest"]

    def failing(config, output_dir, report, run_logger):
        plugin._write_columns({"t": np.zeros(2)}, output_dir, "partial.csv", report)
        raise ObservableError("simulated failure")

    monkeypatch.setattr(plugin, "_gravity", failing)
    with pytest.raises(ObservableError):
        orchestrator.run_scenario(validate_config(GRAVITY_CONFIG), output_dir=str(tmp_path))
    assert os.listdir(tmp_path) == []


def test_main_exit_codes(tmp_path):
    assert main(["ehrenfest", "--config", str(tmp_path / "missing.yaml")]) == EXIT_CONFIG_NOT_FOUND

    bad = _write_yaml(tmp_path / "bad.yaml", dict(GRAVITY_CONFIG, map_order="third"))
    assert main(["ehrenfest", "--config", bad]) == EXIT_CONFIG_INVALID

    good = _write_yaml(tmp_path / "good.yaml", GRAVITY_CONFIG)
    out = tmp_path / "out"
    assert main(["ehrenfest", "--config", good, "--gamma-inv", "0.2", "--out", str(out)]) == EXIT_OK
    assert sorted(os.listdir(out)) == ["gravity_moments_ginv0.2.csv", "metadata.txt", "run.log"]


def test_packet_moving_away_is_rejected(tmp_path):
    tunnel = {
        "scenario": "tunnel",
        "physics": {"sigma0": 1.0, "x0": -10.0, "p0": -5.0, "V0": 3.0, "L": 1.0},
        "gamma_inv_list": [0.0],
    }
    with pytest.raises(ConfigValidationError, match="p0 > 0"):
        validate_config(tunnel)
    arrival = {"scenario": "arrival", "physics": {"sigma0": 1.0, "x0": -10.0, "p0": 0.0}}
    with pytest.raises(ConfigValidationError, match="p0 > 0"):
        validate_config(arrival)
    with pytest.raises(ConfigValidationError, match="detector_x"):
        validate_config({"scenario": "arrival", "physics": {"sigma0": 1.0, "x0": 2.0, "p0": 1.0}})

    path = _write_yaml(tmp_path / "tunnel.yaml", tunnel)
    assert main(["tunnel", "--config", path, "--out", str(tmp_path / "out")]) == EXIT_CONFIG_INVALID


def test_parameters_rejected_inside_a_plugin_are_config_errors(tmp_path, monkeypatch):
    plugin = orchestrator.PLUGIN_REGISTRY["ehrenfest"]

    def empty_grid(config, output_dir, report, run_logger):
        Grid1D(lower=1.0, upper=0.0, count=3)

    monkeypatch.setattr(plugin, "_gravity", empty_grid)
    with pytest.raises(ConfigValidationError, match="ehrenfest"):
        orchestrator.run_scenario(validate_config(GRAVITY_CONFIG), output_dir=str(tmp_path / "run"))

    path = _write_yaml(tmp_path / "cfg.yaml", GRAVITY_CONFIG)
    assert main(["ehrenfest", "--config", path, "--out", str(tmp_path / "cli")]) == EXIT_CONFIG_INVALID


class _RecordCounter(logging.Handler):
    def __init__(self):
        super().__init__(level=logging.DEBUG)
        self.names = []

    def emit(self, record):
        self.names.append(record.name)


def test_library_records_do_not_reach_the_root_logger(tmp_path):
    counter = _RecordCounter()
    root = logging.getLogger()
    root.addHandler(counter)
    try:
        orchestrator.run_scenario(validate_config(GRAVITY_CONFIG), output_dir=str(tmp_path))
    finally:
        root.removeHandler(counter)
    assert not [name for name in counter.names if name.startswith(LIBRARY_LOGGER)]
    assert logging.getLogger(LIBRARY_LOGGER).propagate
    assert "Total scenario run" in (tmp_path / "run.log").read_text(encoding="utf-8")


def test_warnings_logged_while_finishing_reach_metadata(tmp_path, monkeypatch):
    finalize = orchestrator.RunReport.finalize

    def finalize_with_warning(self, success):
        logging.getLogger("decoherence_lab.report_collector").warning("late notice while finishing")
        return finalize(self, success)

    monkeypatch.setattr(orchestrator.RunReport, "finalize", finalize_with_warning)
    report = orchestrator.run_scenario(validate_config(GRAVITY_CONFIG), output_dir=str(tmp_path))
    assert "decoherence_lab.report_collector: late notice while finishing" in report["warnings"]
    metadata = (tmp_path / "metadata.txt").read_text(encoding="utf-8")
    assert "late notice while finishing" in metadata


# --- Scenario runs on small grids ---

FAST_CONFIGS = {
    "interference": (
        {
            "physics": {"sigma0": 1.0, "x0": 5.0, "p0": 1.0},
            "gamma_inv_list": [0.0, 0.5],
            "times": [0.0, 5.0],
            "grids": {"momentum_points": 128, "x_points": 101},
        },
        6,
    ),
    "tunnel": (
        {
            "physics": {"sigma0": 1.0, "x0": -10.0, "p0": 2.0, "V0": 3.0, "L": 1.0},
            "gamma_inv_list": [0.0, 0.5],
            "times": [0.5 * i for i in range(21)],
            "grids": {"k_points": 96, "x_points": 101},
        },
        10,
    ),
    "bouncer": (
        {
            "physics": {"sigma0": 1.0, "z0": 5.0},
            "gamma_inv_list": [0.0, 0.5],
            "map_order": "exact",
            "grids": {"n_max": 10, "time_points": 21},
        },
        5,
    ),
    "entropy": (
        {
            "physics": {"sigma0": 1.0, "z0": 5.0},
            "gamma_inv_list": [0.5],
            "grids": {"n_max": 10, "time_points": 11},
        },
        2,
    ),
    "arrival": (
        {
            "physics": {"sigma0": 1.0, "x0": -10.0, "p0": 2.0},
            "gamma_inv_list": [0.0, 0.2],
            "times": [0.0, 20.0],
            "grids": {"momentum_points": 256, "time_points": 201},
        },
        2,
    ),
    "wigner": (
        {
            "physics": {"sigma0": 1.0, "x0": 0.0, "p0": 1.0, "c1": 0.5},
            "gamma_inv_list": [0.5],
            "times": [0.0, 1.0],
            "grids": {"momentum_points": 256, "R_points": 241, "u_points": 241},
        },
        2,
    ),
}


@pytest.mark.slow
@pytest.mark.parametrize("scenario", sorted(FAST_CONFIGS))
def test_scenario_writes_its_csv_files(tmp_path, scenario):
    raw, expected = FAST_CONFIGS[scenario]
    report = orchestrator.run_scenario(validate_config(dict(raw, scenario=scenario)), output_dir=str(tmp_path))
    assert report["status"] == "success"
    csv_files = [name for name in report["outputs"] if name.endswith(".csv")]
    assert len(csv_files) == expected
    for name in report["outputs"]:
        assert (tmp_path / name).stat().st_size > 0
    assert sorted(os.listdir(tmp_path)) == sorted(report["outputs"] + ["run.log"])
    assert "status = success" in (tmp_path / "metadata.txt").read_text(encoding="utf-8")


def test_repeated_runs_write_identical_csv_files(tmp_path):
    raw, _ = FAST_CONFIGS["interference"]
    config = validate_config(dict(raw, scenario="interference"))
    first = orchestrator.run_scenario(config, output_dir=str(tmp_path / "a"))
    second = orchestrator.run_scenario(config, output_dir=str(tmp_path / "b"))
    names = [name for name in first["outputs"] if name.endswith(".csv")]
    assert names and names == [name for name in second["outputs"] if name.endswith(".csv")]
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
