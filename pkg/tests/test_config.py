import json

import numpy as np
import pytest

import slitqubit as sq
from slitqubit.config import ConfigError, load_config, parse_config


BASE = {
    "geometry": {
        "lambda_pump_nm": 413.1,
        "z_a_mm": 200.0,
        "z_minus_za_mm": 600.0,
        "s_mm": 0.25,
        "a_mm": 0.05,
        "b_mm": 0.05,
    }
}


def make(**overrides):
    data = json.loads(json.dumps(BASE))
    for key, value in overrides.items():
        data[key] = value
    return data


def test_parse_full_config_to_si_units():
    data = make(
        pump={"type": "gaussian", "waist_mm": 0.4, "center_mm": 0.1},
        calibration={"R0_hz": 2000.0, "time_s": 5.0},
        noise={"seed": 7, "noiseless": False},
        mle={"max_iterations": 500, "parameter_tolerance": 1e-6, "model": "gaussian-approx", "initializer": "maximally-mixed"},
        output={"figures": False, "figure_dir": "figs"},
    )
    cfg = parse_config(data)
    geom = cfg.geometry
    assert geom.lambda_pump == pytest.approx(413.1e-9, rel=1e-15)
    assert geom.z_a == pytest.approx(0.2, rel=1e-15)
    assert geom.z == pytest.approx(0.8, rel=1e-15)
    assert geom.s == pytest.approx(0.25e-3, rel=1e-15)
    assert geom.a == pytest.approx(0.05e-3, rel=1e-15)
    assert geom.b == pytest.approx(0.05e-3, rel=1e-15)
    assert isinstance(cfg.pump, sq.Gaussian)
    assert cfg.pump.waist == pytest.approx(0.4e-3, rel=1e-15)
    assert cfg.pump.center == pytest.approx(0.1e-3, rel=1e-15)
    assert cfg.R0 == 2000.0
    assert cfg.time == 5.0
    assert cfg.seed == 7
    assert cfg.noiseless is False
    assert cfg.mle.max_iterations == 500
    assert cfg.mle.model == "gaussian-approx"
    assert cfg.mle.initializer == "maximally-mixed"
    assert cfg.output.figures is False
    assert cfg.output.figure_dir == "figs"


def test_parse_defaults():
    cfg = parse_config(make())
    assert isinstance(cfg.pump, sq.PlaneWave)
    assert cfg.R0 == 1000.0
    assert cfg.time == 1.0
    assert cfg.seed is None
    assert cfg.noiseless is False
    assert cfg.mle is None
    assert cfg.output.figures is True
    assert cfg.output.figure_dir is None


def test_parse_geometry_length_override():
    data = make()
    data["geometry"]["L_mm"] = 50.0
    cfg = parse_config(data)
    assert cfg.geometry.L_override == pytest.approx(0.05, rel=1e-15)
    assert sq.derive_params(cfg.geometry).L == pytest.approx(0.05, rel=1e-15)


def test_parse_pump_variants():
    assert isinstance(parse_config(make(pump={"type": "plane-wave"})).pump, sq.PlaneWave)
    odd = parse_config(make(pump={"type": "odd-mode", "waist_mm": 0.3})).pump
    assert isinstance(odd, sq.OddMode)
    assert odd.waist == pytest.approx(0.3e-3, rel=1e-15)
    tab = parse_config(
        make(pump={"type": "tabulated", "samples": [[-0.5, 0.0, 0.0], [0.5, 1.0, -1.0]]})
    ).pump
    assert isinstance(tab, sq.Tabulated)
    xs = [s[0] for s in tab.samples]
    assert xs == pytest.approx([-0.5e-3, 0.5e-3], rel=1e-15)
    assert tab.samples[1][1] == 1.0
    assert tab.samples[1][2] == -1.0


def test_parsed_config_builds_state():
    cfg = parse_config(make(pump={"type": "odd-mode", "waist_mm": 0.4}))
    rho = sq.to_density(sq.build_state(cfg.pump, cfg.geometry))
    assert sq.concurrence(rho) == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize(
    "mutate, fragment",
    [
        (lambda d: d.pop("geometry"), "geometry"),
        (lambda d: d["geometry"].pop("s_mm"), "s_mm"),
        (lambda d: d["geometry"].__setitem__("s_mm", "wide"), "s_mm"),
        (lambda d: d["geometry"].__setitem__("tilt_deg", 3.0), "tilt_deg"),
        (lambda d: d.__setitem__("pump", {"type": "bessel"}), "pump"),
        (lambda d: d.__setitem__("pump", {"type": "gaussian"}), "waist_mm"),
        (lambda d: d.__setitem__("pump", {"type": "gaussian", "waist_mm": -0.4}), "waist_mm"),
        (lambda d: d.__setitem__("calibration", {"R0_hz": 0.0}), "R0_hz"),
        (lambda d: d.__setitem__("calibration", {"time_s": -1.0}), "time_s"),
        (lambda d: d.__setitem__("noise", {"seed": 1.5}), "seed"),
        (lambda d: d.__setitem__("noise", {"noiseless": "yes"}), "noiseless"),
        (lambda d: d.__setitem__("mle", {"model": "exact"}), "model"),
        (lambda d: d.__setitem__("mle", {"max_iterations": -2}), "max_iterations"),
        (lambda d: d.__setitem__("output", {"figures": 1}), "figures"),
        (lambda d: d.__setitem__("detector", {}), "detector"),
    ],
)
def test_parse_config_rejections(mutate, fragment):
    data = make()
    mutate(data)
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert fragment in str(err.value)


def test_parse_config_invalid_geometry_values():
    data = make()
    data["geometry"]["s_mm"] = 0.01  # below the slit half width
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert "geometry" in str(err.value)


def test_load_config_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps(make()))
    cfg = load_config(path)
    assert cfg.geometry.s == pytest.approx(0.25e-3, rel=1e-15)


def test_load_config_bad_json(tmp_path):
    path = tmp_path / "run.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)
