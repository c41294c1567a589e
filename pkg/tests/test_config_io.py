import math

import numpy as np
import pytest

from iwp.config import ConfigError, config_keys, load_config, parse_config_text
from iwp.io import SchemaError, check_uniform, read_measurements, write_measurements
from iwp.model import MechParams, Regime


def test_defaults_are_the_reference_values():
    cfg = parse_config_text("")
    assert cfg.mech == MechParams()
    assert cfg.friction.r_S == 0.0026
    o = cfg.observer
    assert o.x0 == pytest.approx((-math.pi / 10, 1.0, 1.0))
    assert o.P0 == (0.00165, 0.01, 0.1)
    assert o.Q == (0.0, 0.01, 0.1)
    assert o.R == 0.001
    assert (o.alpha, o.beta) == (10.0, 5.0)
    assert cfg.dt == 0.005
    assert cfg.selector.r_var == 0.001


def test_full_file():
    text = """
    # a comment
    params.a = 0.2
    params.friction = off
    sim.t_end = 12.5     # trailing comment
    sim.x0 = pi, 0, -1
    sim.q_diag = 0, 1e-6, 1e-6
    sim.seed = 42
    observer.kind = nol
    observer.nol_method = poles
    observer.poles = 0.5, 0.6, 0.7
    observer.project_on_stick = yes
    selector.tie_policy = 2
    """
    cfg = parse_config_text(text)
    assert cfg.mech.a == 0.2
    assert cfg.friction is None
    assert cfg.t_end == 12.5
    assert cfg.x0 == (math.pi, 0.0, -1.0)
    assert cfg.seed == 42
    assert cfg.observer.kind == "nol"
    assert cfg.observer.poles == (0.5, 0.6, 0.7)
    assert cfg.observer.project_on_stick
    assert cfg.selector.tie_policy == Regime.STICKING
    sc = cfg.sim_config()
    assert sc.noise.q_diag == (0.0, 1e-6, 1e-6)


@pytest.mark.parametrize(
    "text",
    [
        "sim.tend = 3",
        "observer.gain = 1",
        "params.theta_c = 1",
        "just a line",
        "sim.x0 = 1, 2",
        "sim.t_end = abc",
        "sim.t_end = 0",
        "params.theta1 = -1",
        "params.r_C = 0.01",
        "observer.kind = ukf",
        "observer.alpha = 0",
        "observer.R = 0",
        "observer.nol_method = poles",
        "observer.nol_mode = continuous",
        "selector.r_var = 0",
        "sim.r_var = -1",
        "params.friction = maybe",
        "sim.x0 = inf, 0, 0",
    ],
)
def test_invalid_configs_are_rejected(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_referenced_files_must_exist(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("io.measurements = nowhere.csv\n")
    with pytest.raises(ConfigError):
        load_config(p)
    (tmp_path / "m.csv").write_text("t,y,u\n0,0,0\n")
    p.write_text("io.measurements = m.csv\n")
    assert load_config(p).io.measurements == str(tmp_path / "m.csv")


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.cfg")


def test_key_listing():
    keys = config_keys()
    assert "observer.alpha" in keys and "params.theta1" in keys
    assert all(k.split(".")[0] in {"params", "sim", "observer", "selector", "io"} for k in keys)


# -- measurement files -------------------------------------------------------------


def test_measurement_round_trip(tmp_path):
    t = np.arange(100) * 0.005
    y = np.sin(t) / 3
    u = np.cos(t) * 1e-3
    p = tmp_path / "m.csv"
    write_measurements(p, t, y, u)
    m = read_measurements(p)
    np.testing.assert_array_equal(m.t, t)
    np.testing.assert_array_equal(m.y, y)
    np.testing.assert_array_equal(m.u, u)
    assert m.dt == pytest.approx(0.005)
    assert m.omega1 is None
    assert b"\r\n" not in p.read_bytes()


def test_reference_columns(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("t,y,u,omega1,omega2\n0,0,0,1,2\n0.005,0,0,3,4\n")
    m = read_measurements(p)
    assert list(m.omega2) == [2.0, 4.0]


def test_non_uniform_timestamps_name_the_row(tmp_path):
    p = tmp_path / "m.csv"
    p.write_text("t,y,u\n0,0,0\n0.005,0,0\n0.010,0,0\n0.016,0,0\n0.021,0,0\n")
    with pytest.raises(SchemaError) as err:
        read_measurements(p)
    assert err.value.row == 4


def test_grid_must_match_configured_step():
    with pytest.raises(SchemaError):
        check_uniform([0.0, 0.01, 0.02], dt=0.005)
    assert check_uniform([0.0, 0.005, 0.01], dt=0.005) == 0.005


@pytest.mark.parametrize(
    "content",
    ["", "t,y,u\n", "a,b,c\n1,2,3\n", "t,y,u,extra\n0,0,0,0\n", "t,y,u\n0,zero,0\n", "t,y,u\n0,0\n", "t,y,u\n0,nan,0\n"],
)
def test_schema_violations(tmp_path, content):
    p = tmp_path / "m.csv"
    p.write_text(content)
    with pytest.raises(SchemaError):
        read_measurements(p)


def test_decreasing_time_is_rejected():
    with pytest.raises(SchemaError):
        check_uniform([0.01, 0.005, 0.0])
