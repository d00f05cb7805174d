import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from fracspl.config import PRESETS, ConfigError, DataSpec, load_config, parse_config
from fracspl.csvio import format_number, read_csv, write_csv


def minimal(**problem):
    return {"problem": {"alpha": 0.5, "tau_q_alpha": 0.5, **problem}}


# presets and data --------------------------------------------------------------


def test_preset_names():
    assert set(PRESETS) == {"sin_pi_over_L", "bump", "zero", "const"}


@pytest.mark.parametrize("name", ["sin_pi_over_L", "bump", "zero"])
def test_presets_vanish_at_endpoints(name):
    f = DataSpec.parse(name, "U0").function(2.0)
    assert np.abs(f(np.array([0.0, 2.0]))).max() < 1e-15


def test_preset_values():
    x = np.array([0.5])
    assert DataSpec.parse("sin_pi_over_L", "U0").function(1.0)(x)[0] == pytest.approx(1.0)
    assert DataSpec.parse("bump", "U0").function(1.0)(x)[0] == pytest.approx(1.0)
    assert DataSpec.parse({"preset": "const", "scale": 2.5}, "V0").function(1.0)(x)[0] == 2.5


def test_samples_interpolated():
    f = DataSpec.parse({"samples": [0.0, 2.0, 0.0]}, "U0").function(1.0)
    assert f(np.array([0.25, 0.5])) == pytest.approx([1.0, 2.0])


@pytest.mark.parametrize(
    "raw",
    [
        "nope",
        {"preset": "zero", "samples": [0, 0]},
        {},
        {"samples": [1.0]},
        {"preset": "zero", "colour": 1},
        3.0,
    ],
)
def test_bad_data_specs(raw):
    with pytest.raises(ConfigError):
        DataSpec.parse(raw, "U0")


def test_is_zero():
    assert DataSpec.parse("zero", "F").is_zero
    assert DataSpec.parse({"preset": "const", "scale": 0}, "F").is_zero
    assert DataSpec.parse({"samples": [0, 0, 0]}, "F").is_zero
    assert not DataSpec.parse("const", "F").is_zero


# scenario validation -------------------------------------------------------------


def test_defaults():
    cfg = parse_config(minimal())
    assert cfg.L == 1.0 and cfg.T == 1.0 and cfg.constant_conductivity and cfg.k_bar == 1.0
    assert cfg.precision == 17
    assert cfg.refinement_pairs() == [(32, 32)]


def test_refinement_pairs():
    raw = minimal()
    raw["rothe"] = {"step_counts": [16, 32, 64], "element_counts": [8, 16, 32]}
    assert parse_config(raw).refinement_pairs() == [(16, 8), (32, 16), (64, 32)]
    raw["rothe"] = {"step_counts": [16, 32], "element_count": 10}
    assert parse_config(raw).refinement_pairs() == [(16, 10), (32, 10)]
    raw["rothe"] = {"step_counts": [16, 32], "element_counts": [4, 8, 16]}
    with pytest.raises(ConfigError):
        parse_config(raw).refinement_pairs()


@pytest.mark.parametrize(
    "raw",
    [
        [],
        {},
        {"problem": 1},
        {"problem": {"tau_q_alpha": 0.5}},
        minimal(alpha=1.5),
        minimal(L=0),
        minimal(T=-1),
        minimal(k=0),
        minimal(k=[1.0, -1.0]),
        minimal(U0="const"),
        minimal(U0="unknown"),
        {**minimal(), "rothe": {"step_counts": [32, 16]}},
        {**minimal(), "rothe": {"step_counts": [16, 16]}},
        {**minimal(), "rothe": {"step_counts": [0]}},
        {**minimal(k=[1.0, 2.0]), "rothe": {"element_counts": [4]}},
    ],
)
def test_invalid_configs(raw):
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_variable_conductivity_flag():
    raw = {**minimal(k=[1.0, 2.0, 1.0, 2.0]), "rothe": {"element_count": 4}}
    cfg = parse_config(raw)
    assert not cfg.constant_conductivity


def test_load_config_missing_file_names_path(tmp_path):
    path = tmp_path / "absent.json"
    with pytest.raises(ConfigError, match="absent.json"):
        load_config(path)


def test_load_config_invalid_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)


def test_load_config_malformed_values(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(minimal(L="wide")))
    with pytest.raises(ConfigError):
        load_config(path)


def test_load_config_roundtrip(tmp_path):
    raw = {
        **minimal(a=1.0, U0="sin_pi_over_L", V0={"preset": "bump", "scale": 0.5}),
        "spectral": {"n_modes": 7},
        "output": {"directory": str(tmp_path / "out"), "precision": 12},
    }
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(raw))
    cfg = load_config(path)
    assert cfg.params.a == 1.0 and cfg.n_modes == 7 and cfg.precision == 12
    assert cfg.V0.scale == 0.5


def test_source_is_time_constant():
    cfg = parse_config(minimal(F="const"))
    src = cfg.source()
    x = np.linspace(0, 1, 5)
    assert np.array_equal(src(x, 0.0), src(x, 0.7))


# csv -------------------------------------------------------------------------------


def test_csv_layout(tmp_path):
    path = write_csv(tmp_path / "sub" / "a.csv", ("n", "x"), [(1, 0.5), (2, 1e-300)])
    raw = path.read_bytes()
    assert b"\r" not in raw
    assert raw.splitlines()[0] == b"n,x"
    assert raw.endswith(b"\n")


def test_integers_written_plainly():
    assert format_number(32) == "32"
    assert format_number(True) == "1"


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_roundtrip_exact(values):
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        path = write_csv(Path(tmp) / "v.csv", ("v",), [(v,) for v in values])
        header, rows = read_csv(path)
    assert header == ["v"]
    assert [r[0] for r in rows] == values


def test_csv_roundtrip_reduced_precision(tmp_path):
    values = np.random.default_rng(3).normal(size=50)
    path = write_csv(tmp_path / "v.csv", ("v",), [(v,) for v in values], digits=8)
    _, rows = read_csv(path)
    assert np.array([r[0] for r in rows]) == pytest.approx(values, rel=5e-8)
