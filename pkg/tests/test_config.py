import json
import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from geopump.config import ConfigError, RunConfig


def test_defaults_round_trip():
    cfg = RunConfig()
    assert RunConfig.from_json(cfg.to_json()) == cfg


@settings(max_examples=100)
@given(
    st.floats(-5, 5, allow_nan=False),
    st.floats(0.01, 10),
    st.floats(0, 1),
    st.floats(-math.pi, math.pi, exclude_min=True),
    st.integers(0, 2**64 - 1),
    st.one_of(st.none(), st.tuples(st.floats(-10, 10), st.floats(-10, 10))),
)
def test_round_trip_lossless(m, omega, c, dphi, seed, phi0):
    cfg = RunConfig(m=m, omega=omega, c=c, dphi=dphi, seed=seed, phi0=phi0)
    back = RunConfig.from_json(cfg.to_json())
    assert back == cfg
    assert back.to_json() == cfg.to_json()


@pytest.mark.parametrize(
    "doc,field",
    [
        ({"bogus": 1}, "bogus"),
        ({"dt": -0.1}, "dt"),
        ({"dt": "0.1"}, "dt"),
        ({"n_traj": 1}, "n_traj"),
        ({"n_traj": 2.5}, "n_traj"),
        ({"seed": True}, "seed"),
        ({"c": 1.5}, "c"),
        ({"dphi": -4.0}, "dphi"),
        ({"p": 4, "q": 2}, "q"),
        ({"axes": "11"}, "axes"),
        ({"phi0": [1.0]}, "phi0"),
        ({"out": ""}, "out"),
        ({"t_end": -1}, "t_end"),
    ],
)
def test_invalid_fields_named(doc, field):
    with pytest.raises(ConfigError) as info:
        RunConfig.from_dict(doc)
    assert info.value.field == field
    assert f"'{field}'" in str(info.value)


def test_rejects_non_object_and_bad_json(tmp_path):
    with pytest.raises(ConfigError):
        RunConfig.from_json("[1, 2]")
    with pytest.raises(ConfigError):
        RunConfig.from_json("{")
    with pytest.raises(ConfigError):
        RunConfig.from_json('{"m": NaN}')
    with pytest.raises(ConfigError):
        RunConfig.load(tmp_path / "missing.json")


def test_load_and_ensemble(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n_traj": 8, "m": 1.5, "axes": "12"}))
    cfg = RunConfig.load(path)
    ens = cfg.ensemble()
    assert ens.n_traj == 8 and ens.m == 1.5
    assert cfg.axes_index == (0, 1)
    assert cfg.ensemble(t_end=5.0).t_end == 5.0
