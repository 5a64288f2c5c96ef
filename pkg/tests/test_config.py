import pytest

from hjfront.config import PRESETS, SUITES, load, parse
from hjfront.errors import ConfigError


def _err(raw):
    with pytest.raises(ConfigError) as exc:
        parse(raw)
    return str(exc.value)


def test_defaults_need_data():
    assert "u0" in _err({})


@pytest.mark.parametrize("name", sorted(PRESETS))
def test_presets_parse(name):
    cfg = load(f"builtin:{name}")
    p0, a, g, x_ref, u_ref = cfg.coefficients()
    assert cfg.domain[0] <= x_ref <= cfg.domain[1]
    assert len(p0.values) >= 1


def test_field_paths():
    base = {"u0": "0"}
    assert "delta" in _err({**base, "delta": 0})
    assert "domain" in _err({**base, "domain": [1, -1]})
    assert "model.family" in _err({**base, "model": {"family": "nope"}})
    assert "verify.suites[0]" in _err({**base, "verify": {"suites": ["bogus"]}})
    assert "bogus" in _err({**base, "bogus": 1})
    assert "a.jumps" in _err({**base, "a": {"jumps": [5.0], "pieces": ["1", "2"]}})
    assert "convergence.deltas" in _err({**base, "convergence": {"deltas": [0.1, 0.2]}})
    assert "temple.rule" in _err({**base, "temple": {"rule": "x"}})


def test_overrides_and_delta_scaling():
    cfg = load("builtin:interface", {"delta": 0.1, "h": None, "seed": 7})
    assert cfg.delta == 0.1 and cfg.h == 0.1 and cfg.seed == 7
    assert cfg.verify["deltas"] == [0.1, 0.05, 0.025]
    assert set(cfg.verify["suites"]) == set(SUITES)


def test_yaml_file(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("u0: '0.5*x'\na: 1.2\ndomain: [0, 2]\nhorizon: 0.5\n")
    cfg = load(str(f))
    p0, a, g, x_ref, u_ref = cfg.coefficients()
    assert list(p0.values) == [0.5] and x_ref == 0.0
    f.write_text("u0: [\n")
    with pytest.raises(ConfigError):
        load(str(f))
    with pytest.raises(ConfigError):
        load(str(tmp_path / "missing.yaml"))


def test_forged_defaults():
    cfg = parse({"u0": "0", "verify": {"forged": {}}})
    assert cfg.verify["forged"] == {"p_l": 1.0, "p_r": -1.0, "a": 1.0, "g": 1.0, "x": 0.0}
