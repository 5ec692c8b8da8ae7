import json

import pytest

from gkdvlab.config import SCENARIOS, ConfigError, ExperimentConfig, defaults


@pytest.mark.parametrize("scenario", SCENARIOS)
def test_defaults_validate(scenario):
    cfg = ExperimentConfig.from_dict({"scenario": scenario})
    assert cfg.scenario == scenario
    again = ExperimentConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again.data == cfg.data


def test_overrides_merge_deeply():
    cfg = ExperimentConfig.from_dict({"scenario": "perturbed-soliton",
                                      "perturbation": {"amplitude": 0.02}})
    assert cfg["perturbation"]["amplitude"] == 0.02
    assert cfg["perturbation"]["shape"] == "gaussian"
    assert cfg["T_final"] == 100.0


@pytest.mark.parametrize("raw,field", [
    ({"scenario": "soliton-propagation", "dt": -1}, "dt"),
    ({"scenario": "soliton-propagation", "grid": {"N": 1000}}, "grid.N"),
    ({"scenario": "soliton-propagation", "cadence": 0.0015}, "cadence"),
    ({"scenario": "soliton-propagation", "seed": -3}, "seed"),
    ({"scenario": "soliton-propagation", "perturbation": {"shape": "box"}},
     "perturbation.shape"),
    ({"scenario": "soliton-propagation", "frame": {"sponge_width": 150}},
     "frame.sponge_width"),
    ({"scenario": "soliton-propagation", "nonlinearity": {"kind": "power_difference"}},
     "nonlinearity.q"),
    ({"scenario": "multi-soliton", "solitons": [{"c": -1, "rho": 0}]}, "solitons[0].c"),
    ({"scenario": "nope"}, "scenario"),
    ({"scenario": "c-star-scan", "schema_version": 99}, "schema_version"),
    ({}, "scenario"),
])
def test_errors_name_the_field(raw, field):
    with pytest.raises(ConfigError, match=field.replace("[", r"\[").replace("]", r"\]")):
        ExperimentConfig.from_dict(raw)


def test_json_syntax_error_reports_position():
    with pytest.raises(ConfigError, match="line 2, column"):
        ExperimentConfig.from_json('{"scenario":\n "a" "b"}')


def test_load_from_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"scenario": "c-star-scan"}))
    assert ExperimentConfig.load(path).scenario == "c-star-scan"


def test_defaults_are_copies():
    d = defaults("soliton-propagation")
    d["grid"]["N"] = 8
    assert defaults("soliton-propagation")["grid"]["N"] == 4096
