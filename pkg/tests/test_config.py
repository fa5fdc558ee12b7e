import pytest

from kronstap.config import build_experiment_config, load_experiment_config, parse_config_text
from kronstap.errors import ConfigError

BASE = """\
# comment
experiment.name = auc-vs-n
experiment.axis = 5, 10

experiment.trials = 3
scenario.q = 16
corruption.amp_high = 20
"""


def test_parse_and_build():
    cfg = build_experiment_config(parse_config_text(BASE))
    assert cfg.experiment == "auc-vs-n"
    assert cfg.axis == (5, 10)
    assert cfg.trials == 3
    assert cfg.scenario.q == 16
    assert cfg.corruption_amp == (5.0, 20.0)


def test_values_carry_line_numbers():
    entries = parse_config_text(BASE)
    assert entries["experiment.trials"] == (3, 5)


@pytest.mark.parametrize("extra, message", [
    ("no equals sign", ":8: expected"),
    ("experiment.color = red", ":8: unknown key 'experiment.color'"),
    ("experiment.trials = 4", ":8: duplicate key 'experiment.trials'"),
    ("scenario.p = three", ":8: bad value for scenario.p"),
    ("estimator.tol = nan", ":8: bad value for estimator.tol"),
    ("experiment.axis2 = 1", ":8: unknown key"),
])
def test_errors_name_the_line(extra, message):
    with pytest.raises(ConfigError, match=message):
        parse_config_text(BASE + extra + "\n", "f.cfg")


def test_missing_required_key():
    with pytest.raises(ConfigError, match="experiment.axis"):
        build_experiment_config(parse_config_text("experiment.name = auc-vs-n\n"))


@pytest.mark.parametrize("extra", [
    "experiment.trials = 0",
    "scenario.rank_b = 40",
    "experiment.methods = kronstap, magic",
    "estimator.r_a = 4",
])
def test_invalid_values_raise(extra):
    with pytest.raises(ConfigError):
        build_experiment_config(parse_config_text(BASE + extra + "\n"))


def test_unknown_experiment_name():
    with pytest.raises(ConfigError, match="experiment"):
        build_experiment_config(parse_config_text(
            "experiment.name = nope\nexperiment.axis = 1\n"))


def test_load_with_overrides(tmp_path):
    path = tmp_path / "c.cfg"
    path.write_text(BASE + "experiment.seed = 9\n")
    cfg = load_experiment_config(path, seed=42, output="out.csv")
    assert cfg.seed == 42
    assert cfg.output == "out.csv"
    assert load_experiment_config(path).seed == 9


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_experiment_config(tmp_path / "none.cfg")
