import json
import re
from pathlib import Path

import pytest

from Relata.constants import C
from Relata.exceptions import ConfigError, ConsistencyError, InvalidVelocityError, UnknownKeyError
from Relata.experiment import AngleSettings, Flag, Model, NonBeforePolicy
from Relata.simulation.config import (
    ANGLE_KEYS,
    GEOMETRY_KEYS,
    TOP_LEVEL_KEYS,
    config_from_dict,
    config_to_dict,
    parse_config,
)

MINIMAL = """\
geometry:
  L1: 2000.0
  L2: 2000.0012
  V: 100.0
angles:
  alpha_deg: 45
  beta_deg: -45
trials: 1000
seed: 3
"""


def test_minimal_config_fills_defaults():
    config = parse_config(MINIMAL)
    assert config.model is Model.QM
    assert config.tie_tolerance == 0.0
    assert config.nonbefore_policy is NonBeforePolicy.ERROR
    assert config.geometry.tau_jitter_sd == 0.0
    assert config.geometry.path_jitter_sd == 0.0
    assert config.geometry.tau == 0.0
    assert config.distinguishability == (Flag.U, Flag.U)
    assert config.stream == 0
    assert config.trials == 1000
    assert config.seed == 3


def test_angles_converted_once():
    config = parse_config(MINIMAL)
    assert config.angles == AngleSettings.from_degrees(45, -45)
    assert config.angles.alpha + config.angles.beta == 0.0


def test_total_length_and_delay():
    config = parse_config("""\
geometry: {L: 4000.0, delta_t: 4e-12, V: 100.0}
angles: {alpha_deg: 0, beta_deg: 0}
""")
    assert config.geometry.L == pytest.approx(4000.0)
    assert config.geometry.delta_t == pytest.approx(4e-12, rel=1e-6)


def test_superluminal_velocity_names_c():
    with pytest.raises(InvalidVelocityError, match="299792458"):
        parse_config(MINIMAL.replace("V: 100.0", "V: 3e8"))


def test_unknown_keys_are_listed():
    text = MINIMAL + "tie_tolerence: 1e-15\nmodle: ad\n"
    with pytest.raises(UnknownKeyError) as error:
        parse_config(text)
    assert error.value.keys == ["modle", "tie_tolerence"]
    assert "modle" in str(error.value)


def test_unknown_geometry_key():
    with pytest.raises(UnknownKeyError, match="geometry"):
        parse_config(MINIMAL.replace("V: 100.0", "V: 100.0\n  speed: 3"))


def test_inconsistent_delay():
    with pytest.raises(ConsistencyError, match="delta_t"):
        parse_config(MINIMAL.replace("V: 100.0", "V: 100.0\n  delta_t: 5e-12"))


def test_consistent_delay_is_accepted():
    delta_t = 0.0012 / C
    config = parse_config(MINIMAL.replace("V: 100.0", f"V: 100.0\n  delta_t: {delta_t!r}"))
    assert config.geometry.delta_t == pytest.approx(delta_t)


def test_inconsistent_total_length():
    with pytest.raises(ConsistencyError, match="geometry.L"):
        parse_config(MINIMAL.replace("V: 100.0", "V: 100.0\n  L: 5000"))


@pytest.mark.parametrize("replacement, field", [
    ("L1: -1.0", "geometry.L1"),
    ("L1: abc", "geometry.L1"),
    ("trials: 0", "trials"),
    ("trials: 1.5", "trials"),
])
def test_bound_violations_name_the_field(replacement, field):
    key = replacement.split(":")[0]
    original = {"L1": "L1: 2000.0", "trials": "trials: 1000"}[key]
    with pytest.raises(ConfigError, match=field):
        parse_config(MINIMAL.replace(original, replacement))


def test_missing_geometry():
    with pytest.raises(ConfigError, match="geometry"):
        parse_config("angles: {alpha_deg: 0, beta_deg: 0}\n")


def test_policy_and_flags():
    config = parse_config(MINIMAL + "model: AD\nnonbefore_policy: treat-as-local\ndistinguishability: [u, d]\n")
    assert config.model is Model.AD
    assert config.nonbefore_policy is NonBeforePolicy.TREAT_AS_LOCAL
    assert config.distinguishability == (Flag.U, Flag.D)


def test_bad_policy():
    with pytest.raises(ConfigError, match="nonbefore_policy"):
        parse_config(MINIMAL + "nonbefore_policy: guess\n")


def test_bad_schema_version():
    with pytest.raises(ConfigError, match="schema_version"):
        parse_config("schema_version: 2\n" + MINIMAL)


def test_invalid_yaml():
    with pytest.raises(ConfigError):
        parse_config("geometry: [unclosed\n")


def test_resolved_config_round_trips_through_json():
    config = parse_config(MINIMAL + "tie_tolerance: 1e-15\n")
    text = json.dumps(config_to_dict(config))
    assert parse_config(text) == config


def test_manifest_config_section_is_used():
    config = parse_config(MINIMAL)
    manifest = {"manifest_version": 1, "config": config_to_dict(config), "summary": {}}
    assert parse_config(json.dumps(manifest)) == config


def test_config_from_dict_rejects_non_mapping():
    with pytest.raises(ConfigError):
        config_from_dict(["geometry"])


def test_readme_documents_every_key():
    readme = (Path(__file__).resolve().parents[1] / "README.md").read_text(encoding="utf-8")
    section = readme.split("## 設定檔格式", 1)[1].split("\n## ", 1)[0]
    documented = set(re.findall(r"^\| `([A-Za-z0-9_.]+)` \|", section, flags=re.MULTILINE))
    expected = (
        TOP_LEVEL_KEYS
        | {f"geometry.{key}" for key in GEOMETRY_KEYS}
        | {f"angles.{key}" for key in ANGLE_KEYS}
    )
    assert documented == expected
