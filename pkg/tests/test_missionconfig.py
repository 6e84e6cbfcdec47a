import math

import pytest

from sarquad.exceptions import ConfigError, ConfigSyntaxError
from sarquad.missionconfig import MISSION_PARAMS, MissionConfigFile, parse_config, \
    parse_config_entries, resolve_entries
from sarquad.sim.perception import PARTIAL_VISIBILITY_CAP

WORLD = "world.width = 10\nworld.height = 12\n"

def test_minimal_config():
    config = parse_config(WORLD)

    assert (config.world_width, config.world_height) == (10.0, 12.0)
    assert config.spawn == (0.0, 0.0)
    assert config.cruise_speed == 1.5
    assert config.seed == 0
    assert config.detector.name == "ssd"
    assert config.targets == ()
    assert config.filter.dt == pytest.approx(1.0 / 250.0)

def test_comments_and_blank_lines():
    text = "# a field\n\n  world.width = 10   # east\nworld.height=12\n\n"
    assert parse_config(text).world_width == 10.0

def test_sections():
    config = parse_config(WORLD + "\n".join([
        "quad.mass = 1.5",
        "quad.inertia = 0.01, 0.01, 0.02",
        "gyro.bias0 = 0, 0, 0",
        "pid.roll.kp = 0.5",
        "pid.altitude.output_limit = 0.25",
        "filter.alpha = 0.95",
        "camera.hfov = 90",
        "guidance.max_tilt = 0.2",
        "seed = 0x10",
    ]))

    assert config.quad.mass == 1.5
    assert config.quad.inertia == (0.01, 0.01, 0.02)
    assert config.gyro.bias0 == (0.0, 0.0, 0.0)
    assert config.pid.roll.kp == 0.5
    assert config.pid.pitch.kp == 0.4
    assert config.pid.altitude.output_limit == 0.25
    assert config.filter.alpha == 0.95
    assert config.camera.hfov == pytest.approx(math.pi / 2)
    assert config.guidance.max_tilt == 0.2
    assert config.seed == 16

def test_filter_period_follows_imu_rate():
    config = parse_config(WORLD + "imu_rate = 500\ncontrol_rate = 500\n")
    assert config.filter.dt == pytest.approx(0.002)
    assert config.imu_ticks == 1

def test_targets():
    config = parse_config(WORLD + "\n".join([
        "target.2.x = 3",
        "target.2.y = 4",
        "target.1.x = 5",
        "target.1.y = 6",
        "target.1.partial = true",
        "target.1.width = 0.5",
    ]))

    assert [t.id for t in config.targets] == [1, 2]
    first, second = config.targets
    assert (first.x, first.y, first.width, first.length) == (5.0, 6.0, 0.5, 1.2)
    assert first.visibility_cap == PARTIAL_VISIBILITY_CAP
    assert not second.is_partial

def test_detector_overrides():
    config = parse_config(WORLD + "detector = haar\ndetector.recall_full = 0.5\n")
    assert config.detector.name == "haar"
    assert config.detector.recall_full == 0.5
    assert config.detector.seconds_per_image == 1.0

def test_overrides():
    config = parse_config(WORLD + "seed = 3\n", {"seed": "42", "endurance": 100})
    assert config.seed == 42
    assert config.endurance == 100.0

def test_syntax_error():
    with pytest.raises(ConfigSyntaxError) as e:
        parse_config(WORLD + "  cruise_speed 2\n")
    assert e.value.line == 3
    assert e.value.column == 3

def test_missing_value():
    with pytest.raises(ConfigSyntaxError):
        parse_config_entries("seed =\n")

def test_unknown_key_suggestion():
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + "cruise_sped = 1\n")
    assert e.value.key == "cruise_sped"
    assert "did you mean 'cruise_speed'?" in str(e.value)

def test_unknown_override():
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD, {"altitude": "3"})
    assert e.value.key == "altitude"

def test_duplicated_key():
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + "seed = 1\nseed = 2\n")
    assert e.value.key == "seed"

def test_missing_required_key():
    with pytest.raises(ConfigError) as e:
        parse_config("world.width = 10\n")
    assert e.value.key == "world.height"

def test_missing_target_coordinate():
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + "target.1.x = 3\n")
    assert e.value.key == "target.1.y"

@pytest.mark.parametrize("line, key", [
    ("seed = abc", "seed"),
    ("cruise_speed = fast", "cruise_speed"),
    ("target.1.x = 1\ntarget.1.y = 1\ntarget.1.partial = maybe", "target.1.partial"),
    ("spawn = 1", "spawn"),
])
def test_malformed_values(line, key):
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + line + "\n")
    assert e.value.key == key

@pytest.mark.parametrize("line, key, reason", [
    ("cruise_speed = 4", "cruise_speed", "exceeds max_speed 3.0"),
    ("target.1.x = 30\ntarget.1.y = 1", "target.1.x", "inside the world"),
    ("detector = yolo", "detector", "yolo"),
    ("filter.alpha = 2", "filter.alpha", "[0, 1]"),
    ("pid.yaw.output_limit = 0", "pid.yaw.output_limit", "positive"),
    ("imu_rate = 300", "imu_rate", "physics ticks"),
    ("search_altitude = 5", "search_altitude", "max_range"),
    ("camera.vfov = 200", "camera.vfov", "(0, pi)"),
])
def test_invalid_values(line, key, reason):
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + line + "\n")
    assert e.value.key == key
    assert reason in e.value.reason

def test_resolved_entries_are_complete():
    resolved = resolve_entries(parse_config_entries(WORLD + "target.1.x = 1\ntarget.1.y = 2\n"))

    assert set(MISSION_PARAMS) <= set(resolved)
    assert resolved["cruise_speed"] == "1.5"
    assert resolved["target.1.partial"] == "false"
    # The resolved entries build the same mission again
    assert parse_config("\n".join("{} = {}".format(k, v) for k, v in resolved.items())) == \
        parse_config(WORLD + "target.1.x = 1\ntarget.1.y = 2\n")

@pytest.mark.parametrize("name, targets", [
    ("default.cfg", 6),
    ("partial.cfg", 6),
    ("hover.cfg", 0),
])
def test_shipped_missions(missions_dir, name, targets):
    loaded = MissionConfigFile(missions_dir / name)
    assert len(loaded.mission.targets) == targets
    assert 600 <= loaded.mission.endurance <= 900 or name == "hover.cfg"

def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        MissionConfigFile(tmp_path / "nothing.cfg")

def test_with_overrides(missions_dir):
    loaded = MissionConfigFile(missions_dir / "default.cfg")
    changed = loaded.with_overrides({"filter.alpha": "0.9"})

    assert changed.mission.filter.alpha == 0.9
    assert changed.entries["filter.alpha"] == "0.9"
    assert loaded.mission.filter.alpha == 0.98
    assert changed.mission.targets == loaded.mission.targets

@pytest.mark.parametrize("line, key", [
    ("world.width = inf", "world.width"),
    ("world.height = 1e400", "world.height"),
    ("endurance = inf", "endurance"),
    ("cruise_speed = nan", "cruise_speed"),
    ("spawn = 0, inf", "spawn"),
    ("quad.mass = -inf", "quad.mass"),
    ("filter.accel_mag_min = inf", "filter.accel_mag_min"),
])
def test_non_finite_values(line, key):
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + line + "\n")
    assert e.value.key == key
    assert "finite" in e.value.reason

def test_unbounded_gate():
    config = parse_config(WORLD + "filter.accel_mag_min = 0\nfilter.accel_mag_max = inf\n")
    assert config.filter.accel_mag_max == math.inf

    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + "filter.accel_mag_max = nan\n")
    assert e.value.key == "filter.accel_mag_max"

@pytest.mark.parametrize("text", [
    "target.01.x = 3\ntarget.1.y = 4\n",
    "target.1.x = 3\ntarget.1.y = 4\ntarget.001.partial = true\n",
])
def test_target_id_with_leading_zeros(text):
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + text)
    assert e.value.key.startswith("target.0")
    assert "leading zeros" in e.value.reason

def test_target_override_with_leading_zeros():
    with pytest.raises(ConfigError) as e:
        parse_config(WORLD + "target.1.x = 3\ntarget.1.y = 4\n", {"target.01.x": "5"})
    assert e.value.key == "target.01.x"
