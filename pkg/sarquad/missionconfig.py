"""
Parse the mission config file

The file is flat text: one `key = value` per line, `#` starts a comment.
Every accepted key is listed in `MISSION_PARAMS` together with its type and
default, plus the indexed target keys `target.<n>.<field>` and the detector
overrides `detector.<field>`.
"""

from dataclasses import fields, replace
import difflib
import math
from pathlib import Path
import re

from .exceptions import ConfigError, ConfigSyntaxError, InvalidArgumentError
from .sim.control import PidBank, PidGains
from .sim.dynamics import QuadParams
from .sim.estimation import FilterParams
from .sim.mission import GuidanceParams, MissionConfig
from .sim.perception import CameraModel, DetectorProfile, GroundTarget, \
    PARTIAL_VISIBILITY_CAP, detector_preset
from .sim.sensors import AccelModel, GyroModel, UltrasonicModel

REQUIRED = object()

class ValueType:
    """
    The converters of the config values
    """
    @staticmethod
    def to_float(text: str) -> float:
        value = float(text)
        if not math.isfinite(value):
            raise ValueError("not a finite number")
        return value

    @staticmethod
    def to_bound(text: str) -> float:
        """
        Convert an upper bound, which may be `inf`
        """
        value = float(text)
        if math.isnan(value) or value == -math.inf:
            raise ValueError("not an upper bound")
        return value

    @staticmethod
    def to_int(text: str) -> int:
        return int(text, 0)

    @staticmethod
    def to_str(text: str) -> str:
        return text

    @staticmethod
    def to_bool(text: str) -> bool:
        lowered = text.lower()
        if lowered in ("true", "yes", "on", "1"):
            return True
        if lowered in ("false", "no", "off", "0"):
            return False
        raise ValueError("expected true or false")

    @staticmethod
    def to_vector(text: str) -> tuple:
        return tuple(ValueType.to_float(v.strip()) for v in text.split(","))

_TYPE_NAMES = {
    ValueType.to_float: "a finite number",
    ValueType.to_bound: "a number or inf",
    ValueType.to_int: "an integer",
    ValueType.to_str: "a string",
    ValueType.to_bool: "true or false",
    ValueType.to_vector: "comma separated finite numbers",
}

def _format_default(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    if isinstance(value, float):
        return repr(value)
    return str(value)

def _section_params(section: str, instance, help_str: str) -> dict:
    """
    List the fields of a parameter dataclass as config keys `<section>.<field>`
    """
    params = {}
    for f in fields(instance):
        value = getattr(instance, f.name)
        value_type = ValueType.to_vector if isinstance(value, tuple) else ValueType.to_float
        params["{}.{}".format(section, f.name)] = {
            "type": value_type,
            "default": value,
            "help": help_str,
        }
    return params

def _build_mission_params() -> dict:
    params = {
        "world.width": {"type": ValueType.to_float, "default": REQUIRED,
            "help": "the east extent of the search area in m"},
        "world.height": {"type": ValueType.to_float, "default": REQUIRED,
            "help": "the north extent of the search area in m"},
        "spawn": {"type": ValueType.to_vector, "default": (0.0, 0.0),
            "help": "the take-off point (east, north) in m"},
        "search_altitude": {"type": ValueType.to_float, "default": 3.0,
            "help": "the flight altitude of the search in m"},
        "cruise_speed": {"type": ValueType.to_float, "default": 1.5,
            "help": "the ground speed along the rows in m/s"},
        "endurance": {"type": ValueType.to_float, "default": 720.0,
            "help": "the flight time budget of the battery in s"},
        "swath_overlap": {"type": ValueType.to_float, "default": 0.1,
            "help": "the overlap of two neighboring rows in [0, 1)"},
        "seed": {"type": ValueType.to_int, "default": 0,
            "help": "the 64-bit mission seed"},
        "detector": {"type": ValueType.to_str, "default": "ssd",
            "help": "the detector preset: ssd, haar or hog"},
        "physics_dt": {"type": ValueType.to_float, "default": 0.002,
            "help": "the physics step in s"},
        "imu_rate": {"type": ValueType.to_float, "default": 250.0,
            "help": "the IMU sample rate in Hz"},
        "control_rate": {"type": ValueType.to_float, "default": 250.0,
            "help": "the attitude control rate in Hz"},
        "ultrasonic_rate": {"type": ValueType.to_float, "default": 20.0,
            "help": "the ultrasonic ping rate in Hz"},
        "camera.frame_rate": {"type": ValueType.to_float, "default": 30.0,
            "help": "the camera frame rate in Hz"},
        "camera.hfov": {"type": ValueType.to_float, "default": 60.0,
            "help": "the horizontal field of view in degrees"},
        "camera.vfov": {"type": ValueType.to_float, "default": 48.0,
            "help": "the vertical field of view in degrees"},
    }
    params.update(_section_params("quad", QuadParams(), "vehicle constant"))
    params.update(_section_params("gyro", GyroModel(), "gyroscope noise"))
    params.update(_section_params("accel", AccelModel(), "accelerometer noise"))
    params.update(_section_params("ultrasonic", UltrasonicModel(), "ultrasonic sensor"))
    params.update(_section_params("guidance", GuidanceParams(), "waypoint follower gain"))

    filter_params = _section_params("filter", FilterParams(), "complementary filter")
    # The filter period always follows the IMU rate
    del filter_params["filter.dt"]
    # inf disables the upper end of the plausibility gate
    filter_params["filter.accel_mag_max"]["type"] = ValueType.to_bound
    params.update(filter_params)

    bank = PidBank()
    for axis in ("roll", "pitch", "yaw", "altitude"):
        params.update(_section_params("pid." + axis, getattr(bank, axis), "PID gain"))

    return params

MISSION_PARAMS = _build_mission_params()

TARGET_FIELDS = {
    "x": {"type": ValueType.to_float, "default": REQUIRED},
    "y": {"type": ValueType.to_float, "default": REQUIRED},
    "width": {"type": ValueType.to_float, "default": 0.6},
    "length": {"type": ValueType.to_float, "default": 1.2},
    "partial": {"type": ValueType.to_bool, "default": False},
}

DETECTOR_FIELDS = {f.name: {"type": ValueType.to_float}
    for f in fields(DetectorProfile) if f.name != "name"}

_TARGET_KEY = re.compile(r"^target\.(\d+)\.(\w+)$")
_DETECTOR_KEY = re.compile(r"^detector\.(\w+)$")

def _schema_of(key: str):
    """
    Get the schema entry of the key, or None if the key is unknown
    """
    if key in MISSION_PARAMS:
        return MISSION_PARAMS[key]

    match = _TARGET_KEY.match(key)
    if match:
        return TARGET_FIELDS.get(match.group(2))

    match = _DETECTOR_KEY.match(key)
    if match:
        return DETECTOR_FIELDS.get(match.group(1))

    return None

def _check_key(key: str):
    """
    Reject a key that is unknown or names a target id with leading zeros
    """
    if _schema_of(key) is None:
        raise ConfigError(key, _suggest(key))

    match = _TARGET_KEY.match(key)
    if match and match.group(1) != str(int(match.group(1))):
        raise ConfigError(key, "target ids are written without leading zeros, "
            "use 'target.{}.{}'".format(int(match.group(1)), match.group(2)))

def _suggest(key: str) -> str:
    candidates = list(MISSION_PARAMS.keys())
    candidates += ["target.0." + name for name in TARGET_FIELDS]
    candidates += ["detector." + name for name in DETECTOR_FIELDS]
    matches = difflib.get_close_matches(key, candidates, n = 1)
    if matches:
        return "unknown key, did you mean '{}'?".format(matches[0])
    return "unknown key"

def _convert(key: str, text: str):
    schema = _schema_of(key)
    try:
        return schema["type"](text)
    except ValueError:
        raise ConfigError(key, "expected {}, got '{}'".format(
            _TYPE_NAMES[schema["type"]], text))

def parse_config_entries(text: str) -> dict:
    """
    Split the config text into its key-value entries

    @return A dict of the keys and the raw value strings in file order
    @exception ConfigSyntaxError If a line is not `key = value`
    @exception ConfigError If a key is unknown or duplicated
    """
    entries = {}
    for line_no, raw_line in enumerate(text.splitlines(), start = 1):
        line = raw_line.split("#", 1)[0]
        if not line.strip():
            continue

        if "=" not in line:
            column = len(line) - len(line.lstrip()) + 1
            raise ConfigSyntaxError(line_no, column, "expected 'key = value'")

        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigSyntaxError(line_no, line.index("=") + 1, "missing key")
        if not value:
            raise ConfigSyntaxError(line_no, line.index("=") + 2, "missing value")
        _check_key(key)
        if key in entries:
            raise ConfigError(key, "duplicated key")

        entries[key] = value

    return entries

def resolve_entries(entries: dict, overrides: dict = None) -> dict:
    """
    Apply the overrides and the defaults to the entries

    @return A dict of every key of the mission and its value string.
            Target and detector keys appear only if they are used.
    """
    entries = dict(entries)
    for key, value in (overrides or {}).items():
        _check_key(key)
        entries[key] = str(value)

    resolved = {}
    for key, schema in MISSION_PARAMS.items():
        if key in entries:
            resolved[key] = entries[key]
        elif schema["default"] is REQUIRED:
            raise ConfigError(key, "missing required key")
        else:
            resolved[key] = _format_default(schema["default"])

    for target_id in sorted(_target_ids(entries)):
        for name, schema in TARGET_FIELDS.items():
            key = "target.{}.{}".format(target_id, name)
            if key in entries:
                resolved[key] = entries[key]
            elif schema["default"] is REQUIRED:
                raise ConfigError(key, "missing required key")
            else:
                resolved[key] = _format_default(schema["default"])

    for key in sorted(k for k in entries if _DETECTOR_KEY.match(k)):
        resolved[key] = entries[key]

    return resolved

def _target_ids(entries: dict) -> set:
    return {int(m.group(1)) for m in map(_TARGET_KEY.match, entries) if m}

def _section(section: str, cls, values: dict, **extra):
    """
    Build a parameter dataclass from the `<section>.<field>` values
    """
    prefix = section + "."
    kwargs = {key[len(prefix):]: value for key, value in values.items()
        if key.startswith(prefix) and key.count(".") == prefix.count(".")}
    kwargs.update(extra)
    try:
        return cls(**kwargs)
    except InvalidArgumentError as e:
        raise ConfigError(prefix + e.argument, e.reason)

# The config keys of the `MissionConfig` fields reported by its validation
_MISSION_FIELD_KEYS = {
    "world_width": "world.width",
    "world_height": "world.height",
    "filter.dt": "imu_rate",
}

def build_mission_config(resolved: dict) -> MissionConfig:
    """
    Build the `MissionConfig` from the resolved entries

    @exception ConfigError If a value is malformed or violates an invariant
    """
    values = {key: _convert(key, text) for key, text in resolved.items()}

    quad = _section("quad", QuadParams, values)
    gyro = _section("gyro", GyroModel, values)
    accel = _section("accel", AccelModel, values)
    ultrasonic = _section("ultrasonic", UltrasonicModel, values)
    guidance = _section("guidance", GuidanceParams, values)
    filter_params = _section("filter", FilterParams, values,
        dt = 1.0 / values["imu_rate"] if values["imu_rate"] > 0 else 1.0)
    pid = PidBank(**{axis: _section("pid." + axis, PidGains, values)
        for axis in ("roll", "pitch", "yaw", "altitude")})

    try:
        camera = CameraModel(frame_rate_hz = values["camera.frame_rate"],
            hfov = math.radians(values["camera.hfov"]),
            vfov = math.radians(values["camera.vfov"]))
    except InvalidArgumentError as e:
        raise ConfigError("camera." + e.argument, e.reason)

    try:
        detector = detector_preset(values["detector"])
    except InvalidArgumentError as e:
        raise ConfigError("detector", e.reason)
    overrides = {key[len("detector."):]: value for key, value in values.items()
        if _DETECTOR_KEY.match(key)}
    if overrides:
        try:
            detector = replace(detector, **overrides)
        except InvalidArgumentError as e:
            raise ConfigError("detector." + e.argument, e.reason)

    targets = []
    for target_id in sorted(_target_ids(values)):
        prefix = "target.{}.".format(target_id)
        try:
            targets.append(GroundTarget(target_id,
                values[prefix + "x"], values[prefix + "y"],
                values[prefix + "width"], values[prefix + "length"],
                PARTIAL_VISIBILITY_CAP if values[prefix + "partial"] else 1.0))
        except InvalidArgumentError as e:
            raise ConfigError(prefix + e.argument, e.reason)

    spawn = values["spawn"]
    if len(spawn) != 2:
        raise ConfigError("spawn", "expected two numbers (east, north)")

    try:
        return MissionConfig(
            world_width = values["world.width"],
            world_height = values["world.height"],
            spawn = spawn,
            search_altitude = values["search_altitude"],
            cruise_speed = values["cruise_speed"],
            endurance = values["endurance"],
            targets = tuple(targets),
            detector = detector,
            swath_overlap = values["swath_overlap"],
            seed = values["seed"],
            physics_dt = values["physics_dt"],
            imu_rate = values["imu_rate"],
            control_rate = values["control_rate"],
            ultrasonic_rate = values["ultrasonic_rate"],
            quad = quad, gyro = gyro, accel = accel, ultrasonic = ultrasonic,
            filter = filter_params, pid = pid, camera = camera, guidance = guidance)
    except InvalidArgumentError as e:
        key = _MISSION_FIELD_KEYS.get(e.argument, e.argument)
        if key.startswith("target.") and key.count(".") == 1:
            key += ".x"
        raise ConfigError(key, e.reason)

def parse_config(text: str, overrides: dict = None) -> MissionConfig:
    """
    Parse the config text into a fully defaulted `MissionConfig`

    @param overrides A dict of keys and values replacing the ones in the text
    """
    return build_mission_config(resolve_entries(parse_config_entries(text), overrides))

class MissionConfigFile:
    """
    The data class storing a loaded mission config

    @var path The path of the config file
    @var entries The resolved entries (every key with its value string)
    @var mission The built `MissionConfig`
    """

    def __init__(self, path, overrides: dict = None):
        """
        Load and validate the config file

        @exception ConfigError If the file cannot be read or is invalid
        """
        self.path = Path(path)
        try:
            text = self.path.read_text(encoding = "utf-8")
        except (OSError, UnicodeDecodeError) as e:
            raise ConfigError(str(self.path), "cannot read the file: {}".format(e))

        self.entries = resolve_entries(parse_config_entries(text), overrides)
        self.mission = build_mission_config(self.entries)

    def with_overrides(self, overrides: dict):
        """
        Get a copy with extra overrides applied on top of the resolved entries
        """
        copied = object.__new__(MissionConfigFile)
        copied.path = self.path
        copied.entries = resolve_entries(self.entries, overrides)
        copied.mission = build_mission_config(copied.entries)
        return copied
