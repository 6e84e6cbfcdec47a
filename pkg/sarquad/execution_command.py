from argparse import ArgumentParser
import os
from pathlib import Path

from ._version import version
from .exceptions import ExecutionCommandError
from .sim.perception import DetectorPreset
from .utils.argparser_generator import add_subparsers_from_dict
from .utils.enum import StringEnum, auto

OUTPUT_ROOT_ENV = "SAR_QUAD_OUT"
DEFAULT_OUTPUT_ROOT = "output"

class Command(StringEnum):
    """
    The subcommands of the simulator
    """
    SIMULATE = auto()
    COMPARE = auto()
    SWEEP = auto()

_CONFIG_ARG = {
    "metavar": "CONFIG",
    "help": "the mission config file, such as 'missions/default.cfg'"
}
_SEED_ARG = {
    "type": str, "default": None,
    "help": "override the mission seed of the config"
}
_OUT_ARG = {
    "type": str, "default": None, "metavar": "DIR",
    "help": "the output directory [default: ${}/<config>-<command>, "
        "where ${} defaults to '{}']".format(
            OUTPUT_ROOT_ENV, OUTPUT_ROOT_ENV, DEFAULT_OUTPUT_ROOT)
}
_JOBS_ARG = {
    "type": int, "default": 1,
    "help": "the number of missions run in parallel [default: %(default)s]"
}

COMMAND_PARAMS = {
    Command.SIMULATE.value: {
        "()": {
            "help": "fly one mission and write its telemetry, detections and metrics"
        },
        "config": _CONFIG_ARG,
        "--seed": _SEED_ARG,
        "--out": _OUT_ARG,
    },
    Command.COMPARE.value: {
        "()": {
            "help": "fly the same mission once per detector profile"
        },
        "config": _CONFIG_ARG,
        "--profiles": {
            "type": str, "default": ",".join(p.value for p in DetectorPreset),
            "help": "comma separated detector presets [default: %(default)s]"
        },
        "--seed": _SEED_ARG,
        "--jobs": _JOBS_ARG,
        "--out": _OUT_ARG,
    },
    Command.SWEEP.value: {
        "()": {
            "help": "fly one mission per value of a config key"
        },
        "config": _CONFIG_ARG,
        "--param": {
            "type": str, "required": True, "metavar": "KEY",
            "help": "the config key to be swept, such as 'filter.alpha'"
        },
        "--values": {
            "type": str, "required": True, "metavar": "V1,V2,...",
            "help": "comma separated values of the swept key"
        },
        "--seed": _SEED_ARG,
        "--jobs": _JOBS_ARG,
        "--out": _OUT_ARG,
    },
}

def get_command_parser():
    """
    Generate an ArgumentParser for parse the arguments in the command line
    """
    description_str = ("A deterministic quadcopter search-and-rescue simulator. "
        "Every run is reproducible from its config file and seed.")

    parser = ArgumentParser(prog = "SARQuad.py", description = description_str)
    parser.add_argument("--version", action = "version", version = version)
    add_subparsers_from_dict(parser, COMMAND_PARAMS)

    return parser

def _split_list(text: str) -> list:
    return [item.strip() for item in text.split(",") if item.strip()]

class ExecutionCommand:
    """
    The data class for storing the command of the execution

    @var command The `Command` to be executed
    @var config_path The path of the mission config file
    @var seed_override The seed given on the command line as a string, or None
    @var out_dir The output directory
    @var profiles The detector preset names for the comparison
    @var param The swept config key
    @var values The swept values as strings
    @var jobs The number of missions run in parallel
    """

    def __init__(self, parsed_args):
        """
        Generate the execution command from the parsed command line arguments

        @exception ExecutionCommandError If the arguments are invalid
        """
        if not parsed_args.command:
            raise ExecutionCommandError("No command is specified. "
                "Use one of: {}".format(", ".join(c.value for c in Command)))

        self.command = Command.parse(parsed_args.command)
        self.config_path = Path(parsed_args.config)
        if not self.config_path.is_file():
            raise ExecutionCommandError(
                "The config file '{}' does not exist".format(self.config_path))

        self.seed_override = parsed_args.seed
        self.jobs = getattr(parsed_args, "jobs", 1)
        if self.jobs < 1:
            raise ExecutionCommandError("'--jobs' must be at least 1")

        self.profiles = []
        if self.command == Command.COMPARE:
            self.profiles = self._parse_profiles(parsed_args.profiles)

        self.param = getattr(parsed_args, "param", None)
        self.values = []
        if self.command == Command.SWEEP:
            self.values = _split_list(parsed_args.values)
            if not self.values:
                raise ExecutionCommandError("'--values' lists no value")

        self.out_dir = self._get_out_dir(parsed_args.out)

    def _parse_profiles(self, profiles_str: str) -> list:
        profiles = []
        for name in _split_list(profiles_str):
            try:
                profiles.append(DetectorPreset.parse(name).value)
            except ValueError as e:
                raise ExecutionCommandError("Invalid detector profile: {}".format(e))

        if len(profiles) < 2:
            raise ExecutionCommandError("'--profiles' needs at least two profiles")
        return profiles

    def _get_out_dir(self, out_str) -> Path:
        if out_str:
            return Path(out_str)

        root = os.environ.get(OUTPUT_ROOT_ENV) or DEFAULT_OUTPUT_ROOT
        return Path(root, "{}-{}".format(self.config_path.stem, self.command.value))

    def overrides(self) -> dict:
        """
        The config overrides given on the command line
        """
        return {} if self.seed_override is None else {"seed": self.seed_override}

    def __str__(self):
        return ("{" +
            "'command': '{}', ".format(self.command) +
            "'config_path': '{}', ".format(self.config_path) +
            "'seed_override': {}, ".format(self.seed_override) +
            "'out_dir': '{}', ".format(self.out_dir) +
            "'profiles': {}, ".format(self.profiles) +
            "'param': {}, ".format(self.param) +
            "'values': {}, ".format(self.values) +
            "'jobs': {}".format(self.jobs) +
            "}")
