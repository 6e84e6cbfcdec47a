"""
Parse the execution command, load the mission config, and execute the command
"""
import sys
import traceback

from .exceptions import ConfigError, ExecutionCommandError, SimulationDivergedError
from .execution_command import Command, ExecutionCommand, get_command_parser
from .missionconfig import MissionConfigFile
from .process import MissionTask, ProcessManager, compare_profiles
from .recorder import COMPARISON_HEADER, SWEEP_HEADER, comparison_rows, \
    print_table, sweep_row, write_comparison, write_run, write_sweep_summary
from .sim.perception import detector_preset
from . import errno

def execute():
    """
    Parse the execution command and execute it
    """
    sys.exit(main())

def main(argv = None) -> int:
    """
    Run the command line and return the exit code

    @param argv The arguments without the program name. None for `sys.argv`.
    """
    try:
        execution_cmd = _parse_command_line(argv)
    except ExecutionCommandError as e:
        print("Error:", e)
        return errno.CONFIG_ERROR

    handlers = {
        Command.SIMULATE: cmd_simulate,
        Command.COMPARE: cmd_compare,
        Command.SWEEP: cmd_sweep,
    }
    try:
        return handlers[execution_cmd.command](execution_cmd)
    except ConfigError as e:
        print("Error:", e)
        return errno.CONFIG_ERROR
    except SimulationDivergedError as e:
        print("Failed")
        print("Error:", e)
        return errno.SIMULATION_DIVERGED
    except Exception:
        print("Error: Unhandled exception:")
        traceback.print_exc()
        return errno.UNHANDLED_ERROR

def _parse_command_line(argv):
    """
    Parse the command line arguments

    @return An `ExecutionCommand` object
    """
    cmd_parser = get_command_parser()
    try:
        parsed_args = cmd_parser.parse_args(argv)
    except SystemExit as e:
        # "-h" and "--version" exit with 0, the usage errors with 2
        if e.code:
            raise ExecutionCommandError("Invalid command line. See the usage above.")
        raise

    return ExecutionCommand(parsed_args)

def cmd_simulate(execution_cmd: ExecutionCommand) -> int:
    """
    Fly one mission and write its outputs
    """
    from .loops import run_mission

    loaded = MissionConfigFile(execution_cmd.config_path, execution_cmd.overrides())
    mission = loaded.mission

    print("Running mission '{}' with detector '{}' (seed {})...".format(
        loaded.path, mission.detector.name, mission.seed), end = " ", flush = True)
    result = run_mission(mission)
    print("OK")

    write_run(result, execution_cmd.out_dir, loaded.path, loaded.entries, mission.seed)
    metrics = result.metrics
    print("Detected {}/{} targets, flight time {:.1f} s, ended by '{}'".format(
        metrics.targets_detected, metrics.targets_total, metrics.flight_time, metrics.status))
    print("Outputs are written to '{}'".format(execution_cmd.out_dir))
    return 0

def cmd_compare(execution_cmd: ExecutionCommand) -> int:
    """
    Fly the mission once per detector profile and write the comparison table
    """
    loaded = MissionConfigFile(execution_cmd.config_path, execution_cmd.overrides())
    profiles = [detector_preset(name) for name in execution_cmd.profiles]

    print("Comparing {} on '{}' (seed {}, {} job(s))...".format(
        ", ".join(p.name for p in profiles), loaded.path, loaded.mission.seed,
        execution_cmd.jobs), end = " ", flush = True)
    results = compare_profiles(loaded.mission, profiles, execution_cmd.jobs)
    print("OK")

    out_dir = execution_cmd.out_dir
    for profile, result in zip(profiles, results):
        entries = {key: value for key, value in loaded.entries.items()
            if not key.startswith("detector.")}
        entries["detector"] = profile.name
        write_run(result, out_dir / profile.name, loaded.path, entries, loaded.mission.seed)

    rows = comparison_rows(profiles, [r.metrics for r in results])
    write_comparison(out_dir, rows)
    print_table(COMPARISON_HEADER, rows)
    print("Outputs are written to '{}'".format(out_dir))
    return 0

def cmd_sweep(execution_cmd: ExecutionCommand) -> int:
    """
    Fly one mission per value of the swept key and write the summary
    """
    loaded = MissionConfigFile(execution_cmd.config_path, execution_cmd.overrides())
    param = execution_cmd.param
    variants = [loaded.with_overrides({param: value}) for value in execution_cmd.values]

    print("Sweeping '{}' over {} on '{}' ({} job(s))...".format(
        param, ", ".join(execution_cmd.values), loaded.path, execution_cmd.jobs),
        end = " ", flush = True)
    tasks = [MissionTask("{}={}".format(param, value), variant.mission)
        for value, variant in zip(execution_cmd.values, variants)]
    results = ProcessManager(tasks, execution_cmd.jobs).start()
    print("OK")

    out_dir = execution_cmd.out_dir
    rows = []
    for task, value, variant, result in zip(tasks, execution_cmd.values, variants, results):
        write_run(result, out_dir / task.name, variant.path, variant.entries,
            variant.mission.seed)
        rows.append(sweep_row(param, value, result.metrics))

    write_sweep_summary(out_dir, rows)
    print_table(SWEEP_HEADER, rows)
    print("Outputs are written to '{}'".format(out_dir))
    return 0
