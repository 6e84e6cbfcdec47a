from dataclasses import dataclass, replace
from multiprocessing import Pool
from typing import List

from .exceptions import InvalidArgumentError
from .loops import MissionResult
from .sim.mission import MissionConfig
from .sim.perception import DetectorProfile

@dataclass(frozen = True)
class MissionTask:
    """
    The data class that describes one mission of a batch

    @var name The name of the mission, such as the detector or the swept value
    @var config The `MissionConfig` of the mission
    """
    name: str
    config: MissionConfig

class ProcessManager:
    """
    Run a batch of independent missions

    With more than one job the missions are spread over a pool of worker
    processes. Each mission is a self-contained deterministic loop, so the
    results are the same for any number of jobs.

    @var _tasks A list of `MissionTask`
    @var _jobs The number of worker processes
    """

    def __init__(self, tasks: List[MissionTask], jobs: int = 1):
        """
        Constructor

        @param tasks The missions to be run
        @param jobs The number of worker processes. 1 runs the missions in
               the calling process.
        """
        if jobs < 1:
            raise InvalidArgumentError("jobs", "must be at least 1")
        self._tasks = list(tasks)
        self._jobs = jobs

    def start(self) -> List[MissionResult]:
        """
        Run the missions and wait for all of them

        An exception raised in a mission is raised again here.

        @return The results in the order of the tasks
        """
        if self._jobs == 1 or len(self._tasks) <= 1:
            return [_mission_process_entry_point(task) for task in self._tasks]

        with Pool(processes = min(self._jobs, len(self._tasks))) as pool:
            return pool.map(_mission_process_entry_point, self._tasks)

def _mission_process_entry_point(task: MissionTask) -> MissionResult:
    """
    The real entry point of the mission process
    """
    from .loops import run_mission

    return run_mission(task.config)

def compare_profiles(config: MissionConfig, profiles: List[DetectorProfile],
        jobs: int = 1) -> List[MissionResult]:
    """
    Fly the same mission once per detector profile

    The seed and therefore every random draw keyed to a frame and a target
    are shared by all profiles.

    @return The results in the order of `profiles`
    """
    if len(profiles) < 2:
        raise InvalidArgumentError("profiles", "at least two profiles are needed")

    tasks = [MissionTask(profile.name, replace(config, detector = profile))
        for profile in profiles]
    return ProcessManager(tasks, jobs).start()
