"""
The loop executors for flying the quadcopter and running missions
"""

from collections import deque
from dataclasses import dataclass
from functools import lru_cache
import math
from typing import Callable, List, Optional

from pygame.math import Vector2

from .exceptions import SimulationDivergedError
from .sim.control import ControlStates, Setpoints, control_step
from .sim.dynamics import MotorCommands, QuadState, hover_throttle, step_dynamics
from .sim.estimation import AttitudeEstimate, altitude_update, complementary_update
from .sim.mission import CRASH_SPEED, GuidanceState, MetricsAccumulator, \
    MissionConfig, MissionMetrics, MissionStatus, frame_schedule, \
    generate_lawnmower, guidance_step
from .sim.perception import CameraModel, DefaultBoxSet, confirms_target, \
    post_process, project_target, simulate_detector
from .sim.sensors import ImuChannel, UltrasonicChannel, sample_imu, sample_ultrasonic

_TIME_EPS = 1e-9

@dataclass(frozen = True)
class ControlTick:
    """
    The snapshot of one control tick

    @var state The true state the controller acted on
    @var commands The motor commands it produced
    """
    time: float
    state: QuadState
    estimate: AttitudeEstimate
    commands: MotorCommands

def telemetry_row(tick: ControlTick) -> tuple:
    """
    Flatten a control tick into the columns of the telemetry log
    """
    state, estimate = tick.state, tick.estimate
    return (tick.time,
        state.position.x, state.position.y, state.position.z,
        state.roll, state.pitch, state.yaw,
        estimate.roll, estimate.pitch, estimate.yaw, estimate.altitude,
        *tick.commands)

class FlightStack:
    """
    The fixed-step loop of dynamics, sensors, estimation and control

    Every call of `step()` first serves the periodic tasks due at the current
    tick (ultrasonic ping, IMU sample with the filter update, control) and then
    advances the physics by one tick.
    """

    def __init__(self, config: MissionConfig, initial_state: QuadState = None):
        self._config = config
        self._dt = config.physics_dt
        self._imu_ticks = config.imu_ticks
        self._control_ticks = config.control_ticks
        self._ultrasonic_ticks = config.ultrasonic_ticks
        self._hover_throttle = hover_throttle(config.quad)

        self.tick = 0
        self.state = initial_state or QuadState.at_rest(*config.spawn)
        self.estimate = AttitudeEstimate(yaw = self.state.yaw,
            altitude = self.state.altitude)
        self.commands = MotorCommands.uniform(0.0)
        self.setpoints = Setpoints(yaw_sp = self.state.yaw)
        self._control_states = ControlStates()
        self._imu_channel = ImuChannel.start(config.seed, config.gyro, config.imu_rate)
        self._ultrasonic_channel = UltrasonicChannel.start(config.seed)
        self._altitude_due = False

    @property
    def time(self) -> float:
        return self.tick * self._dt

    def step(self, guidance: Callable[[QuadState], Setpoints] = None) -> Optional[ControlTick]:
        """
        Run one physics tick

        @param guidance The function giving the setpoints on a control tick.
               If None, the last setpoints are kept.
        @return The `ControlTick` if the controller ran in this tick, otherwise None
        @exception SimulationDivergedError If the state leaves the valid region
        """
        config = self._config
        time = self.time
        control_tick = None

        if self.tick % self._ultrasonic_ticks == 0:
            echo, self._ultrasonic_channel = sample_ultrasonic(
                self.state.altitude, config.ultrasonic, self._ultrasonic_channel, time)
            altitude = altitude_update(self.estimate.altitude, echo,
                config.ultrasonic, config.filter)
            self.estimate = AttitudeEstimate(self.estimate.roll, self.estimate.pitch,
                self.estimate.yaw, altitude, self.estimate.time)
            self._altitude_due = True

        if self.tick % self._imu_ticks == 0:
            imu, self._imu_channel = sample_imu(self.state, self.commands.mean,
                config.gyro, config.accel, self._imu_channel, config.quad.gravity)
            if self.tick > 0:
                self.estimate = complementary_update(self.estimate, imu, config.filter)

        if self.tick % self._control_ticks == 0:
            if guidance is not None:
                self.setpoints = guidance(self.state)
            self.commands, self._control_states = control_step(
                self.estimate, self.setpoints, config.pid, self._control_states,
                self._hover_throttle, 1.0 / config.control_rate,
                self._altitude_due, 1.0 / config.ultrasonic_rate)
            self._altitude_due = False
            control_tick = ControlTick(time, self.state, self.estimate, self.commands)

        try:
            state = step_dynamics(self.state, self.commands, config.quad, self._dt)
        except SimulationDivergedError as e:
            raise SimulationDivergedError(e.reason, self.tick) from None
        if not state.is_finite():
            raise SimulationDivergedError("non-finite state", self.tick)

        self.state = state
        self.tick += 1
        return control_tick

@lru_cache(maxsize = 4)
def _default_boxes_of(camera: CameraModel) -> DefaultBoxSet:
    return DefaultBoxSet(camera)

@dataclass(frozen = True)
class MissionResult:
    """
    @var telemetry A list of telemetry rows, see `telemetry_row()`
    @var detections A list of (frame index, result time, `Detection`)
    """
    metrics: MissionMetrics
    telemetry: List[tuple]
    detections: List[tuple]

class MissionExecutor:
    """
    The loop executor for one search mission
    """

    def __init__(self, config: MissionConfig):
        self._config = config
        self._stack = FlightStack(config)
        self._metrics = MetricsAccumulator(config)
        self._boxes = _default_boxes_of(config.camera)

        self._spawn = Vector2(*config.spawn)
        self._waypoints = generate_lawnmower(config.world_width, config.world_height,
            config.camera, config.search_altitude, config.swath_overlap)
        self._guidance_state = GuidanceState()

        self._frames = deque(frame_schedule(
            config.camera.frame_rate_hz, config.detector, config.endurance))
        self._pending = deque()
        self._next_camera_frame = 0

        self._telemetry = []
        self._detections = []

    def start(self) -> MissionResult:
        """
        Fly the mission until the endurance is used up, the path is complete,
        or the vehicle crashes
        """
        stack = self._stack
        status = MissionStatus.ENDURANCE

        while stack.time < self._config.endurance - _TIME_EPS:
            self._serve_camera(stack.time, stack.state)
            self._release_results(stack.time)

            previous = stack.state
            control_tick = stack.step(self._guide)
            if control_tick is not None:
                self._telemetry.append(telemetry_row(control_tick))
                self._metrics.add_estimation_error(control_tick.state, control_tick.estimate)

            if (previous.altitude > 0.0 and stack.state.altitude == 0.0 and
                    previous.velocity.length() > CRASH_SPEED):
                status = MissionStatus.CRASHED
                break
            if self._guidance_state.index >= len(self._waypoints):
                status = MissionStatus.COMPLETED
                break

        flight_time = stack.time
        self._release_results(flight_time)
        self._metrics.frames_captured = (
            math.floor(flight_time * self._config.camera.frame_rate_hz + _TIME_EPS) + 1)

        return MissionResult(self._metrics.build(status, flight_time),
            self._telemetry, self._detections)

    def _guide(self, state: QuadState) -> Setpoints:
        setpoints, self._guidance_state = guidance_step(state, self._spawn,
            self._waypoints, self._guidance_state, self._config)
        return setpoints

    def _serve_camera(self, time: float, state: QuadState):
        """
        Mark the coverage of the camera frames taken by `time` and run the
        detector on the scheduled ones
        """
        camera = self._config.camera
        while self._next_camera_frame / camera.frame_rate_hz <= time + _TIME_EPS:
            self._metrics.coverage.mark(state, camera)
            self._next_camera_frame += 1

        while self._frames and self._frames[0].capture_time <= time + _TIME_EPS:
            frame = self._frames.popleft()
            sightings = self._sight_targets(state)
            raw = simulate_detector(sightings, self._config.detector, self._boxes,
                frame.index, self._config.seed)
            truths = {target_id: bbox for bbox, _, target_id in sightings}
            self._pending.append((frame, post_process(raw), truths))

    def _sight_targets(self, state: QuadState) -> list:
        if not state.altitude > 0.0:
            return []

        sightings = []
        for target in self._config.targets:
            projection = project_target(state, self._config.camera, target)
            if projection is not None:
                bbox, visibility = projection
                sightings.append((bbox, target.sighted_visibility(visibility), target.id))
        return sightings

    def _release_results(self, time: float):
        """
        Publish the detections of the frames whose processing is over by `time`
        """
        while self._pending and self._pending[0][0].result_time <= time + _TIME_EPS:
            frame, detections, truths = self._pending.popleft()
            self._metrics.frames_processed += 1
            for detection in detections:
                self._detections.append((frame.index, frame.result_time, detection))
                self._metrics.add_detection(detection.confidence)
                target_id = detection.target_id
                if (target_id is not None and
                        confirms_target(detection, target_id, truths[target_id])):
                    self._metrics.confirm_target(target_id, frame.result_time)

def run_mission(config: MissionConfig) -> MissionResult:
    """
    Run a mission and collect its metrics, telemetry and detections
    """
    return MissionExecutor(config).start()
