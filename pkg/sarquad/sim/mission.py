"""
The pieces of a search mission: the configuration, the lawnmower pattern, the
detector frame schedule, the waypoint follower, the coverage grid and the
metrics

The fixed-step loop wiring them together lives in `sarquad.loops`.
"""

from dataclasses import dataclass
import math
from typing import List, Optional, Tuple

import numpy as np
from pygame.math import Vector2

from ..exceptions import InvalidArgumentError, require
from ..utils.enum import StringEnum, auto
from .control import PidBank, Setpoints
from .dynamics import QuadParams, QuadState, wrap_angle
from .estimation import FilterParams
from .perception import CameraModel, DetectorProfile, DETECTOR_PRESETS, \
    DetectorPreset, GroundTarget, ground_footprint
from .sensors import AccelModel, GyroModel, UltrasonicModel

# A touchdown faster than this is a crash
CRASH_SPEED = 1.0

_TIME_EPS = 1e-9

def ticks_per_sample(rate: float, physics_dt: float) -> int:
    """
    The number of physics ticks between two samples of a periodic task

    @exception InvalidArgumentError If the period is not a whole number of ticks
    """
    ticks = 1.0 / (rate * physics_dt)
    rounded = int(round(ticks))
    if rounded < 1 or abs(ticks - rounded) > 1e-6:
        raise InvalidArgumentError("rate",
            "{} Hz is not a whole number of physics ticks of {} s".format(rate, physics_dt))
    return rounded

@dataclass(frozen = True)
class GuidanceParams:
    """
    The gains of the waypoint follower

    @var along_gain The along-track speed per m of remaining distance in 1/s
    @var cross_gain The cross-track correction speed per m of error in 1/s
    @var velocity_gain The acceleration per m/s of velocity error in 1/s
    @var max_tilt The cap of the roll and pitch setpoints in rad
    @var waypoint_tolerance The distance a waypoint counts as reached at in m
    @var takeoff_fraction The fraction of the search altitude ending the take-off
    """
    along_gain: float = 0.5
    cross_gain: float = 0.5
    velocity_gain: float = 2.0
    max_tilt: float = 0.3
    waypoint_tolerance: float = 1.0
    takeoff_fraction: float = 0.9

    def __post_init__(self):
        for name in ("along_gain", "cross_gain", "velocity_gain", "waypoint_tolerance"):
            require(getattr(self, name) > 0, name, "must be strictly positive")
        require(0 < self.max_tilt <= 0.5, "max_tilt", "must be in (0, 0.5]")
        require(0 < self.takeoff_fraction <= 1, "takeoff_fraction", "must be in (0, 1]")

@dataclass(frozen = True)
class MissionConfig:
    """
    Everything a mission run depends on

    The default noise and gain values are invented desk-scale numbers. Only
    the speed cap, the endurance range and the camera format follow the
    platform description.
    """
    world_width: float
    world_height: float
    spawn: Tuple[float, float] = (0.0, 0.0)
    search_altitude: float = 3.0
    cruise_speed: float = 1.5
    endurance: float = 720.0
    targets: Tuple[GroundTarget, ...] = ()
    detector: DetectorProfile = DETECTOR_PRESETS[DetectorPreset.SSD]
    swath_overlap: float = 0.1
    seed: int = 0
    physics_dt: float = 0.002
    imu_rate: float = 250.0
    control_rate: float = 250.0
    ultrasonic_rate: float = 20.0
    quad: QuadParams = QuadParams()
    gyro: GyroModel = GyroModel()
    accel: AccelModel = AccelModel()
    ultrasonic: UltrasonicModel = UltrasonicModel()
    filter: FilterParams = FilterParams()
    pid: PidBank = PidBank()
    camera: CameraModel = CameraModel()
    guidance: GuidanceParams = GuidanceParams()

    def __post_init__(self):
        for name in ("world_width", "world_height", "search_altitude", "cruise_speed",
                "endurance", "physics_dt", "imu_rate", "control_rate", "ultrasonic_rate"):
            require(math.isfinite(getattr(self, name)), name, "must be finite")
        require(self.world_width > 0, "world_width", "must be strictly positive")
        require(self.world_height > 0, "world_height", "must be strictly positive")
        require(self.search_altitude > 0, "search_altitude", "must be strictly positive")
        require(self.search_altitude < self.ultrasonic.max_range, "search_altitude",
            "must be below the ultrasonic max_range {}".format(self.ultrasonic.max_range))
        require(0 < self.cruise_speed <= self.quad.max_speed, "cruise_speed",
            "exceeds max_speed {}".format(self.quad.max_speed) if self.cruise_speed > 0
            else "must be strictly positive")
        require(self.endurance > 0, "endurance", "must be strictly positive")
        require(0 <= self.swath_overlap < 1, "swath_overlap", "must be in [0, 1)")
        require(0 <= self.seed < 2 ** 64, "seed", "must be a 64-bit unsigned integer")
        require(self.physics_dt > 0, "physics_dt", "must be strictly positive")
        require(self._inside(*self.spawn), "spawn", "must be inside the world")

        for name in ("imu_rate", "control_rate", "ultrasonic_rate"):
            try:
                ticks_per_sample(getattr(self, name), self.physics_dt)
            except InvalidArgumentError as e:
                raise InvalidArgumentError(name, e.reason)
        require(abs(self.filter.dt * self.imu_rate - 1.0) < 1e-9, "filter.dt",
            "must be the IMU period 1/imu_rate")

        ids = set()
        for target in self.targets:
            require(self._inside(target.x, target.y), "target.{}".format(target.id),
                "must be inside the world")
            require(target.id not in ids, "target.{}".format(target.id), "duplicated id")
            ids.add(target.id)

    def _inside(self, x, y) -> bool:
        return 0 <= x <= self.world_width and 0 <= y <= self.world_height

    @property
    def imu_ticks(self) -> int:
        return ticks_per_sample(self.imu_rate, self.physics_dt)

    @property
    def control_ticks(self) -> int:
        return ticks_per_sample(self.control_rate, self.physics_dt)

    @property
    def ultrasonic_ticks(self) -> int:
        return ticks_per_sample(self.ultrasonic_rate, self.physics_dt)

class MissionStatus(StringEnum):
    """
    Why a mission run ended
    """
    COMPLETED = auto()
    ENDURANCE = auto()
    CRASHED = auto()

@dataclass(frozen = True)
class MissionMetrics:
    """
    @var time_to_first_detection The time of the first confirmed target in s, or None
    @var mean_confidence The mean confidence of the emitted detections, or None
    @var roll_rms_error, pitch_rms_error In rad, over the control ticks
    @var altitude_rms_error In m, over the control ticks
    """
    detector: str
    status: MissionStatus
    targets_total: int
    targets_detected: int
    time_to_first_detection: Optional[float]
    detections_emitted: int
    frames_captured: int
    frames_processed: int
    coverage_fraction: float
    flight_time: float
    crashed: bool
    mean_confidence: Optional[float]
    roll_rms_error: float
    pitch_rms_error: float
    altitude_rms_error: float

def generate_lawnmower(world_width: float, world_height: float, camera: CameraModel,
        altitude: float, overlap: float) -> List[Vector2]:
    """
    Generate the boustrophedon waypoints covering the world

    The rows run south to north and are centred across the world. The first
    row starts at its south end.

    @return A list of `Vector2` (east, north)
    """
    if not altitude > 0:
        raise InvalidArgumentError("altitude", "must be strictly positive")
    if not 0 <= overlap < 1:
        raise InvalidArgumentError("overlap", "must be in [0, 1)")
    if not (0 < world_width < math.inf and 0 < world_height < math.inf):
        raise InvalidArgumentError("world", "dimensions must be finite and strictly positive")

    swath = ground_footprint(camera, altitude)[0]
    spacing = swath * (1.0 - overlap)
    rows = 1 if swath >= world_width else math.ceil(world_width / spacing)
    first_x = (world_width - (rows - 1) * spacing) / 2.0

    waypoints = []
    for row in range(rows):
        x = first_x + row * spacing
        ends = (0.0, world_height) if row % 2 == 0 else (world_height, 0.0)
        waypoints.extend(Vector2(x, y) for y in ends)

    return waypoints

@dataclass(frozen = True)
class ScheduledFrame:
    """
    A camera frame the detector accepts

    @var index The camera frame index
    @var capture_time The time the frame is taken in s
    @var start_time The time the detector accepts it in s
    @var result_time The time its detections are available in s
    """
    index: int
    capture_time: float
    start_time: float
    result_time: float

def frame_schedule(camera_rate: float, profile: DetectorProfile,
        duration: float) -> List[ScheduledFrame]:
    """
    Schedule the frames the detector processes within `duration`

    Whenever the detector is free it takes the most recent frame, dropping the
    older ones, and stays busy for `seconds_per_image`. A frame counts when its
    result is ready within the duration.
    """
    if not camera_rate > 0:
        raise InvalidArgumentError("camera_rate", "must be strictly positive")
    if not math.isfinite(duration):
        raise InvalidArgumentError("duration", "must be finite")

    frames = []
    free_at = 0.0
    last_index = -1
    while True:
        index = math.floor(free_at * camera_rate + _TIME_EPS)
        if index <= last_index:
            index = last_index + 1
        capture_time = index / camera_rate
        start_time = max(free_at, capture_time)
        result_time = start_time + profile.seconds_per_image
        if result_time > duration + _TIME_EPS:
            break

        frames.append(ScheduledFrame(index, capture_time, start_time, result_time))
        free_at = result_time
        last_index = index

    return frames

@dataclass(frozen = True)
class GuidanceState:
    """
    @var index The index of the waypoint being flown to
    @var airborne Whether the take-off is over
    """
    index: int = 0
    airborne: bool = False

def _heading_of(vector: Vector2, fallback: float) -> float:
    if vector.length_squared() == 0.0:
        return fallback
    return math.atan2(vector.x, vector.y)

def guidance_step(nav: QuadState, spawn: Vector2, waypoints: List[Vector2],
        state: GuidanceState, config: MissionConfig):
    """
    Compute the setpoints toward the current waypoint

    The navigation solution is the true state: the platform carries no
    positioning sensor. Until the vehicle climbs to `takeoff_fraction` of the
    search altitude it holds the spawn point.

    @return A tuple (`Setpoints`, new `GuidanceState`). The index equals
            `len(waypoints)` once the path is complete.
    """
    params = config.guidance
    position = Vector2(nav.position.x, nav.position.y)
    velocity = Vector2(nav.velocity.x, nav.velocity.y)
    altitude_sp = config.search_altitude

    airborne = state.airborne or nav.altitude >= params.takeoff_fraction * altitude_sp
    index = state.index
    if airborne:
        while (index < len(waypoints) and
                position.distance_to(waypoints[index]) <= params.waypoint_tolerance):
            index += 1
    new_state = GuidanceState(index, airborne)

    if index >= len(waypoints):
        return Setpoints(0.0, 0.0, nav.yaw, altitude_sp), new_state

    if airborne:
        start = spawn if index == 0 else waypoints[index - 1]
        end = waypoints[index]
    else:
        start, end = spawn, spawn
    segment = end - start
    yaw_sp = _heading_of(segment if airborne else waypoints[0] - spawn, nav.yaw)

    # Desired velocity: along the segment toward the end, back onto the line across it
    offset = position - start
    if segment.length_squared() > 0.0:
        direction = segment.normalize()
        along = offset.dot(direction)
        cross = offset - direction * along
        remaining = segment.length() - along
        along_speed = max(-config.cruise_speed,
            min(config.cruise_speed, params.along_gain * remaining))
        desired = direction * along_speed - cross * params.cross_gain
    else:
        desired = (end - position) * params.cross_gain
    if desired.length() > config.cruise_speed:
        desired.scale_to_length(config.cruise_speed)

    # Desired acceleration with the drag feed-forward, mapped to tilts in the
    # heading frame
    quad = config.quad
    accel = (desired - velocity) * params.velocity_gain + desired * (quad.drag_coeff / quad.mass)
    c_psi, s_psi = math.cos(nav.yaw), math.sin(nav.yaw)
    accel_forward = c_psi * accel.y + s_psi * accel.x
    accel_right = -s_psi * accel.y + c_psi * accel.x
    limit = params.max_tilt
    pitch_sp = max(-limit, min(limit, -accel_forward / quad.gravity))
    roll_sp = max(-limit, min(limit, accel_right / quad.gravity))

    return Setpoints(roll_sp, pitch_sp, wrap_angle(yaw_sp), altitude_sp), new_state

class CoverageGrid:
    """
    The 1 m occupancy grid of the ground swept by the camera footprint
    """

    def __init__(self, world_width: float, world_height: float, cell_size: float = 1.0):
        columns = max(1, math.ceil(world_width / cell_size))
        rows = max(1, math.ceil(world_height / cell_size))
        xs = (np.arange(columns) + 0.5) * cell_size
        ys = (np.arange(rows) + 0.5) * cell_size
        self._centers_x, self._centers_y = np.meshgrid(xs, ys)
        self._covered = np.zeros((rows, columns), dtype = bool)

    def mark(self, nav: QuadState, camera: CameraModel):
        """
        Mark the cells whose centers lie in the current footprint
        """
        if not nav.altitude > 0:
            return

        footprint_width, footprint_height = ground_footprint(camera, nav.altitude)
        dx = self._centers_x - nav.position.x
        dy = self._centers_y - nav.position.y
        c_psi, s_psi = math.cos(nav.yaw), math.sin(nav.yaw)
        forward = c_psi * dy + s_psi * dx
        right = -s_psi * dy + c_psi * dx
        self._covered |= ((np.abs(right) <= footprint_width / 2.0) &
            (np.abs(forward) <= footprint_height / 2.0))

    @property
    def fraction(self) -> float:
        return float(self._covered.mean())

class MetricsAccumulator:
    """
    Collect the counters of a running mission and build `MissionMetrics`
    """

    def __init__(self, config: MissionConfig):
        self._config = config
        self.detected_targets = set()
        self.time_to_first_detection = None
        self.detections_emitted = 0
        self.confidence_sum = 0.0
        self.frames_captured = 0
        self.frames_processed = 0
        self.coverage = CoverageGrid(config.world_width, config.world_height)
        self._squared_errors = [0.0, 0.0, 0.0]
        self._error_samples = 0

    def add_estimation_error(self, truth: QuadState, estimate):
        self._squared_errors[0] += wrap_angle(estimate.roll - truth.roll) ** 2
        self._squared_errors[1] += wrap_angle(estimate.pitch - truth.pitch) ** 2
        self._squared_errors[2] += (estimate.altitude - truth.altitude) ** 2
        self._error_samples += 1

    def add_detection(self, confidence: float):
        self.detections_emitted += 1
        self.confidence_sum += confidence

    def confirm_target(self, target_id: int, time: float):
        if target_id in self.detected_targets:
            return
        self.detected_targets.add(target_id)
        if self.time_to_first_detection is None:
            self.time_to_first_detection = time

    def build(self, status: MissionStatus, flight_time: float) -> MissionMetrics:
        samples = max(1, self._error_samples)
        roll_rms, pitch_rms, altitude_rms = (
            math.sqrt(total / samples) for total in self._squared_errors)
        return MissionMetrics(
            detector = self._config.detector.name,
            status = status,
            targets_total = len(self._config.targets),
            targets_detected = len(self.detected_targets),
            time_to_first_detection = self.time_to_first_detection,
            detections_emitted = self.detections_emitted,
            frames_captured = self.frames_captured,
            frames_processed = self.frames_processed,
            coverage_fraction = self.coverage.fraction,
            flight_time = flight_time,
            crashed = status == MissionStatus.CRASHED,
            mean_confidence = (self.confidence_sum / self.detections_emitted
                if self.detections_emitted else None),
            roll_rms_error = roll_rms,
            pitch_rms_error = pitch_rms,
            altitude_rms_error = altitude_rms)
