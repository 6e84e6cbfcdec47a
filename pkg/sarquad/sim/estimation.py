"""
Attitude and altitude estimation

The complementary filter trusts the gyroscope in the short term and the
accelerometer in the long term. An accelerometer sample whose magnitude falls
outside the plausibility window is treated as a complete disturbance and the
filter falls back to the gyro prediction for that sample.
"""

from dataclasses import dataclass, replace
import math

from pygame.math import Vector3

from ..exceptions import InvalidArgumentError, require
from .dynamics import wrap_angle
from .sensors import EchoSample, ImuSample, STANDARD_GRAVITY, UltrasonicModel, \
    echo_time_to_altitude

@dataclass(frozen = True)
class AttitudeEstimate:
    """
    @var roll Estimated roll in rad
    @var pitch Estimated pitch in rad
    @var yaw Estimated yaw in rad, integrated from the gyro only
    @var altitude Estimated height above ground in m
    @var time The time of the last sample fused in s
    """
    roll: float = 0.0
    pitch: float = 0.0
    yaw: float = 0.0
    altitude: float = 0.0
    time: float = 0.0

@dataclass(frozen = True)
class FilterParams:
    """
    @var alpha The weight of the gyro path in [0, 1]
    @var accel_mag_min The lower bound of the accepted |accel| in m/s^2
    @var accel_mag_max The upper bound of the accepted |accel| in m/s^2 (may be inf)
    @var altitude_lpf_coeff The weight of a fresh ultrasonic altitude in [0, 1]
    @var dt The IMU sample period in s
    """
    alpha: float = 0.98
    accel_mag_min: float = 0.5 * STANDARD_GRAVITY
    accel_mag_max: float = 1.5 * STANDARD_GRAVITY
    altitude_lpf_coeff: float = 0.5
    dt: float = 1.0 / 250.0

    def __post_init__(self):
        require(0 <= self.alpha <= 1, "alpha", "must be in [0, 1]")
        require(0 <= self.altitude_lpf_coeff <= 1, "altitude_lpf_coeff", "must be in [0, 1]")
        require(self.accel_mag_min >= 0, "accel_mag_min", "must not be negative")
        require(self.accel_mag_min < self.accel_mag_max, "accel_mag_max",
            "must be greater than accel_mag_min")
        require(self.dt > 0, "dt", "must be strictly positive")

    def accepts(self, accel: Vector3) -> bool:
        """
        Check whether the magnitude of the accelerometer reading is plausible
        """
        return self.accel_mag_min <= accel.length() <= self.accel_mag_max

def accel_to_angles(accel: Vector3):
    """
    Compute (roll, pitch) from the gravity direction seen by the accelerometer

    @exception InvalidArgumentError If the reading has zero magnitude
    """
    if accel.length_squared() == 0.0:
        raise InvalidArgumentError("accel", "must have a non-zero magnitude")

    roll = math.atan2(-accel.y, -accel.z)
    pitch = math.atan2(accel.x, math.sqrt(accel.y * accel.y + accel.z * accel.z))
    return roll, pitch

def gyro_prediction(prev: AttitudeEstimate, imu: ImuSample, dt: float):
    """
    Integrate the body rates over one sample period

    @return The predicted (roll, pitch, yaw)
    """
    return (
        prev.roll + imu.gyro.x * dt,
        prev.pitch + imu.gyro.y * dt,
        wrap_angle(prev.yaw + imu.gyro.z * dt))

def complementary_update(prev: AttitudeEstimate, imu: ImuSample,
        params: FilterParams) -> AttitudeEstimate:
    """
    Fuse one IMU sample into the estimate

    The altitude of `prev` is carried over unchanged.
    """
    roll, pitch, yaw = gyro_prediction(prev, imu, params.dt)

    if params.accepts(imu.accel):
        accel_roll, accel_pitch = accel_to_angles(imu.accel)
        a = params.alpha
        roll = a * roll + (1.0 - a) * accel_roll
        pitch = a * pitch + (1.0 - a) * accel_pitch

    return replace(prev, roll = wrap_angle(roll), pitch = wrap_angle(pitch),
        yaw = yaw, time = imu.time)

def altitude_update(prev_altitude: float, echo: EchoSample,
        model: UltrasonicModel, params: FilterParams) -> float:
    """
    Low-pass the altitude recovered from an echo time

    A missing echo holds the previous altitude.
    """
    require(prev_altitude >= 0, "prev_altitude", "must not be negative")
    if echo.is_dropout:
        return prev_altitude

    raw = echo_time_to_altitude(echo.echo_time, model)
    k = params.altitude_lpf_coeff
    return (1.0 - k) * prev_altitude + k * raw
