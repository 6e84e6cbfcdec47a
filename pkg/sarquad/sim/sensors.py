"""
Noisy sensor readings generated from the true state

The noise magnitudes of every default below are invented desk-scale values;
the platform description names the parts but quantifies none of their noise.
"""

from dataclasses import dataclass, replace
import math
from typing import Optional

from pygame.math import Vector3

from ..exceptions import require
from ..rng import CounterStream, Subsystem
from .dynamics import QuadState, world_to_body

STANDARD_GRAVITY = 9.81

@dataclass(frozen = True)
class ImuSample:
    """
    One reading of the 6-DOF IMU

    @var gyro Body rates in rad/s
    @var accel The accelerometer reading in m/s^2. It is (0, 0, -g) when level at rest.
    @var time Simulation time in s
    """
    gyro: Vector3
    accel: Vector3
    time: float

@dataclass(frozen = True)
class GyroModel:
    """
    @var bias0 The initial bias (x, y, z) in rad/s
    @var bias_random_walk_std The bias random walk density in rad/s per sqrt(s)
    @var white_noise_std The white noise of each sample in rad/s
    """
    bias0: tuple = (0.002, -0.001, 0.001)
    bias_random_walk_std: float = 1e-4
    white_noise_std: float = 0.002

    def __post_init__(self):
        require(len(self.bias0) == 3, "bias0", "must have three components")
        require(self.bias_random_walk_std >= 0, "bias_random_walk_std", "must not be negative")
        require(self.white_noise_std >= 0, "white_noise_std", "must not be negative")
        object.__setattr__(self, "bias0", tuple(float(b) for b in self.bias0))

    @staticmethod
    def noise_free():
        return GyroModel((0.0, 0.0, 0.0), 0.0, 0.0)

@dataclass(frozen = True)
class AccelModel:
    """
    @var white_noise_std White noise of each axis in m/s^2
    @var vibration_amplitude_per_throttle Motor vibration amplitude in m/s^2 per unit
         mean throttle
    @var vibration_freq Vibration frequency in Hz
    @var spike_probability The probability of an outlier per sample
    @var spike_scale The magnitude of an outlier in m/s^2
    """
    white_noise_std: float = 0.05
    vibration_amplitude_per_throttle: float = 0.4
    vibration_freq: float = 37.0
    spike_probability: float = 0.002
    spike_scale: float = 5.0 * STANDARD_GRAVITY

    def __post_init__(self):
        for name in ("white_noise_std", "vibration_amplitude_per_throttle",
                "vibration_freq", "spike_probability", "spike_scale"):
            require(getattr(self, name) >= 0, name, "must not be negative")
        require(self.spike_probability <= 1, "spike_probability", "must not exceed 1")

    @staticmethod
    def noise_free():
        return AccelModel(0.0, 0.0, 0.0, 0.0, 0.0)

@dataclass(frozen = True)
class UltrasonicModel:
    """
    @var sound_speed Speed of sound in m/s (20 degC)
    @var echo_noise_std Gaussian noise on the echo time in s
    @var max_range The furthest distance giving an echo in m
    @var dropout_probability The probability of a missing echo per ping
    """
    sound_speed: float = 343.0
    echo_noise_std: float = 2e-5
    max_range: float = 4.0
    dropout_probability: float = 0.02

    def __post_init__(self):
        require(self.sound_speed > 0, "sound_speed", "must be strictly positive")
        require(self.max_range > 0, "max_range", "must be strictly positive")
        require(self.echo_noise_std >= 0, "echo_noise_std", "must not be negative")
        require(0 <= self.dropout_probability <= 1, "dropout_probability",
            "must be in [0, 1]")

    @staticmethod
    def noise_free(max_range: float = 4.0):
        return UltrasonicModel(343.0, 0.0, max_range, 0.0)

@dataclass(frozen = True)
class EchoSample:
    """
    One ping of the ultrasonic sensor

    @var echo_time The round-trip time in s, or None when the echo is missing
    @var time Simulation time in s
    """
    echo_time: Optional[float]
    time: float

    @property
    def is_dropout(self) -> bool:
        return self.echo_time is None

@dataclass(frozen = True)
class ImuChannel:
    """
    The state of the IMU noise process between two samples

    @var stream The counter stream dedicated to the IMU
    @var dt The sample period in s
    @var index The index of the next sample
    @var gyro_bias The current gyro bias (x, y, z) in rad/s
    """
    stream: CounterStream
    dt: float
    index: int = 0
    gyro_bias: tuple = (0.0, 0.0, 0.0)

    @staticmethod
    def start(seed: int, gyro: GyroModel, rate: float):
        """
        Create the channel of a mission
        """
        return ImuChannel(CounterStream(seed, Subsystem.IMU), 1.0 / rate, 0, gyro.bias0)

@dataclass(frozen = True)
class UltrasonicChannel:
    """
    @var stream The counter stream dedicated to the ultrasonic sensor
    @var index The index of the next ping
    """
    stream: CounterStream
    index: int = 0

    @staticmethod
    def start(seed: int):
        return UltrasonicChannel(CounterStream(seed, Subsystem.ULTRASONIC))

def specific_force(state: QuadState, gravity: float) -> Vector3:
    """
    The noise-free accelerometer reading of the state: R^T (a - g) with the
    gravity vector pointing down, expressed in the body frame
    """
    return world_to_body(state.acceleration + Vector3(0.0, 0.0, gravity), state.attitude)

def sample_imu(true_state: QuadState, mean_throttle: float, gyro: GyroModel,
        accel: AccelModel, channel: ImuChannel,
        gravity: float = STANDARD_GRAVITY):
    """
    Read the gyroscope and the accelerometer

    Every sample draws the same block of numbers whatever the model
    parameters are: 3 gyro white noise, 3 bias steps, 3 accel white noise,
    1 spike decision and 3 spike directions.

    @param mean_throttle The mean motor throttle driving the vibration
    @param channel The IMU noise state
    @return A tuple (`ImuSample`, next `ImuChannel`)
    """
    generator = channel.stream.generator(channel.index)
    draws = generator.standard_normal(9)
    spike_draw = generator.random()
    spike_direction = generator.standard_normal(3)

    bias = channel.gyro_bias
    gyro_reading = Vector3(
        true_state.angular_rates.x + bias[0] + gyro.white_noise_std * draws[0],
        true_state.angular_rates.y + bias[1] + gyro.white_noise_std * draws[1],
        true_state.angular_rates.z + bias[2] + gyro.white_noise_std * draws[2])
    walk = gyro.bias_random_walk_std * math.sqrt(channel.dt)
    next_bias = (
        bias[0] + walk * draws[3],
        bias[1] + walk * draws[4],
        bias[2] + walk * draws[5])

    vibration = (accel.vibration_amplitude_per_throttle * mean_throttle *
        math.sin(2.0 * math.pi * accel.vibration_freq * true_state.time))
    force = specific_force(true_state, gravity)
    accel_reading = Vector3(
        force.x + accel.white_noise_std * draws[6] + vibration,
        force.y + accel.white_noise_std * draws[7] + vibration,
        force.z + accel.white_noise_std * draws[8] + vibration)

    if spike_draw < accel.spike_probability:
        direction = Vector3(*(float(d) for d in spike_direction))
        if direction.length_squared() > 0.0:
            accel_reading += direction.normalize() * accel.spike_scale

    sample = ImuSample(gyro_reading, accel_reading, true_state.time)
    return sample, replace(channel, index = channel.index + 1, gyro_bias = next_bias)

def sample_ultrasonic(true_altitude: float, model: UltrasonicModel,
        channel: UltrasonicChannel, time: float = 0.0):
    """
    Ping the ultrasonic sensor

    @param true_altitude The height above ground in m (>= 0)
    @return A tuple (`EchoSample`, next `UltrasonicChannel`)
    """
    require(true_altitude >= 0, "true_altitude", "must not be negative")

    generator = channel.stream.generator(channel.index)
    noise, dropout_draw = generator.standard_normal(), generator.random()
    next_channel = replace(channel, index = channel.index + 1)

    if true_altitude > model.max_range or dropout_draw < model.dropout_probability:
        return EchoSample(None, time), next_channel

    echo_time = 2.0 * true_altitude / model.sound_speed + model.echo_noise_std * noise
    return EchoSample(max(0.0, echo_time), time), next_channel

def echo_time_to_altitude(echo_time: float, model: UltrasonicModel) -> float:
    """
    The inverse of the measurement model: distance = c * t / 2
    """
    return model.sound_speed * echo_time / 2.0
