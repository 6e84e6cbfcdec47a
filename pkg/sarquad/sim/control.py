"""
PID controllers for roll, pitch, yaw and altitude composed into motor commands
"""

from dataclasses import dataclass, field
import math

from ..exceptions import InvalidArgumentError, require
from .dynamics import motor_mixer, wrap_angle
from .estimation import AttitudeEstimate

SETPOINT_TILT_LIMIT = 0.5

def _clamp(value: float, limit: float) -> float:
    return max(-limit, min(limit, value))

@dataclass(frozen = True)
class PidGains:
    """
    @var integral_limit The clamp of the accumulated integral
    @var output_limit The clamp of the controller output
    """
    kp: float = 0.0
    ki: float = 0.0
    kd: float = 0.0
    integral_limit: float = 1.0
    output_limit: float = 1.0

    def __post_init__(self):
        for name in ("kp", "ki", "kd"):
            require(getattr(self, name) >= 0, name, "must not be negative")
        require(self.integral_limit > 0, "integral_limit", "must be strictly positive")
        require(self.output_limit > 0, "output_limit", "must be strictly positive")

@dataclass(frozen = True)
class PidState:
    integral: float = 0.0
    prev_error: float = 0.0
    initialized: bool = False

def pid_step(gains: PidGains, state: PidState, error: float, dt: float):
    """
    Run one step of a PID controller

    The integral is clamped before it is used and the derivative is taken on
    the error. The first call has no derivative.

    @return A tuple (output, new `PidState`)
    """
    if not dt > 0:
        raise InvalidArgumentError("dt", "must be strictly positive, got {}".format(dt))

    integral = _clamp(state.integral + error * dt, gains.integral_limit)
    derivative = (error - state.prev_error) / dt if state.initialized else 0.0
    output = gains.kp * error + gains.ki * integral + gains.kd * derivative

    return _clamp(output, gains.output_limit), PidState(integral, error, True)

@dataclass(frozen = True)
class Setpoints:
    """
    @var roll_sp, pitch_sp, yaw_sp In rad
    @var altitude_sp In m
    """
    roll_sp: float = 0.0
    pitch_sp: float = 0.0
    yaw_sp: float = 0.0
    altitude_sp: float = 0.0

    def __post_init__(self):
        for name in ("roll_sp", "pitch_sp", "yaw_sp", "altitude_sp"):
            require(math.isfinite(getattr(self, name)), name, "must be finite")
        require(abs(self.roll_sp) <= SETPOINT_TILT_LIMIT, "roll_sp",
            "exceeds the tilt envelope {} rad".format(SETPOINT_TILT_LIMIT))
        require(abs(self.pitch_sp) <= SETPOINT_TILT_LIMIT, "pitch_sp",
            "exceeds the tilt envelope {} rad".format(SETPOINT_TILT_LIMIT))

@dataclass(frozen = True)
class PidBank:
    """
    The gains of the four controllers
    """
    roll: PidGains = PidGains(0.4, 0.05, 0.06, 0.5, 0.2)
    pitch: PidGains = PidGains(0.4, 0.05, 0.06, 0.5, 0.2)
    yaw: PidGains = PidGains(1.0, 0.0, 0.6, 0.5, 0.15)
    altitude: PidGains = PidGains(0.1125, 0.005, 0.15, 4.0, 0.3)

@dataclass(frozen = True)
class ControlStates:
    """
    The states of the four controllers

    @var altitude_output The altitude correction held between two ultrasonic pings
    """
    roll: PidState = field(default_factory = PidState)
    pitch: PidState = field(default_factory = PidState)
    yaw: PidState = field(default_factory = PidState)
    altitude: PidState = field(default_factory = PidState)
    altitude_output: float = 0.0

def control_step(estimate: AttitudeEstimate, setpoints: Setpoints, bank: PidBank,
        states: ControlStates, hover_throttle: float, dt: float,
        altitude_due: bool = True, altitude_dt: float = None):
    """
    Compute the motor commands of one control tick

    The attitude controllers run on every call. The altitude controller runs
    only when `altitude_due` is set (a fresh ultrasonic altitude is available)
    with the step `altitude_dt`; otherwise its last output is held.

    @return A tuple (`MotorCommands`, new `ControlStates`)
    """
    if not dt > 0:
        raise InvalidArgumentError("dt", "must be strictly positive, got {}".format(dt))

    roll_u, roll_state = pid_step(bank.roll, states.roll,
        setpoints.roll_sp - estimate.roll, dt)
    pitch_u, pitch_state = pid_step(bank.pitch, states.pitch,
        setpoints.pitch_sp - estimate.pitch, dt)
    yaw_u, yaw_state = pid_step(bank.yaw, states.yaw,
        wrap_angle(setpoints.yaw_sp - estimate.yaw), dt)

    altitude_u, altitude_state = states.altitude_output, states.altitude
    if altitude_due:
        altitude_u, altitude_state = pid_step(bank.altitude, states.altitude,
            setpoints.altitude_sp - estimate.altitude,
            dt if altitude_dt is None else altitude_dt)

    commands = motor_mixer(hover_throttle + altitude_u, roll_u, pitch_u, yaw_u)
    new_states = ControlStates(roll_state, pitch_state, yaw_state,
        altitude_state, altitude_u)
    return commands, new_states
