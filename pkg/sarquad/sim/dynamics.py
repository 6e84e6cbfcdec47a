"""
The rigid-body model of the quadcopter

Positions and velocities are kept in the world frame (x east, y north, z up).
The body frame is forward-right-down and the attitude is the ZYX Euler triple
(roll right-wing-down positive, pitch nose-up positive, yaw clockwise from
above positive, yaw 0 = north). The four motors sit on an X frame.
"""

from dataclasses import dataclass, field, replace
import math

from pygame.math import Vector3

from ..exceptions import InvalidArgumentError, SimulationDivergedError, require

GIMBAL_LOCK_PITCH = math.radians(80.0)

def wrap_angle(angle: float) -> float:
    """
    Wrap the angle to (-pi, pi]

    Angles already in range are returned untouched (bit for bit).
    """
    if -math.pi < angle <= math.pi:
        return angle
    wrapped = math.fmod(angle + math.pi, 2.0 * math.pi)
    if wrapped <= 0.0:
        wrapped += 2.0 * math.pi
    return wrapped - math.pi

def _is_finite(vector: Vector3) -> bool:
    return math.isfinite(vector.x) and math.isfinite(vector.y) and math.isfinite(vector.z)

@dataclass(frozen = True)
class QuadState:
    """
    The full rigid-body state of the vehicle

    The vectors are never mutated in place; every step builds new ones.

    @var position World position (x east, y north, z up) in m
    @var velocity World velocity in m/s
    @var attitude (roll, pitch, yaw) in rad
    @var angular_rates Body rates (p, q, r) in rad/s
    @var time Simulation time in s
    @var acceleration The linear acceleration applied by the last step, ground
         reaction included. The accelerometer reads its specific force from it.
    """
    position: Vector3 = field(default_factory = Vector3)
    velocity: Vector3 = field(default_factory = Vector3)
    attitude: Vector3 = field(default_factory = Vector3)
    angular_rates: Vector3 = field(default_factory = Vector3)
    time: float = 0.0
    acceleration: Vector3 = field(default_factory = Vector3)

    @property
    def roll(self) -> float:
        return self.attitude.x

    @property
    def pitch(self) -> float:
        return self.attitude.y

    @property
    def yaw(self) -> float:
        return self.attitude.z

    @property
    def altitude(self) -> float:
        return self.position.z

    def is_finite(self) -> bool:
        return (_is_finite(self.position) and _is_finite(self.velocity) and
            _is_finite(self.attitude) and _is_finite(self.angular_rates) and
            math.isfinite(self.time))

    @staticmethod
    def at_rest(x: float = 0.0, y: float = 0.0, z: float = 0.0, yaw: float = 0.0):
        """
        Create a state standing still at the specified place
        """
        return QuadState(position = Vector3(x, y, z), attitude = Vector3(0.0, 0.0, yaw))

@dataclass(frozen = True)
class MotorCommands:
    """
    Normalized throttles of the four motors in X configuration

    The constructor clamps every component to [0, 1].
    """
    front_left: float
    front_right: float
    rear_left: float
    rear_right: float

    def __post_init__(self):
        for name in ("front_left", "front_right", "rear_left", "rear_right"):
            object.__setattr__(self, name, min(1.0, max(0.0, getattr(self, name))))

    def __iter__(self):
        return iter((self.front_left, self.front_right, self.rear_left, self.rear_right))

    @property
    def mean(self) -> float:
        return (self.front_left + self.front_right + self.rear_left + self.rear_right) / 4.0

    @staticmethod
    def uniform(throttle: float):
        return MotorCommands(throttle, throttle, throttle, throttle)

@dataclass(frozen = True)
class QuadParams:
    """
    Physical constants of the vehicle

    The defaults are invented desk-scale values for a 1.2 kg frame. Only
    `max_speed` comes from the platform description.

    @var mass Mass in kg
    @var arm_length Distance from the center to each motor in m
    @var thrust_coeff Thrust of one motor per unit throttle in N
    @var torque_coeff Yaw drag torque of one motor per unit throttle in N*m
    @var inertia Diagonal of the inertia matrix (Ixx, Iyy, Izz) in kg*m^2
    @var gravity Gravity in m/s^2
    @var max_speed The speed cap in m/s
    @var drag_coeff Linear translational drag in N*s/m (0 disables it)
    """
    mass: float = 1.2
    arm_length: float = 0.25
    thrust_coeff: float = 6.0
    torque_coeff: float = 0.05
    inertia: tuple = (0.012, 0.012, 0.022)
    gravity: float = 9.81
    max_speed: float = 3.0
    drag_coeff: float = 0.25

    def __post_init__(self):
        for name in ("mass", "arm_length", "thrust_coeff", "torque_coeff",
                "gravity", "max_speed"):
            require(getattr(self, name) > 0, name, "must be strictly positive")
        require(len(self.inertia) == 3 and all(i > 0 for i in self.inertia),
            "inertia", "must be three strictly positive values")
        require(self.drag_coeff >= 0, "drag_coeff", "must not be negative")
        object.__setattr__(self, "inertia", tuple(float(i) for i in self.inertia))

def hover_throttle(params: QuadParams) -> float:
    """
    The throttle every motor needs so that the total thrust equals the weight
    """
    return params.mass * params.gravity / (4.0 * params.thrust_coeff)

def motor_mixer(base_throttle: float, roll_u: float, pitch_u: float,
        yaw_u: float) -> MotorCommands:
    """
    Combine the throttle and the three attitude corrections into motor commands

    Positive roll_u raises the left motors, positive pitch_u the front motors and
    positive yaw_u the diagonal pair spinning counter-clockwise (FR, RL).
    The result is clamped to [0, 1].
    """
    t, r, p, y = base_throttle, roll_u, pitch_u, yaw_u
    return MotorCommands(
        front_left = t + r + p - y,
        front_right = t - r + p + y,
        rear_left = t + r - p + y,
        rear_right = t - r - p - y)

def body_to_world_z(attitude: Vector3) -> tuple:
    """
    The third column of the body-to-NED rotation, i.e. the body down axis
    expressed in (north, east, down)
    """
    phi, theta, psi = attitude.x, attitude.y, attitude.z
    c_phi, s_phi = math.cos(phi), math.sin(phi)
    c_the, s_the = math.cos(theta), math.sin(theta)
    c_psi, s_psi = math.cos(psi), math.sin(psi)
    return (
        c_psi * s_the * c_phi + s_psi * s_phi,
        s_psi * s_the * c_phi - c_psi * s_phi,
        c_the * c_phi)

def world_to_body(vector_enu: Vector3, attitude: Vector3) -> Vector3:
    """
    Rotate a world (ENU) vector into the body (FRD) frame
    """
    north, east, down = vector_enu.y, vector_enu.x, -vector_enu.z
    phi, theta, psi = attitude.x, attitude.y, attitude.z
    c_phi, s_phi = math.cos(phi), math.sin(phi)
    c_the, s_the = math.cos(theta), math.sin(theta)
    c_psi, s_psi = math.cos(psi), math.sin(psi)

    # Rows of R^T are the columns of the body-to-NED rotation
    return Vector3(
        c_the * c_psi * north + c_the * s_psi * east - s_the * down,
        (s_phi * s_the * c_psi - c_phi * s_psi) * north +
        (s_phi * s_the * s_psi + c_phi * c_psi) * east + s_phi * c_the * down,
        (c_phi * s_the * c_psi + s_phi * s_psi) * north +
        (c_phi * s_the * s_psi - s_phi * c_psi) * east + c_phi * c_the * down)

def step_dynamics(state: QuadState, cmds: MotorCommands, params: QuadParams,
        dt: float) -> QuadState:
    """
    Advance the state by one semi-implicit Euler step

    Velocities are updated from the forces first and the positions from the new
    velocities. The attitude follows the body rates under the small-angle
    kinematics. Ground contact clamps z to 0 and removes the downward velocity.

    @param dt The time step in s. Steps up to 0.01 s keep the attitude loops stable.
    @return The new state
    @exception InvalidArgumentError If `dt` <= 0 or the state is not finite
    @exception SimulationDivergedError If the pitch enters the gimbal-lock region
    """
    if not dt > 0:
        raise InvalidArgumentError("dt", "must be strictly positive, got {}".format(dt))
    if not state.is_finite():
        raise InvalidArgumentError("state", "contains non-finite values")

    u_fl, u_fr, u_rl, u_rr = cmds
    k = params.thrust_coeff
    thrust = k * (u_fl + u_fr + u_rl + u_rr)
    d = params.arm_length / math.sqrt(2.0)

    # Forces: thrust along body -z, gravity, linear drag
    down_axis = body_to_world_z(state.attitude)
    specific_thrust = thrust / params.mass
    drag = params.drag_coeff / params.mass
    v = state.velocity
    acceleration = Vector3(
        -specific_thrust * down_axis[1] - drag * v.x,
        -specific_thrust * down_axis[0] - drag * v.y,
        specific_thrust * down_axis[2] - params.gravity - drag * v.z)

    # Torques and Euler's rotation equation for a diagonal inertia
    tau_x = d * k * (u_fl - u_fr + u_rl - u_rr)
    tau_y = d * k * (u_fl + u_fr - u_rl - u_rr)
    tau_z = params.torque_coeff * (-u_fl + u_fr + u_rl - u_rr)
    i_xx, i_yy, i_zz = params.inertia
    p, q, r = state.angular_rates.x, state.angular_rates.y, state.angular_rates.z
    angular_acceleration = Vector3(
        (tau_x - (i_zz - i_yy) * q * r) / i_xx,
        (tau_y - (i_xx - i_zz) * r * p) / i_yy,
        (tau_z - (i_yy - i_xx) * p * q) / i_zz)

    velocity = v + acceleration * dt
    position = state.position + velocity * dt
    rates = state.angular_rates + angular_acceleration * dt
    attitude = state.attitude + rates * dt
    attitude = Vector3(wrap_angle(attitude.x), wrap_angle(attitude.y), wrap_angle(attitude.z))

    # Ground contact: no penetration, no bounce
    if position.z <= 0.0:
        position.z = 0.0
        if velocity.z < 0.0:
            velocity.z = 0.0
        if acceleration.z < 0.0:
            acceleration.z = 0.0

    if abs(attitude.y) > GIMBAL_LOCK_PITCH:
        raise SimulationDivergedError(
            "pitch {:.3f} rad is beyond the gimbal-lock guard".format(attitude.y))

    return replace(state, position = position, velocity = velocity,
        attitude = attitude, angular_rates = rates, time = state.time + dt,
        acceleration = acceleration)
