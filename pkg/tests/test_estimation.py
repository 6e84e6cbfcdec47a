import math

import pytest
from pygame.math import Vector3

from sarquad.exceptions import InvalidArgumentError
from sarquad.sim.dynamics import QuadState
from sarquad.sim.estimation import AttitudeEstimate, FilterParams, accel_to_angles, \
    altitude_update, complementary_update, gyro_prediction
from sarquad.sim.sensors import AccelModel, EchoSample, GyroModel, ImuChannel, \
    ImuSample, UltrasonicModel, sample_imu

G = 9.81
LEVEL = Vector3(0.0, 0.0, -G)

@pytest.mark.parametrize("accel, expected", [
    ((0.0, 0.0, -G), (0.0, 0.0)),
    ((G / math.sqrt(2), 0.0, -G / math.sqrt(2)), (0.0, math.pi / 4)),
    ((0.0, G / math.sqrt(2), -G / math.sqrt(2)), (-math.pi / 4, 0.0)),
])
def test_accel_to_angles(accel, expected):
    assert accel_to_angles(Vector3(*accel)) == pytest.approx(expected)

def test_accel_to_angles_zero():
    with pytest.raises(InvalidArgumentError):
        accel_to_angles(Vector3(0.0, 0.0, 0.0))

def test_fixed_point_at_rest():
    estimate = complementary_update(AttitudeEstimate(),
        ImuSample(Vector3(0.0, 0.0, 0.0), LEVEL, 0.004), FilterParams())

    assert (estimate.roll, estimate.pitch, estimate.yaw) == (0.0, 0.0, 0.0)
    assert estimate.time == 0.004

def test_alpha_one_is_gyro_integration():
    params = FilterParams(alpha = 1.0, dt = 0.01)
    # The accelerometer says 45 degrees of pitch, it must be ignored
    imu = ImuSample(Vector3(0.1, -0.2, 0.3), Vector3(G / math.sqrt(2), 0.0, -G / math.sqrt(2)), 0.0)
    estimate = complementary_update(AttitudeEstimate(0.5, 0.1, 0.0, 1.5), imu, params)

    assert estimate.roll == pytest.approx(0.501)
    assert estimate.pitch == pytest.approx(0.098)
    assert estimate.yaw == pytest.approx(0.003)
    assert estimate.altitude == 1.5

def _run_bias(params, seconds = 60.0, bias = 0.01):
    estimate = AttitudeEstimate()
    imu = ImuSample(Vector3(bias, 0.0, 0.0), LEVEL, 0.0)
    for _ in range(int(round(seconds / params.dt))):
        estimate = complementary_update(estimate, imu, params)
    return estimate

def test_gyro_drift_is_bounded():
    filtered = _run_bias(FilterParams(alpha = 0.98, dt = 0.01))
    gyro_only = _run_bias(FilterParams(alpha = 1.0, dt = 0.01))

    # Fixed point alpha * b * dt / (1 - alpha)
    assert filtered.roll == pytest.approx(0.98 * 0.01 * 0.01 / 0.02, rel = 1e-3)
    assert abs(filtered.roll) <= 5.0e-3
    assert gyro_only.roll == pytest.approx(0.6, rel = 0.02)

def _rms_roll_pitch(params, accel_model, seed = 21, samples = 3000):
    gyro = GyroModel.noise_free()
    channel = ImuChannel.start(seed, gyro, 1.0 / params.dt)
    state = QuadState.at_rest(0.0, 0.0, 1.0)
    estimate = AttitudeEstimate()
    total = 0.0
    for _ in range(samples):
        imu, channel = sample_imu(state, 0.0, gyro, accel_model, channel)
        estimate = complementary_update(estimate, imu, params)
        total += estimate.roll ** 2 + estimate.pitch ** 2
    return math.sqrt(total / samples)

def test_disturbance_gate():
    spikes = AccelModel(0.0, 0.0, 0.0, 0.01, 5.0 * G)
    gated = FilterParams()
    ungated = FilterParams(accel_mag_min = 0.0, accel_mag_max = math.inf)

    # The clean run stays at exactly zero, so its RMS difference is the RMS itself
    assert _rms_roll_pitch(gated, AccelModel.noise_free()) == 0.0
    gated_rms = _rms_roll_pitch(gated, spikes)
    ungated_rms = _rms_roll_pitch(ungated, spikes)

    assert gated_rms < 1e-3
    assert ungated_rms > gated_rms

def test_alpha_zero_is_accelerometer_tilt():
    params = FilterParams(alpha = 0.0, dt = 0.01)
    accel = Vector3(2.0, -1.5, -9.5)
    imu = ImuSample(Vector3(0.3, -0.2, 0.1), accel, 0.0)
    estimate = complementary_update(AttitudeEstimate(0.4, -0.3, 0.0), imu, params)

    assert (estimate.roll, estimate.pitch) == accel_to_angles(accel)

@pytest.mark.parametrize("accel", [
    Vector3(0.0, 0.0, -2.0 * G),
    Vector3(3.0, 0.0, -0.2 * G),
    Vector3(0.0, 0.0, 0.0),
])
def test_rejected_sample_is_gyro_prediction(accel):
    params = FilterParams(dt = 0.01)
    prev = AttitudeEstimate(0.2, -0.1, 1.0, 2.0)
    imu = ImuSample(Vector3(0.5, 0.4, -0.3), accel, 1.0)
    estimate = complementary_update(prev, imu, params)

    assert not params.accepts(accel)
    assert (estimate.roll, estimate.pitch, estimate.yaw) == gyro_prediction(prev, imu, params.dt)
    assert estimate.altitude == 2.0

def test_gate_window():
    params = FilterParams()
    assert params.accepts(LEVEL)
    assert not params.accepts(Vector3(0.0, 0.0, -2.0 * G))
    assert not params.accepts(Vector3(0.0, 0.0, -0.2 * G))

def test_yaw_is_wrapped():
    params = FilterParams(dt = 0.1)
    estimate = complementary_update(AttitudeEstimate(yaw = 3.1),
        ImuSample(Vector3(0.0, 0.0, 1.0), LEVEL, 0.0), params)

    assert estimate.yaw == pytest.approx(3.2 - 2.0 * math.pi)

def test_invalid_filter_params():
    with pytest.raises(InvalidArgumentError):
        FilterParams(alpha = 1.2)
    with pytest.raises(InvalidArgumentError):
        FilterParams(accel_mag_min = 10.0, accel_mag_max = 5.0)

def test_altitude_from_echo():
    model = UltrasonicModel.noise_free()
    params = FilterParams(altitude_lpf_coeff = 1.0)

    assert altitude_update(0.0, EchoSample(5.831e-3, 0.0), model, params) == \
        pytest.approx(1.0, abs = 1e-4)

def test_altitude_dropout_holds():
    assert altitude_update(2.0, EchoSample(None, 0.0), UltrasonicModel(), FilterParams()) == 2.0

def test_altitude_low_pass():
    model = UltrasonicModel.noise_free()
    echo = EchoSample(2.0 / model.sound_speed, 0.0)

    assert altitude_update(0.0, echo, model, FilterParams(altitude_lpf_coeff = 0.5)) == \
        pytest.approx(0.5)

def test_altitude_negative_previous():
    with pytest.raises(InvalidArgumentError):
        altitude_update(-1.0, EchoSample(0.001, 0.0), UltrasonicModel(), FilterParams())
