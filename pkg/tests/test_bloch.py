"""Simulator oracles: closed-form rotations, independent ODE integration."""

import numpy as np
import pytest

from pulsekit.bloch import (
    EvalGrid,
    MagnetizationProfile,
    apply_rotation,
    rotation_vectors,
    simulate_profile,
    simulate_trajectory,
)
from pulsekit.pulse import GAMMA_HZ_PER_G, RFPulse, zero_pulse


def test_single_step_matches_closed_form_rotation():
    # 1,000 random single-step pulses vs an independently written
    # axis-angle rotation (quaternion form via scipy).
    from scipy.spatial.transform import Rotation

    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(1000):
        amp = rng.uniform(0.0, 0.3)
        phase = rng.uniform(-np.pi, np.pi)
        offset = rng.uniform(-5000.0, 5000.0)
        dt = rng.uniform(1e-6, 1e-4)
        pulse = RFPulse(np.array([amp]), np.array([phase]), dt)
        grid = EvalGrid(np.array([1.0]), np.array([offset]))
        prof = simulate_profile(pulse, grid)
        b = GAMMA_HZ_PER_G * amp
        rotvec = -2.0 * np.pi * dt * np.array([b * np.cos(phase), b * np.sin(phase), offset])
        expected = Rotation.from_rotvec(rotvec).apply([0.0, 0.0, 1.0])
        got = np.array([prof.mx[0, 0], prof.my[0, 0], prof.mz[0, 0]])
        worst = max(worst, np.abs(got - expected).max())
    assert worst <= 1e-9


def test_phase_zero_pulse_tips_z_towards_y():
    # On resonance, a 90-degree pulse at phase 0 lands on +y exactly.
    dt = 1e-5
    n = 100
    amp = 0.25 / (GAMMA_HZ_PER_G * n * dt)  # quarter cycle total
    pulse = RFPulse(np.full(n, amp), np.zeros(n), dt)
    prof = simulate_profile(pulse, EvalGrid(np.array([1.0]), np.array([0.0])))
    assert prof.my[0, 0] == pytest.approx(1.0, abs=1e-12)
    assert abs(prof.mx[0, 0]) < 1e-12
    assert abs(prof.mz[0, 0]) < 1e-12


def test_matches_independent_rk4_integration():
    # Random smooth pulse vs dense Runge-Kutta integration of the Bloch
    # equation dM/dt = M x (-2 pi B_eff); the hard-pulse product converges
    # to the ODE solution because the waveform is piecewise constant.
    rng = np.random.default_rng(3)
    n, dt = 64, 2e-5
    pulse = RFPulse(rng.uniform(0.0, 0.05, n), rng.uniform(-np.pi, np.pi, n), dt)
    offset = 700.0
    m = np.array([0.0, 0.0, 1.0])
    substeps = 200
    h = dt / substeps
    for j in range(n):
        b = 2.0 * np.pi * np.array(
            [
                GAMMA_HZ_PER_G * pulse.amplitude[j] * np.cos(pulse.phase[j]),
                GAMMA_HZ_PER_G * pulse.amplitude[j] * np.sin(pulse.phase[j]),
                offset,
            ]
        )
        f = lambda y: np.cross(y, b)
        for _ in range(substeps):
            k1 = f(m)
            k2 = f(m + 0.5 * h * k1)
            k3 = f(m + 0.5 * h * k2)
            k4 = f(m + h * k3)
            m = m + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    prof = simulate_profile(pulse, EvalGrid(np.array([1.0]), np.array([offset])))
    got = np.array([prof.mx[0, 0], prof.my[0, 0], prof.mz[0, 0]])
    assert np.abs(got - m).max() < 1e-8


def test_unit_norm_preserved_on_dense_grid():
    rng = np.random.default_rng(11)
    pulse = RFPulse(rng.uniform(0, 0.1, 128), rng.uniform(-np.pi, np.pi, 128), 2e-5)
    grid = EvalGrid(np.linspace(0.5, 2.0, 16), np.linspace(-8000, 8000, 101))
    prof = simulate_profile(pulse, grid)
    norm = prof.mx**2 + prof.my**2 + prof.mz**2
    assert np.abs(norm - 1.0).max() <= 1e-9


def test_zero_pulse_is_identity():
    prof = simulate_profile(zero_pulse(32, 1e-5), EvalGrid(np.array([1.0]), np.array([0.0])))
    assert prof.mz[0, 0] == 1.0 and prof.mx[0, 0] == 0.0 and prof.my[0, 0] == 0.0


def test_offresonance_zero_amplitude_precesses_about_z():
    # Transverse initial state precesses by exactly -2 pi f T about z.
    f, n, dt = 450.0, 40, 1e-5
    prof = simulate_profile(
        zero_pulse(n, dt), EvalGrid(np.array([1.0]), np.array([f])), initial=(1.0, 0.0, 0.0)
    )
    angle = -2.0 * np.pi * f * n * dt
    assert prof.mx[0, 0] == pytest.approx(np.cos(angle), abs=1e-12)
    assert prof.my[0, 0] == pytest.approx(np.sin(angle), abs=1e-12)


def test_b1_scale_equals_scaled_amplitude():
    rng = np.random.default_rng(5)
    pulse = RFPulse(rng.uniform(0, 0.05, 64), rng.uniform(-np.pi, np.pi, 64), 1e-5)
    scaled = RFPulse(1.7 * pulse.amplitude, pulse.phase, pulse.dt)
    g_scaled = EvalGrid(np.array([1.7]), np.array([300.0]))
    g_unit = EvalGrid(np.array([1.0]), np.array([300.0]))
    a = simulate_profile(pulse, g_scaled)
    b = simulate_profile(scaled, g_unit)
    assert np.abs(a.mz - b.mz).max() < 1e-12


def test_trajectory_endpoints_match_profile():
    rng = np.random.default_rng(9)
    pulse = RFPulse(rng.uniform(0, 0.05, 50), rng.uniform(-np.pi, np.pi, 50), 1e-5)
    traj = simulate_trajectory(pulse, 1.0, 250.0)
    prof = simulate_profile(pulse, EvalGrid(np.array([1.0]), np.array([250.0])))
    assert traj.mz[0] == 1.0
    assert traj.mz[-1] == pytest.approx(prof.mz[0, 0], abs=1e-14)
    assert traj.times.size == len(pulse) + 1


def test_grid_validation():
    with pytest.raises(ValueError):
        EvalGrid(np.array([1.0]), np.array([3.0, 2.0]))  # not increasing
    with pytest.raises(ValueError):
        EvalGrid(np.array([-1.0]), np.array([0.0]))  # non-positive scale
    with pytest.raises(ValueError):
        MagnetizationProfile(np.array([[2.0]]), np.array([[0.0]]), np.array([[0.0]]))


def test_rotation_vectors_shape_and_sign():
    pulse = RFPulse(np.array([0.01, 0.02]), np.array([0.0, np.pi / 2]), 1e-5)
    omega = rotation_vectors(pulse, [1.0], [100.0])
    assert omega.shape == (2, 1, 3)
    # Phase 0 puts the field on +x; the rotation vector points along -x.
    assert omega[0, 0, 0] < 0 and abs(omega[0, 0, 1]) < 1e-15


def test_apply_rotation_zero_vector_is_identity():
    m = np.array([[0.3, -0.4, 0.5]])
    assert np.array_equal(apply_rotation(np.zeros((1, 3)), m), m)
