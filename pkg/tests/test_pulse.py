"""RFPulse container, energy, and CSV round trips."""

import numpy as np
import pytest

from pulsekit.pulse import RFPulse, pulse_energy, read_pulse_csv, write_pulse_csv, zero_pulse


def test_validation():
    with pytest.raises(ValueError):
        RFPulse(np.array([-0.1]), np.array([0.0]), 1e-5)
    with pytest.raises(ValueError):
        RFPulse(np.array([0.1]), np.array([0.0]), 0.0)
    with pytest.raises(ValueError):
        RFPulse(np.array([0.1, 0.2]), np.array([0.0]), 1e-5)
    with pytest.raises(ValueError):
        RFPulse(np.array([np.nan]), np.array([0.0]), 1e-5)


def test_energy_closed_form():
    # Constant amplitude: integral is a^2 * T exactly.
    pulse = RFPulse(np.full(128, 0.05), np.zeros(128), 1e-5)
    assert pulse_energy(pulse) == pytest.approx(0.05**2 * 128e-5, rel=1e-15)
    assert pulse_energy(zero_pulse(16, 1e-5)) == 0.0


def test_duration_and_b1():
    pulse = RFPulse(np.array([0.1]), np.array([np.pi / 2]), 2e-5)
    assert pulse.duration == 2e-5
    assert pulse.b1[0] == pytest.approx(0.1j, abs=1e-17)


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    pulse = RFPulse(rng.uniform(0, 0.2, 64), rng.uniform(-np.pi, np.pi, 64), 3.125e-5)
    path = tmp_path / "pulse.csv"
    write_pulse_csv(path, pulse)
    back = read_pulse_csv(path)
    assert np.array_equal(back.amplitude, pulse.amplitude)
    assert np.array_equal(back.phase, pulse.phase)
    assert back.dt == pulse.dt


def test_csv_missing_dt_raises(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("index,amplitude_gauss,phase_rad\n0,0.1,0.0\n")
    with pytest.raises(ValueError):
        read_pulse_csv(path)
