"""Hard-pulse polynomial recursion, min-phase construction, pulse designs."""

import numpy as np
import pytest

from pulsekit.bloch import EvalGrid, simulate_profile
from pulsekit.pulse import RFPulse
from pulsekit.slr import (
    InfeasibleDesignError,
    SLRSpec,
    design_slr,
    forward_slr,
    inverse_slr,
    minimum_phase_a,
)


def test_forward_inverse_round_trip():
    rng = np.random.default_rng(2)
    pulse = RFPulse(rng.uniform(0, 0.08, 64), rng.uniform(-np.pi, np.pi, 64), 2e-5)
    a, b = forward_slr(pulse)
    back = inverse_slr(a, b, pulse.dt)
    assert np.abs(back.amplitude - pulse.amplitude).max() < 1e-6
    # Phases where amplitude ~ 0 are unconstrained; compare wrapped elsewhere.
    mask = pulse.amplitude > 1e-6
    dphi = np.angle(np.exp(1j * (back.phase - pulse.phase)))
    assert np.abs(dphi[mask]).max() < 1e-6


def test_polynomials_are_unitary_on_unit_circle():
    # |A(z)|^2 + |B(z)|^2 = 1 for every z on the unit circle.
    rng = np.random.default_rng(6)
    pulse = RFPulse(rng.uniform(0, 0.1, 48), rng.uniform(-np.pi, np.pi, 48), 1e-5)
    a, b = forward_slr(pulse)
    z = np.exp(2j * np.pi * np.linspace(0, 1, 257, endpoint=False))
    fa = np.polyval(a[::-1], 1.0 / z) * z**0  # coefficients in z^-1
    fb = np.polyval(b[::-1], 1.0 / z)
    assert np.abs(np.abs(fa) ** 2 + np.abs(fb) ** 2 - 1.0).max() < 1e-10


def test_forward_matches_direct_spin_rotation():
    # For a single-step pulse the polynomials reduce to the Cayley-Klein
    # parameters of one rotation: a0 = cos(phi/2), b0 = -i e^{i theta} sin(phi/2).
    from pulsekit.pulse import GAMMA_HZ_PER_G

    amp, theta, dt = 0.07, 0.9, 3e-5
    phi = 2.0 * np.pi * GAMMA_HZ_PER_G * amp * dt
    a, b = forward_slr(RFPulse(np.array([amp]), np.array([theta]), dt))
    assert a[0] == pytest.approx(np.cos(phi / 2.0), abs=1e-14)
    assert b[0] == pytest.approx(-1j * np.exp(1j * theta) * np.sin(phi / 2.0), abs=1e-14)


def test_minimum_phase_magnitude_and_energy():
    # |A| on the unit circle equals sqrt(1 - |B|^2), and the min-phase
    # choice concentrates energy at the leading coefficients.
    rng = np.random.default_rng(1)
    b = rng.standard_normal(32)
    b *= 0.9 / np.abs(np.fft.fft(b, 4096)).max()  # keep |B| < 1 everywhere
    a = minimum_phase_a(b)
    fb = np.fft.fft(b, 4096)
    fa = np.fft.fft(a, 4096)
    assert np.abs(np.abs(fa) - np.sqrt(1.0 - np.abs(fb) ** 2)).max() < 1e-6
    energy = np.abs(a) ** 2
    partial = np.cumsum(energy) / energy.sum()
    assert partial[len(a) // 4] > 0.9


def test_excitation_design_slice_profile():
    spec = SLRSpec(90.0, 2.56e-3, 256, 2000.0)
    pulse = design_slr(spec)
    assert len(pulse) == 256
    assert pulse.dt == pytest.approx(1e-5, rel=1e-12)
    grid = EvalGrid(np.array([1.0]), np.linspace(-4000, 4000, 161))
    prof = simulate_profile(pulse, grid)
    trans = prof.transverse[0]
    center = trans[np.abs(grid.offsets) < 500]
    edge = trans[np.abs(grid.offsets) > 2500]
    assert center.min() > 0.95
    assert edge.max() < 0.05


def test_inversion_design_slice_profile():
    spec = SLRSpec(180.0, 5.12e-3, 256, 500.0, filter="equi-ripple")
    pulse = design_slr(spec)
    grid = EvalGrid(np.array([1.0]), np.linspace(-2000, 2000, 161))
    mz = simulate_profile(pulse, grid).mz[0]
    assert mz[np.abs(grid.offsets) < 150].max() < -0.95
    assert mz[np.abs(grid.offsets) > 900].min() > 0.97


def test_small_flip_design_matches_fourier_limit():
    # At small tip angles the slice profile approaches the b-filter response.
    spec = SLRSpec(5.0, 2.56e-3, 128, 1500.0)
    pulse = design_slr(spec)
    grid = EvalGrid(np.array([1.0]), np.linspace(-3000, 3000, 121))
    trans = simulate_profile(pulse, grid).transverse[0]
    flip = np.deg2rad(5.0)
    assert trans[np.abs(grid.offsets) < 300].mean() == pytest.approx(
        np.sin(flip), rel=0.05
    )


def test_infeasible_band_raises():
    # Passband time-bandwidth alone exceeds the step budget.
    with pytest.raises(InfeasibleDesignError):
        design_slr(SLRSpec(90.0, 16e-3, 32, 2000.0, 1e-4, 1e-4))


def test_spec_validation():
    with pytest.raises(ValueError):
        SLRSpec(0.0, 1e-3, 64, 1000.0)
    with pytest.raises(ValueError):
        SLRSpec(90.0, 1e-3, 4, 1000.0)
    with pytest.raises(ValueError):
        SLRSpec(90.0, 1e-3, 64, 1000.0, filter="butterworth")


def test_inversion_polish_requires_even_steps():
    with pytest.raises(InfeasibleDesignError):
        design_slr(SLRSpec(180.0, 5.12e-3, 255, 500.0))
