"""Property-based invariants over randomly generated inputs."""

import numpy as np
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from pulsekit.bloch import EvalGrid, simulate_profile
from pulsekit.policy import MAX_ACTION_AMPLITUDE, TrainConfig, assemble_pulse
from pulsekit.pulse import RFPulse, pulse_energy
from pulsekit.rewards import RewardKind, default_spec, stepped_range
from pulsekit.slr import forward_slr, inverse_slr

finite = {"allow_nan": False, "allow_infinity": False}


def _pulses(max_n=32):
    return st.integers(4, max_n).flatmap(
        lambda n: st.tuples(
            arrays(np.float64, n, elements=st.floats(0.0, 0.2, **finite)),
            arrays(np.float64, n, elements=st.floats(-np.pi, np.pi, **finite)),
            st.floats(1e-6, 1e-4, **finite),
        )
    )


@settings(max_examples=25, deadline=None)
@given(_pulses())
def test_magnetization_stays_on_unit_sphere(args):
    amp, phase, dt = args
    pulse = RFPulse(amp, phase, dt)
    grid = EvalGrid(np.array([0.7, 1.3]), np.array([-900.0, 0.0, 1200.0]))
    prof = simulate_profile(pulse, grid)
    norm = prof.mx**2 + prof.my**2 + prof.mz**2
    assert np.abs(norm - 1.0).max() <= 1e-9


@settings(max_examples=25, deadline=None)
@given(_pulses())
def test_slr_round_trip_recovers_pulse(args):
    amp, phase, dt = args
    pulse = RFPulse(amp, phase, dt)
    a, b = forward_slr(pulse)
    back = inverse_slr(a, b, dt)
    assert np.abs(back.amplitude - pulse.amplitude).max() < 1e-8
    mask = pulse.amplitude > 1e-6
    dphi = np.angle(np.exp(1j * (back.phase - pulse.phase)))
    assert not mask.any() or np.abs(dphi[mask]).max() < 1e-8


@settings(max_examples=50, deadline=None)
@given(_pulses())
def test_energy_is_nonnegative_and_scales_quadratically(args):
    amp, phase, dt = args
    pulse = RFPulse(amp, phase, dt)
    doubled = RFPulse(2.0 * amp, phase, dt)
    assert pulse_energy(pulse) >= 0.0
    assert np.isclose(pulse_energy(doubled), 4.0 * pulse_energy(pulse), rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(
    st.floats(1.0, 5000.0, **finite),
    st.floats(0.1, 100.0, **finite),
)
def test_stepped_range_covers_interval(limit, step):
    assume(step <= limit)
    grid = stepped_range(-limit, limit, step)
    assert grid.size == int(np.floor(2.0 * limit / step + 1e-9)) + 1
    assert grid[0] == -limit and grid[-1] == limit
    assert np.all(np.diff(grid) > 0)


@settings(max_examples=25, deadline=None)
@given(
    st.integers(2, 16).flatmap(
        lambda t: st.tuples(
            arrays(np.float64, (t, 2), elements=st.floats(-4.0, 4.0, **finite)),
            st.just(t),
        )
    )
)
def test_assembled_pulses_are_clamped_palindromes(args):
    actions, t_steps = args
    cfg = TrainConfig(
        spec=default_spec(RewardKind.VOL_INV_SPEC),
        t_steps=t_steps,
        length=8 * t_steps,
        duration=1e-3,
        buffer=1,
        updates_per_run=1,
        runs=1,
        top_k=1,
    )
    pulse = assemble_pulse(actions, cfg)
    assert pulse.amplitude.min() >= 0.0
    assert pulse.amplitude.max() <= MAX_ACTION_AMPLITUDE
    assert np.abs(pulse.amplitude - pulse.amplitude[::-1]).max() < 1e-12
    assert np.abs(pulse.phase - pulse.phase[::-1]).max() < 1e-12
