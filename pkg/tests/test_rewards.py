"""Reward values, constants, grids, and clipping behavior."""

import numpy as np
import pytest

from pulsekit.bloch import EvalGrid, MagnetizationProfile, simulate_profile
from pulsekit.pulse import RFPulse, pulse_energy, zero_pulse
from pulsekit.rewards import (
    MSE_KINDS,
    RewardKind,
    build_reference_profile,
    default_spec,
    evaluate_reward,
    mirrored_stopband,
    reward_terms,
    stepped_range,
    symmetric_band,
    two_step_band,
)


def _dummy_reference(kind):
    grid = default_spec(kind).mse_grid
    ones = np.ones(grid.shape)
    return MagnetizationProfile(0.0 * ones, 0.0 * ones, ones)


def _spec_for(kind):
    spec = default_spec(kind)
    if kind in MSE_KINDS:
        spec = spec.with_reference(_dummy_reference(kind))
    return spec


def test_stepped_range_counts():
    # floor(range / step) + 1 samples, final point clamped to the endpoint.
    g = stepped_range(-1285.0, 1285.0, 2.6)
    assert g.size == int(np.floor(2570.0 / 2.6 + 1e-9)) + 1
    assert g[0] == -1285.0 and g[-1] == 1285.0
    assert np.allclose(np.diff(g)[:-1], 2.6)


def test_default_grid_sample_counts():
    def n(lo_hi, step):
        return int(np.floor(lo_hi / step + 1e-9)) + 1

    assert default_spec(RewardKind.SLICE_EXC_SPEC).band_grid.offsets.size == n(2570, 2.6)
    assert default_spec(RewardKind.SLICE_EXC_SPEC).stop_grid.offsets.size == 2 * n(
        32000 - 1614, 20.3
    )
    assert default_spec(RewardKind.SLICE_INV_SPEC).band_grid.offsets.size == n(836, 0.8)
    assert default_spec(RewardKind.SLICE_INV_SPEC).stop_grid.offsets.size == 2 * n(
        8000 - 588, 4.9
    )
    vol = default_spec(RewardKind.VOL_INV_SPEC).band_grid
    assert vol.b1_scales.size == n(1.5, 0.03)
    assert vol.offsets.size == n(400, 8)
    sel = default_spec(RewardKind.SEL_INV_SPEC)
    assert sel.band_grid.offsets.size == n(400, 4)
    assert sel.stop_grid.offsets.size == 2 * n(8000 - 568, 74.3)


def test_default_constants():
    assert default_spec(RewardKind.SLICE_EXC_SPEC).constants == {
        "c1": 0.92724,
        "c2": 0.0146,
        "c3": 1e-5,
    }
    assert default_spec(RewardKind.SLICE_INV_SPEC).constants == {
        "c1": -0.80838,
        "c2": 0.0028,
        "c3": 1e-5,
    }
    assert default_spec(RewardKind.VOL_INV_SPEC).constants == {"c1": -0.9, "c2": 0.004}
    assert default_spec(RewardKind.SEL_INV_SPEC).constants["c1"] == -0.906


def test_zero_pulse_volume_inversion_reward():
    # Unperturbed mz = 1: first term -max(1, -0.9) = -1, no energy term.
    spec = default_spec(RewardKind.VOL_INV_SPEC)
    assert evaluate_reward(zero_pulse(64, 1e-5), spec) == -1.0


def test_mse_self_reference_leaves_only_energy_term():
    rng = np.random.default_rng(0)
    pulse = RFPulse(rng.uniform(0, 0.05, 64), rng.uniform(-np.pi, np.pi, 64), 8e-5)
    spec = default_spec(RewardKind.SLICE_INV_MSE)
    spec = spec.with_reference(simulate_profile(pulse, spec.mse_grid))
    expected = -spec.constants["c2"] * spec.eng_unit_scale * pulse_energy(pulse)
    assert evaluate_reward(pulse, spec) == pytest.approx(expected, abs=1e-15)


def test_mse_reference_is_profile_term_maximum():
    rng = np.random.default_rng(1)
    pulse = RFPulse(rng.uniform(0, 0.05, 64), rng.uniform(-np.pi, np.pi, 64), 8e-5)
    spec = default_spec(RewardKind.VOL_INV_MSE, eng_unit_scale=1e-30)
    spec = spec.with_reference(simulate_profile(pulse, spec.mse_grid))
    r_self = evaluate_reward(pulse, spec)
    for _ in range(5):
        other = RFPulse(rng.uniform(0, 0.05, 64), rng.uniform(-np.pi, np.pi, 64), 8e-5)
        assert evaluate_reward(other, spec) <= r_self


def test_energy_penalty_monotonicity():
    # With the profile frozen, growing any amplitude strictly lowers the reward.
    rng = np.random.default_rng(2)
    pulse = RFPulse(rng.uniform(0.01, 0.05, 32), rng.uniform(-np.pi, np.pi, 32), 1e-5)
    spec = _spec_for(RewardKind.VOL_INV_SPEC)
    profiles = [simulate_profile(pulse, g) for g in spec.grids]
    base, _ = reward_terms(pulse, spec, profiles)
    for j in (0, 17, 31):
        amp = pulse.amplitude.copy()
        amp[j] += 0.01
        bigger = RFPulse(amp, pulse.phase, pulse.dt)
        grown, _ = reward_terms(bigger, spec, profiles)
        assert grown < base


def test_clip_caps_first_term():
    # A synthetic profile whose coherent mean tops c1 scores exactly c1
    # on the first term; improving it further cannot raise the reward.
    # Zero pulse carries no energy, so only the profile terms contribute.
    spec = default_spec(RewardKind.SLICE_EXC_SPEC)
    band, stop = spec.grids
    ones_b = np.ones(band.shape)
    ones_s = np.ones(stop.shape)
    pulse = zero_pulse(256, 1e-5)  # duration 2.56 ms; rewind angles cancel below

    def coherent(mag):
        th = np.pi * band.offsets[None, :] * pulse.duration
        # Build a profile that is exactly `mag` transverse after rewinding.
        mx = mag * np.cos(-th)
        my = mag * np.sin(-th)
        mz = np.sqrt(1.0 - mag**2) * ones_b
        return MagnetizationProfile(mx, my, mz)

    quiet = MagnetizationProfile(0.0 * ones_s, 0.0 * ones_s, ones_s)
    r_095, _ = reward_terms(pulse, spec, [coherent(0.95), quiet])
    r_099, _ = reward_terms(pulse, spec, [coherent(0.99), quiet])
    assert r_095 == pytest.approx(spec.constants["c1"], abs=1e-12)
    assert r_099 == pytest.approx(r_095, abs=1e-12)


def test_stopband_penalty_one_sided():
    spec = default_spec(RewardKind.SLICE_INV_SPEC)
    band, stop = spec.grids
    inverted = MagnetizationProfile(
        np.zeros(band.shape), np.zeros(band.shape), np.full(band.shape, -1.0)
    )

    def stop_profile(dev):
        mz = np.full(stop.shape, 1.0 - dev)
        mx = np.sqrt(np.maximum(1.0 - mz**2, 0.0))
        return MagnetizationProfile(mx, np.zeros(stop.shape), mz)

    pulse = zero_pulse(32, 1e-5)
    r_small, _ = reward_terms(pulse, spec, [inverted, stop_profile(0.001)])
    r_big, _ = reward_terms(pulse, spec, [inverted, stop_profile(0.01)])
    assert r_small == pytest.approx(-spec.constants["c1"], abs=1e-12)
    assert r_big == pytest.approx(
        -spec.constants["c1"] - (0.01 - spec.constants["c2"]), abs=1e-12
    )


def test_rewards_finite_for_random_pulses():
    rng = np.random.default_rng(3)
    pulse = RFPulse(rng.uniform(0, 0.2, 64), rng.uniform(-np.pi, np.pi, 64), 8e-5)
    for kind in RewardKind:
        assert np.isfinite(evaluate_reward(pulse, _spec_for(kind)))


def test_missing_reference_raises():
    with pytest.raises(ValueError):
        evaluate_reward(zero_pulse(8, 1e-5), default_spec(RewardKind.SLICE_INV_MSE))


def test_build_reference_profile_cache(tmp_path):
    pulse = RFPulse(np.full(32, 0.01), np.zeros(32), 1e-5)
    first = build_reference_profile(RewardKind.VOL_INV_MSE, pulse, cache_dir=tmp_path)
    second = build_reference_profile(RewardKind.VOL_INV_MSE, pulse, cache_dir=tmp_path)
    assert np.array_equal(first.mz, second.mz)
    assert list(tmp_path.iterdir())  # cache file written


def test_band_builders():
    band = symmetric_band(10.0, 4.0)
    assert band.tolist() == [-10.0, -6.0, -2.0, 2.0, 6.0, 10.0]
    stop = mirrored_stopband(5.0, 9.0, 2.0)
    assert stop.tolist() == [-9.0, -7.0, -5.0, 5.0, 7.0, 9.0]
    two = two_step_band(4.0, 10.0, 2.0, 3.0)
    assert two.tolist() == [-10.0, -7.0, -4.0, -2.0, 0.0, 2.0, 4.0, 7.0, 10.0]
