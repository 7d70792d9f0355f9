"""Reverse-mode differentiation of rewards through the Bloch simulator.

The forward pass stores every intermediate magnetization and per-step
rotation vector; the backward pass pulls the reward's sensitivity to the
final magnetization through the transposed rotation chain.  The per-step
contribution uses the closed-form derivative of the rotation exponential
map (right-Jacobian form), so the result is exact up to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import apply_rotation, run_forward
from .pulse import GAMMA_HZ_PER_G, RFPulse
from .rewards import RewardSpec, reward_terms


@dataclass(frozen=True)
class PulseGradient:
    """Derivatives of a scalar reward with respect to each pulse sample."""

    d_amplitude: np.ndarray  # reward units per Gauss
    d_phase: np.ndarray  # reward units per radian

    def __post_init__(self):
        if self.d_amplitude.shape != self.d_phase.shape:
            raise ValueError("gradient components must have equal length")
        if not (np.isfinite(self.d_amplitude).all() and np.isfinite(self.d_phase).all()):
            raise ValueError("gradient entries must be finite")


def _right_jacobian_t_apply(omega: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Apply the transposed right Jacobian of the SO(3) exponential to u.

    Jr(w)^T u = u + c1 (w x u) + c2 (w x (w x u)) with
    c1 = (1 - cos t) / t^2 and c2 = (t - sin t) / t^3, t = |w|.
    """
    theta2 = np.sum(omega**2, axis=-1, keepdims=True)
    theta = np.sqrt(theta2)
    small = theta < 1e-6
    with np.errstate(invalid="ignore", divide="ignore"):
        c1 = np.where(small, 0.5 - theta2 / 24.0, (1.0 - np.cos(theta)) / theta2)
        c2 = np.where(
            small, 1.0 / 6.0 - theta2 / 120.0, (theta - np.sin(theta)) / (theta2 * theta)
        )
    wxu = np.cross(omega, u)
    return u + c1 * wxu + c2 * np.cross(omega, wxu)


def _adjoint_pass(pulse: RFPulse, scales, offsets, d_final: np.ndarray):
    """Backpropagate d(reward)/d(final M) to per-sample (amplitude, phase).

    Args:
        d_final: (n_conditions, 3) sensitivity at the final magnetization.

    Returns:
        (d_amp, d_phase) arrays of the pulse's length.
    """
    states, omega = run_forward(pulse, scales, offsets)
    n_steps = len(pulse)
    d_amp = np.zeros(n_steps)
    d_phase = np.zeros(n_steps)
    lam = np.asarray(d_final, dtype=float)
    s = np.asarray(scales, dtype=float).ravel()
    coef = -2.0 * np.pi * pulse.dt * GAMMA_HZ_PER_G * s  # d(omega_xy)/d(field_xy)
    for j in range(n_steps - 1, -1, -1):
        lam = apply_rotation(-omega[j], lam)  # R^T lam
        g_omega = _right_jacobian_t_apply(omega[j], np.cross(states[j], lam))
        cos_p = np.cos(pulse.phase[j])
        sin_p = np.sin(pulse.phase[j])
        gx, gy = g_omega[:, 0], g_omega[:, 1]
        d_amp[j] = np.sum(coef * (gx * cos_p + gy * sin_p))
        d_phase[j] = np.sum(
            coef * pulse.amplitude[j] * (-gx * sin_p + gy * cos_p)
        )
    return d_amp, d_phase


def reward_gradient(pulse: RFPulse, spec: RewardSpec) -> tuple[float, PulseGradient]:
    """Reward value and its exact gradient with respect to every sample."""
    reward, seeds = reward_terms(pulse, spec)
    d_amp = np.zeros(len(pulse))
    d_phase = np.zeros(len(pulse))
    for grid, d_m in seeds:
        if not np.any(d_m):
            continue
        scales = np.repeat(grid.b1_scales, grid.offsets.size)
        offs = np.tile(grid.offsets, grid.b1_scales.size)
        da, dp = _adjoint_pass(pulse, scales, offs, d_m.reshape(-1, 3))
        d_amp += da
        d_phase += dp
    # Energy penalty differentiates directly: d(eng)/d(amp_j) = 2 amp_j dt.
    d_amp -= (
        spec.eng_constant * spec.eng_unit_scale * 2.0 * pulse.amplitude * pulse.dt
    )
    return reward, PulseGradient(d_amplitude=d_amp, d_phase=d_phase)


def finite_diff_gradient(
    pulse: RFPulse, spec: RewardSpec, epsilon: float = 1e-6
) -> PulseGradient:
    """Central-difference gradient estimate (test oracle, O(n) evaluations)."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    from .rewards import evaluate_reward

    n = len(pulse)
    d_amp = np.zeros(n)
    d_phase = np.zeros(n)
    for j in range(n):
        for arr, out in ((pulse.amplitude, d_amp), (pulse.phase, d_phase)):
            hi = arr.copy()
            lo = arr.copy()
            hi[j] += epsilon
            lo[j] -= epsilon
            # Amplitudes may go negative during probing; bypass validation
            # by reflecting into phase is wrong here, so clip at 0 and use
            # a one-sided step if the sample sits on the boundary.
            if arr is pulse.amplitude and lo[j] < 0:
                lo[j] = arr[j]
                denom = epsilon
            else:
                denom = 2.0 * epsilon
            p_hi = RFPulse(hi if arr is pulse.amplitude else pulse.amplitude,
                           hi if arr is pulse.phase else pulse.phase, pulse.dt)
            p_lo = RFPulse(lo if arr is pulse.amplitude else pulse.amplitude,
                           lo if arr is pulse.phase else pulse.phase, pulse.dt)
            out[j] = (evaluate_reward(p_hi, spec) - evaluate_reward(p_lo, spec)) / denom
    return PulseGradient(d_amplitude=d_amp, d_phase=d_phase)
