"""Hard-pulse Bloch simulation.

Each time step of the waveform is treated as piecewise-constant, so the
magnetization evolves by an exact 3-D rotation about the effective field.
No relaxation is modelled; every rotation is norm-preserving.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pulse import GAMMA_HZ_PER_G, RFPulse


@dataclass(frozen=True)
class EvalGrid:
    """Set of (B1 scale, frequency offset) conditions to simulate over.

    Attributes:
        b1_scales: dimensionless multipliers of the pulse amplitude, > 0.
        offsets: off-resonance frequencies in Hz.
    """

    b1_scales: np.ndarray
    offsets: np.ndarray

    def __post_init__(self):
        scales = np.atleast_1d(np.asarray(self.b1_scales, dtype=float))
        offs = np.atleast_1d(np.asarray(self.offsets, dtype=float))
        object.__setattr__(self, "b1_scales", scales)
        object.__setattr__(self, "offsets", offs)
        for name, arr in (("b1_scales", scales), ("offsets", offs)):
            if arr.size == 0:
                raise ValueError(f"{name} must be non-empty")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} must be finite")
            if arr.size > 1 and not (np.diff(arr) > 0).all():
                raise ValueError(f"{name} must be strictly increasing")
        if (scales <= 0).any():
            raise ValueError("b1_scales must be positive")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.b1_scales.size, self.offsets.size)


@dataclass(frozen=True)
class MagnetizationProfile:
    """Mx/My/Mz over an EvalGrid, shape (n_b1_scales, n_offsets)."""

    mx: np.ndarray
    my: np.ndarray
    mz: np.ndarray

    def __post_init__(self):
        if not (self.mx.shape == self.my.shape == self.mz.shape):
            raise ValueError("component shapes must match")
        norm = self.mx**2 + self.my**2 + self.mz**2
        if np.abs(norm - 1.0).max() > 1e-9:
            raise ValueError("magnetization must stay on the unit sphere")

    @property
    def transverse(self) -> np.ndarray:
        return np.sqrt(self.mx**2 + self.my**2)


@dataclass(frozen=True)
class SpinTrajectory:
    """Time-resolved magnetization at a single (b1_scale, offset) condition."""

    times: np.ndarray
    mx: np.ndarray
    my: np.ndarray
    mz: np.ndarray


def _check_initial(initial) -> np.ndarray:
    m0 = np.asarray(initial, dtype=float)
    if m0.shape != (3,):
        raise ValueError("initial magnetization must be a 3-vector")
    if abs(m0 @ m0 - 1.0) > 1e-9:
        raise ValueError("initial magnetization must have unit norm")
    return m0


def rotation_vectors(pulse: RFPulse, b1_scales, offsets) -> np.ndarray:
    """Per-step rotation vectors, shape (n_steps, n_conditions, 3).

    The effective field at step j for condition (s, f) has transverse
    component gamma*s*amplitude[j] Hz at angle phase[j] and longitudinal
    component f Hz; the step rotates by -2*pi*dt times that field vector
    (sign such that a phase-0 pulse tips +z towards +y).
    """
    s = np.asarray(b1_scales, dtype=float).ravel()
    f = np.asarray(offsets, dtype=float).ravel()
    bt = GAMMA_HZ_PER_G * np.outer(pulse.amplitude, s)  # (L, G) Hz
    omega = np.empty((len(pulse), s.size, 3))
    omega[:, :, 0] = bt * np.cos(pulse.phase)[:, None]
    omega[:, :, 1] = bt * np.sin(pulse.phase)[:, None]
    omega[:, :, 2] = f[None, :]
    omega *= -2.0 * np.pi * pulse.dt
    return omega


def apply_rotation(omega: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Rotate vectors m by rotation vectors omega (Rodrigues), elementwise.

    Both arguments have shape (..., 3); broadcasting applies.
    """
    theta = np.linalg.norm(omega, axis=-1, keepdims=True)
    # Safe unit axis; theta == 0 contributes nothing below.
    axis = np.where(theta > 0, omega / np.where(theta > 0, theta, 1.0), 0.0)
    cos_t = np.cos(theta)
    sin_t = np.sin(theta)
    dot = np.sum(axis * m, axis=-1, keepdims=True)
    cross = np.cross(axis, m)
    return m * cos_t + cross * sin_t + axis * dot * (1.0 - cos_t)


def run_forward(pulse: RFPulse, b1_scales, offsets, initial=(0.0, 0.0, 1.0)):
    """Simulate and keep every intermediate state.

    Returns:
        (states, omega): states has shape (n_steps + 1, n_conditions, 3)
        with states[0] = initial; omega is the (n_steps, n_conditions, 3)
        rotation-vector array consumed by the adjoint pass.
    """
    m0 = _check_initial(initial)
    omega = rotation_vectors(pulse, b1_scales, offsets)
    n_steps, n_cond = omega.shape[:2]
    states = np.empty((n_steps + 1, n_cond, 3))
    states[0] = m0
    for j in range(n_steps):
        states[j + 1] = apply_rotation(omega[j], states[j])
    return states, omega


def simulate_profile(
    pulse: RFPulse, grid: EvalGrid, initial=(0.0, 0.0, 1.0)
) -> MagnetizationProfile:
    """Final magnetization on every (b1_scale, offset) grid point."""
    m0 = _check_initial(initial)
    scales = np.repeat(grid.b1_scales, grid.offsets.size)
    offs = np.tile(grid.offsets, grid.b1_scales.size)
    omega = rotation_vectors(pulse, scales, offs)
    m = np.broadcast_to(m0, (scales.size, 3)).copy()
    for j in range(len(pulse)):
        m = apply_rotation(omega[j], m)
    m = m.reshape(grid.shape + (3,))
    return MagnetizationProfile(mx=m[..., 0], my=m[..., 1], mz=m[..., 2])


def simulate_trajectory(
    pulse: RFPulse, b1_scale: float, offset: float, initial=(0.0, 0.0, 1.0)
) -> SpinTrajectory:
    """Per-step magnetization at one condition, including the initial state."""
    states, _ = run_forward(pulse, [b1_scale], [offset], initial)
    times = pulse.dt * np.arange(len(pulse) + 1)
    return SpinTrajectory(
        times=times, mx=states[:, 0, 0], my=states[:, 0, 1], mz=states[:, 0, 2]
    )
