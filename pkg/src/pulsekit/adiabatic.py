"""Adiabatic inversion pulses and grid-search parameter optimization.

The primary shape is the hyperbolic secant (HS): sech amplitude modulation
with a tanh frequency sweep.  Hanning, Gauss, and Lorentz amplitude shapes
get their frequency sweeps from the offset-independent-adiabaticity
construction (sweep rate proportional to the squared amplitude), which for
the sech shape reduces to the usual tanh sweep.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bloch import EvalGrid, apply_rotation
from .pulse import GAMMA_HZ_PER_G, RFPulse, pulse_energy

SHAPES = ("hs", "hanning", "gauss", "lorentz")


@dataclass(frozen=True)
class AdiabaticParams:
    """Amplitude/sweep parameters of one adiabatic pulse.

    Attributes:
        shape: one of hs, hanning, gauss, lorentz.
        omega1_max: peak amplitude in Gauss.
        beta: modulation rate in rad/second.
        a: frequency-sweep amplitude in Hz.
        duration: pulse length in seconds.
        n_steps: number of hard-pulse samples.
    """

    shape: str
    omega1_max: float
    beta: float
    a: float
    duration: float
    n_steps: int

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown shape {self.shape!r}")
        for name in ("omega1_max", "beta", "a", "duration"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.n_steps < 8:
            raise ValueError("n_steps must be >= 8")


def _am_shape(shape: str, tau: np.ndarray) -> np.ndarray:
    """Unit-peak amplitude modulation; tau = beta * (t - T/2)."""
    if shape == "hs":
        return 1.0 / np.cosh(tau)
    if shape == "hanning":
        return np.where(np.abs(tau) < np.pi, 0.5 * (1.0 + np.cos(tau)), 0.0)
    if shape == "gauss":
        return np.exp(-0.5 * tau**2)
    if shape == "lorentz":
        return 1.0 / (1.0 + tau**2)
    raise ValueError(f"unknown shape {shape!r}")


def _waveform(params: AdiabaticParams):
    """Amplitude (Gauss), sweep (Hz), and phase (rad) on step centers."""
    n, dur = params.n_steps, params.duration
    t = (np.arange(n) + 0.5) * (dur / n)
    tau = params.beta * (t - dur / 2.0)
    am = _am_shape(params.shape, tau)
    if params.shape == "hs":
        sweep = -params.a * np.tanh(tau)
    else:
        # Offset-independent adiabaticity: d(sweep)/dt proportional to am^2,
        # scaled so the sweep spans [-a, a] like the sech/tanh pair.
        edges = np.concatenate([[0.0], np.cumsum(am**2)])
        centers = edges[:-1] + am**2 / 2.0 - edges[-1] / 2.0
        peak = np.abs(centers).max()
        sweep = -params.a * centers / peak if peak > 0 else np.zeros(n)
    dt = dur / n
    # Trapezoidal phase accumulation of 2*pi*sweep on the sample grid.
    phase = np.empty(n)
    phase[0] = 2.0 * np.pi * sweep[0] * t[0]
    increments = 2.0 * np.pi * (sweep[1:] + sweep[:-1]) / 2.0 * dt
    phase[1:] = phase[0] + np.cumsum(increments)
    return params.omega1_max * am, sweep, phase


def adiabatic_pulse(params: AdiabaticParams) -> RFPulse:
    """Build the hard-pulse waveform of an adiabatic design."""
    amp, _, phase = _waveform(params)
    return RFPulse(amp, phase, params.duration / params.n_steps)


def frequency_sweep(params: AdiabaticParams) -> np.ndarray:
    """Instantaneous frequency sweep in Hz on the sample grid."""
    return _waveform(params)[1]


def _mean_mz_batch(amps, phases, dt, grid: EvalGrid) -> np.ndarray:
    """Mean final Mz over a grid for a batch of pulses.

    Args:
        amps, phases: arrays of shape (n_pulses, n_steps).

    Returns:
        array of n_pulses grid-averaged Mz values.
    """
    amps = np.asarray(amps, dtype=float)
    phases = np.asarray(phases, dtype=float)
    n_pulses, n_steps = amps.shape
    s = np.repeat(grid.b1_scales, grid.offsets.size)
    f = np.tile(grid.offsets, grid.b1_scales.size)
    m = np.zeros((n_pulses, s.size, 3))
    m[:, :, 2] = 1.0
    omega = np.empty((n_pulses, s.size, 3))
    scale = -2.0 * np.pi * dt
    for j in range(n_steps):
        bt = GAMMA_HZ_PER_G * amps[:, j : j + 1] * s[None, :]
        omega[:, :, 0] = bt * np.cos(phases[:, j : j + 1])
        omega[:, :, 1] = bt * np.sin(phases[:, j : j + 1])
        omega[:, :, 2] = f[None, :]
        m = apply_rotation(scale * omega, m)
    return m[:, :, 2].mean(axis=1)


@dataclass(frozen=True)
class GridSearchRanges:
    """Candidate parameter values per axis (log-spaced defaults)."""

    omega1_max: np.ndarray
    beta: np.ndarray
    a: np.ndarray
    shapes: tuple = SHAPES

    @classmethod
    def default(cls, points_per_axis: int = 40) -> "GridSearchRanges":
        return cls(
            omega1_max=np.geomspace(2e-3, 200e-3, points_per_axis),
            beta=np.geomspace(100.0, 10000.0, points_per_axis),
            a=np.geomspace(10.0, 2000.0, points_per_axis),
        )


class InfeasibleSearchError(RuntimeError):
    """No candidate met the mean-Mz threshold."""

    def __init__(self, best_mean_mz: float):
        super().__init__(
            f"no feasible candidate; best achieved mean Mz = {best_mean_mz:.4f}"
        )
        self.best_mean_mz = best_mean_mz


def adiabatic_grid_search(
    target: EvalGrid,
    threshold: float,
    ranges: GridSearchRanges | None = None,
    duration: float = 8e-3,
    n_steps: int = 256,
    coarse_stride: int = 5,
    coarse_margin: float = 0.05,
    batch: int = 512,
    log=None,
):
    """Lowest-energy adiabatic pulse with mean Mz <= threshold over target.

    Candidates are scanned in ascending pulse energy, so the first feasible
    candidate wins; ties on energy prefer smaller omega1_max, then smaller
    sweep amplitude.  A coarse sub-grid pre-screen skips candidates whose
    approximate mean Mz is clearly above the threshold.

    Args:
        log: optional callable receiving one dict per evaluated candidate
            (used for the CSV search log).

    Returns:
        (AdiabaticParams, RFPulse) of the winner.

    Raises:
        InfeasibleSearchError: when no candidate meets the threshold.
    """
    if not (-1.0 <= threshold < 0.0):
        raise ValueError("threshold must lie in [-1, 0)")
    ranges = ranges or GridSearchRanges.default()
    coarse = EvalGrid(
        target.b1_scales[::coarse_stride], target.offsets[::coarse_stride]
    )

    candidates = []
    for shape in ranges.shapes:
        for w1 in ranges.omega1_max:
            for beta in ranges.beta:
                for a in ranges.a:
                    p = AdiabaticParams(shape, float(w1), float(beta), float(a), duration, n_steps)
                    amp, _, phase = _waveform(p)
                    eng = float(np.sum(amp**2) * duration / n_steps)
                    candidates.append((eng, float(w1), float(a), p, amp, phase))
    candidates.sort(key=lambda c: (c[0], c[1], c[2]))

    dt = duration / n_steps
    best_mean = np.inf
    for start in range(0, len(candidates), batch):
        chunk = candidates[start : start + batch]
        amps = np.array([c[4] for c in chunk])
        phases = np.array([c[5] for c in chunk])
        coarse_mz = _mean_mz_batch(amps, phases, dt, coarse)
        maybe = np.flatnonzero(coarse_mz <= threshold + coarse_margin)
        best_mean = min(best_mean, coarse_mz.min(initial=np.inf))
        if maybe.size:
            full_mz = _mean_mz_batch(amps[maybe], phases[maybe], dt, target)
            best_mean = min(best_mean, float(full_mz.min()))
            for idx, mz in zip(maybe, full_mz):
                eng, w1, a, params, amp, phase = chunk[idx]
                if log is not None:
                    log(
                        {
                            "shape": params.shape,
                            "omega1_max_g": params.omega1_max,
                            "beta_rad_s": params.beta,
                            "a_hz": params.a,
                            "mean_mz": float(mz),
                            "eng": eng,
                        }
                    )
                if mz <= threshold:
                    # Chunk is energy-sorted, so the first hit is the winner.
                    return params, RFPulse(amp, phase, dt)
    raise InfeasibleSearchError(float(best_mean))
