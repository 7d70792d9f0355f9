"""Profile metrics, adiabaticity traces, and time-resolved snapshots.

Metrics follow the slice-selective conventions: excitation quality is read
off the transverse magnitude, inversion quality off Mz.  The inversion
passband ripple is quoted on the normalized inversion response
(1 - mz) / 2, i.e. half the Mz deviation; the stopband ripple is the raw
|1 - mz| deviation.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .bloch import EvalGrid, MagnetizationProfile, simulate_profile
from .pulse import GAMMA_HZ_PER_G, RFPulse, pulse_energy


@dataclass(frozen=True)
class BandSet:
    """Frequency bands over which profile metrics are evaluated.

    Attributes:
        band_limit: half-width of the in-band region f_b (the full width
            at half maximum band), Hz; band means are taken here.
        stop_inner, stop_outer: |f| range of the mirrored stopband, Hz.
        pass_limit: optional half-width of the flat passband over which
            the passband ripple is read (defaults to the in-band region).
        region_limit: optional half-width of the target region used for
            the region-mean Mz (defaults to the in-band region).
        excitation: True reads metrics off the transverse magnitude,
            False off Mz.
    """

    band_limit: float
    stop_inner: float
    stop_outer: float
    pass_limit: float | None = None
    region_limit: float | None = None
    excitation: bool = True

    def __post_init__(self):
        if not (0.0 < self.band_limit < self.stop_inner < self.stop_outer):
            raise ValueError("bands must satisfy 0 < band < stop_inner < stop_outer")
        for name in ("pass_limit", "region_limit"):
            value = getattr(self, name)
            if value is not None and value <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class ProfileMetrics:
    """Scalar summary of one simulated profile."""

    mean_transverse_over_bw: float
    mean_mz_over_bw: float
    max_passband_ripple: float
    max_stopband_ripple: float
    fwhm_hz: float
    mean_mz_over_region: float
    eng: float

    def __post_init__(self):
        if self.max_passband_ripple < 0 or self.max_stopband_ripple < 0:
            raise ValueError("ripples must be >= 0")
        if self.fwhm_hz < 0:
            raise ValueError("fwhm must be >= 0")


def _fwhm(offsets: np.ndarray, response: np.ndarray) -> float:
    """Full width at half maximum by linear interpolation between samples."""
    peak = response.max()
    if peak <= 0:
        return 0.0
    half = peak / 2.0
    above = response >= half
    idx = np.flatnonzero(above)
    if idx.size == 0:
        return 0.0

    def cross(i_out, i_in):
        # Interpolate the half-maximum crossing between samples i_out, i_in.
        r0, r1 = response[i_out], response[i_in]
        if r1 == r0:
            return offsets[i_in]
        t = (half - r0) / (r1 - r0)
        return offsets[i_out] + t * (offsets[i_in] - offsets[i_out])

    lo = offsets[idx[0]] if idx[0] == 0 else cross(idx[0] - 1, idx[0])
    hi = offsets[idx[-1]] if idx[-1] == response.size - 1 else cross(idx[-1] + 1, idx[-1])
    return float(hi - lo)


def profile_metrics(
    profile: MagnetizationProfile,
    grid: EvalGrid,
    bands: BandSet,
    pulse: RFPulse | None = None,
) -> ProfileMetrics:
    """Band means, ripples, FWHM, and energy of one profile.

    Band masks select frequency offsets; metrics reduce over every B1
    scale inside the mask, so region means over a B1 x frequency grid
    come out as the full two-dimensional average.
    """
    f = grid.offsets
    if bands.stop_outer > np.abs(f).max() + 1e-9:
        raise ValueError("stopband extends outside the simulated grid")
    in_band = np.abs(f) <= bands.band_limit + 1e-9
    in_stop = (np.abs(f) >= bands.stop_inner - 1e-9) & (np.abs(f) <= bands.stop_outer + 1e-9)
    passband = bands.pass_limit if bands.pass_limit is not None else bands.band_limit
    in_pass = np.abs(f) <= passband + 1e-9
    region = bands.region_limit if bands.region_limit is not None else bands.band_limit
    in_region = np.abs(f) <= region + 1e-9
    if not in_band.any() or not in_stop.any() or not in_pass.any():
        raise ValueError("bands select no grid samples")

    trans = profile.transverse
    mean_trans = float(np.mean(trans[..., in_band]))
    mean_mz = float(np.mean(profile.mz[..., in_band]))
    if bands.excitation:
        pass_ripple = float(np.abs(1.0 - trans[..., in_pass]).max())
        stop_ripple = float(trans[..., in_stop].max())
    else:
        pass_ripple = float((np.abs(-1.0 - profile.mz[..., in_pass]) / 2.0).max())
        stop_ripple = float(np.abs(1.0 - profile.mz[..., in_stop]).max())

    # FWHM on the row closest to nominal B1.
    row = int(np.argmin(np.abs(grid.b1_scales - 1.0)))
    resp = trans[row] if bands.excitation else (1.0 - profile.mz[row]) / 2.0
    return ProfileMetrics(
        mean_transverse_over_bw=mean_trans,
        mean_mz_over_bw=mean_mz,
        max_passband_ripple=pass_ripple,
        max_stopband_ripple=stop_ripple,
        fwhm_hz=_fwhm(f, np.atleast_1d(resp)),
        mean_mz_over_region=float(np.mean(profile.mz[..., in_region])),
        eng=pulse_energy(pulse) if pulse is not None else float("nan"),
    )


def adiabaticity_series(pulse: RFPulse, b1_scale: float = 1.0, offset: float = 0.0) -> np.ndarray:
    """Per-step adiabaticity K(t) in the frequency-modulated frame.

    The instantaneous sweep is the finite-difference derivative of the
    phase; the effective field then has transverse component
    gamma * b1_scale * amplitude and longitudinal component
    offset + sweep (both Hz).  K is the effective-field angular rate
    (rad/s) over the field-angle sweep rate (cycles/s); steps where the
    field direction is stationary report +inf.
    """
    if len(pulse) < 3:
        raise ValueError("need at least 3 samples for finite differences")
    if b1_scale <= 0:
        raise ValueError("b1_scale must be positive")
    # Unwrap so wrap discontinuities (and global offsets that move them)
    # do not masquerade as frequency sweeps.
    sweep = np.gradient(np.unwrap(pulse.phase), pulse.dt) / (2.0 * np.pi)  # Hz
    f_trans = GAMMA_HZ_PER_G * b1_scale * pulse.amplitude  # Hz
    f_long = offset + sweep
    omega_eff = 2.0 * np.pi * np.hypot(f_trans, f_long)  # rad/s
    angle = np.arctan2(f_trans, f_long)
    alpha_dot = np.gradient(angle, pulse.dt) / (2.0 * np.pi)  # cycles/s
    k = np.full(len(pulse), np.inf)
    moving = alpha_dot != 0.0
    k[moving] = omega_eff[moving] / np.abs(alpha_dot[moving])
    return k


def profile_snapshots(pulse: RFPulse, grid: EvalGrid, times) -> list[MagnetizationProfile]:
    """Profiles after truncating the pulse at each requested time.

    A time falling inside a step keeps that step with its amplitude
    scaled by the fractional dt, which reproduces a shortened final
    rotation of the piecewise-constant waveform up to the off-resonance
    part of that partial step.
    """
    out = []
    for t in times:
        if not (0.0 <= t <= pulse.duration + 1e-12):
            raise ValueError(f"snapshot time {t} outside [0, duration]")
        n_full, frac = divmod(t / pulse.dt, 1.0)
        n_full = int(n_full)
        amps = pulse.amplitude[: n_full + (frac > 1e-12)].copy()
        phases = pulse.phase[: n_full + (frac > 1e-12)].copy()
        if frac > 1e-12:
            amps[-1] *= frac
        if amps.size == 0:
            ones = np.ones(grid.shape)
            out.append(MagnetizationProfile(mx=0.0 * ones, my=0.0 * ones, mz=ones))
            continue
        out.append(simulate_profile(RFPulse(amps, phases, pulse.dt), grid))
    return out


def write_metrics_csv(path, metrics: dict[str, ProfileMetrics]) -> None:
    """Write `pulse_id,metric,value` rows for each pulse's metrics."""
    fields = (
        "mean_transverse_over_bw",
        "mean_mz_over_bw",
        "max_passband_ripple",
        "max_stopband_ripple",
        "fwhm_hz",
        "mean_mz_over_region",
        "eng",
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["pulse_id", "metric", "value"])
        for pulse_id, m in metrics.items():
            for name in fields:
                writer.writerow([pulse_id, name, repr(getattr(m, name))])


def write_adiabaticity_csv(path, pulse: RFPulse, k: np.ndarray) -> None:
    """Write `t_seconds,k` rows; one row per pulse sample."""
    times = pulse.dt * (np.arange(len(pulse)) + 0.5)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["t_seconds", "k"])
        for t, val in zip(times, k):
            writer.writerow([repr(float(t)), repr(float(val))])
