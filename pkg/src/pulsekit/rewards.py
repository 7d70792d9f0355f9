"""Reward functions for pulse design.

Eight reward definitions are supported, one per design target:

* spec-matching rewards score band means / ripples against fixed targets
  (slice excitation, slice inversion, volume inversion, selective inversion),
* MSE rewards score the squared profile difference against a reference
  profile simulated from a conventional pulse.

Every reward subtracts an energy penalty c * ENG_scaled, where ENG_scaled
is the pulse energy in Gauss^2*second multiplied by ``eng_unit_scale``.
Besides the scalar value, the evaluator can return the derivative of the
reward with respect to the final magnetization at every grid point, which
is what the adjoint differentiator consumes.
"""

from __future__ import annotations

import hashlib
import os
import tempfile
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .bloch import EvalGrid, MagnetizationProfile, simulate_profile
from .pulse import RFPulse, pulse_energy


class RewardKind(Enum):
    SLICE_EXC_SPEC = "slice_exc_spec"  # band mean + stopband ripple + energy
    SLICE_INV_MSE = "slice_inv_mse"  # Mz MSE vs reference + energy
    VOL_INV_SPEC = "vol_inv_spec"  # region mean Mz + energy
    SEL_INV_MSE = "sel_inv_mse"  # Mz MSE vs reference over B1 x f + energy
    SLICE_EXC_MSE = "slice_exc_mse"  # Mx/My MSE vs reference + energy
    VOL_INV_MSE = "vol_inv_mse"  # Mz MSE vs reference over region + energy
    SLICE_INV_SPEC = "slice_inv_spec"  # band mean Mz + stopband ripple + energy
    SEL_INV_SPEC = "sel_inv_spec"  # region mean Mz + outside ripple + energy


MSE_KINDS = frozenset(
    {
        RewardKind.SLICE_INV_MSE,
        RewardKind.SEL_INV_MSE,
        RewardKind.SLICE_EXC_MSE,
        RewardKind.VOL_INV_MSE,
    }
)

# Kinds whose energy constant is named c3 (the others use c2).
_THREE_CONSTANT_KINDS = frozenset(
    {RewardKind.SLICE_EXC_SPEC, RewardKind.SLICE_INV_SPEC, RewardKind.SEL_INV_SPEC}
)


def stepped_range(start: float, stop: float, step: float) -> np.ndarray:
    """Inclusive grid from start to stop with an exact step.

    The number of samples is floor((stop - start) / step) + 1 and the last
    sample is clamped to ``stop`` when the span is not an integer multiple
    of the step.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    if stop <= start:
        raise ValueError("degenerate range")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    pts = start + step * np.arange(n)
    pts[-1] = stop
    return pts


def symmetric_band(limit: float, step: float) -> np.ndarray:
    """Grid over [-limit, limit] with the given step."""
    return stepped_range(-limit, limit, step)


def mirrored_stopband(inner: float, outer: float, step: float) -> np.ndarray:
    """Grid over +/-[inner, outer], both sides, with the given step."""
    right = stepped_range(inner, outer, step)
    return np.concatenate([-right[::-1], right])


def two_step_band(edge: float, outer: float, step_in: float, step_out: float) -> np.ndarray:
    """Grid over [-outer, outer]: fine step inside +/-edge, coarse outside."""
    inside = symmetric_band(edge, step_in)
    right = stepped_range(edge, outer, step_out)[1:]
    return np.concatenate([-right[::-1], inside, right])


_B1_REGION = stepped_range(0.5, 2.0, 0.03)
_ON_RESONANCE = np.array([1.0])


@dataclass(frozen=True)
class RewardSpec:
    """One reward definition with its constants and sampling grids.

    Attributes:
        kind: which of the eight reward expressions to evaluate.
        constants: c1/c2 (and c3 for the three-constant kinds).
        band_grid: grid of the band / target-region term (spec kinds).
        stop_grid: grid of the stopband-ripple term (spec kinds with one).
        mse_grid: grid of the profile-difference term (MSE kinds).
        reference_profile: profile the MSE kinds compare against; its grid
            must match ``mse_grid`` exactly.
        eng_unit_scale: converts Gauss^2*second to the penalty's unit.
        rephase_transverse: undo half a pulse duration of off-resonance
            precession before evaluating, i.e. evaluate the profile as seen
            after the standard slice-rewinder.  Without this the in-band
            transverse phase winds by many cycles and the mean-of-component
            transverse term cancels to near zero for any realistic slice
            pulse.  Terms built from pointwise magnitudes or component
            differences are unaffected by the rotation.
    """

    kind: RewardKind
    constants: dict
    band_grid: EvalGrid | None = None
    stop_grid: EvalGrid | None = None
    mse_grid: EvalGrid | None = None
    reference_profile: MagnetizationProfile | None = None
    eng_unit_scale: float = 1.0
    rephase_transverse: bool = False

    def __post_init__(self):
        needed = ("c1", "c2", "c3") if self.kind in _THREE_CONSTANT_KINDS else ("c1", "c2")
        for name in needed:
            if name not in self.constants:
                raise ValueError(f"{self.kind.value} requires constant {name}")
        if self.eng_unit_scale <= 0:
            raise ValueError("eng_unit_scale must be positive")
        if self.kind in MSE_KINDS:
            if self.mse_grid is None:
                raise ValueError(f"{self.kind.value} requires mse_grid")
            if self.reference_profile is not None:
                if self.reference_profile.mz.shape != self.mse_grid.shape:
                    raise ValueError("reference profile does not match mse_grid")
        else:
            if self.band_grid is None:
                raise ValueError(f"{self.kind.value} requires band_grid")
            if self.kind is not RewardKind.VOL_INV_SPEC and self.stop_grid is None:
                raise ValueError(f"{self.kind.value} requires stop_grid")

    @property
    def eng_constant(self) -> float:
        return self.constants["c3" if self.kind in _THREE_CONSTANT_KINDS else "c2"]

    @property
    def grids(self) -> list[EvalGrid]:
        """Grids the pulse must be simulated over, in evaluation order."""
        if self.kind in MSE_KINDS:
            return [self.mse_grid]
        if self.kind is RewardKind.VOL_INV_SPEC:
            return [self.band_grid]
        return [self.band_grid, self.stop_grid]

    def with_reference(self, reference: MagnetizationProfile) -> "RewardSpec":
        return replace(self, reference_profile=reference)


# Energy-penalty unit scales, per kind.  Chosen as powers of ten such that
# the penalty term of the matching conventional pulse is of order 0.01-1,
# i.e. comparable to (not dominating) the O(1) profile terms.
DEFAULT_ENG_SCALE = {
    RewardKind.SLICE_EXC_SPEC: 1e9,
    RewardKind.SLICE_INV_MSE: 1e9,
    RewardKind.VOL_INV_SPEC: 1e6,
    RewardKind.SEL_INV_MSE: 1e9,
    RewardKind.SLICE_EXC_MSE: 1e10,
    RewardKind.VOL_INV_MSE: 1e9,
    RewardKind.SLICE_INV_SPEC: 1e8,
    RewardKind.SEL_INV_SPEC: 1e9,
}

# Literal reading of an energy penalty expressed per micro-Gauss^2*second.
MICRO_G2S_SCALE = 1e12


def default_spec(
    kind: RewardKind,
    reference_profile: MagnetizationProfile | None = None,
    eng_unit_scale: float | None = None,
) -> RewardSpec:
    """RewardSpec with the published constants and sampling grids."""
    scale = DEFAULT_ENG_SCALE[kind] if eng_unit_scale is None else eng_unit_scale
    k = RewardKind
    if kind is k.SLICE_EXC_SPEC:
        return RewardSpec(
            kind,
            {"c1": 0.92724, "c2": 0.0146, "c3": 1e-5},
            band_grid=EvalGrid(_ON_RESONANCE, symmetric_band(1285.0, 2.6)),
            stop_grid=EvalGrid(_ON_RESONANCE, mirrored_stopband(1614.0, 32000.0, 20.3)),
            eng_unit_scale=scale,
            rephase_transverse=True,
        )
    if kind is k.SLICE_INV_MSE:
        return RewardSpec(
            kind,
            {"c1": 0.25, "c2": 1e-6},
            mse_grid=EvalGrid(_ON_RESONANCE, two_step_band(418.0, 8000.0, 1.2, 5.0)),
            reference_profile=reference_profile,
            eng_unit_scale=scale,
        )
    if kind is k.VOL_INV_SPEC:
        return RewardSpec(
            kind,
            {"c1": -0.9, "c2": 0.004},
            band_grid=EvalGrid(_B1_REGION, symmetric_band(200.0, 8.0)),
            eng_unit_scale=scale,
        )
    if kind is k.SEL_INV_MSE:
        return RewardSpec(
            kind,
            {"c1": 0.25, "c2": 1e-5},
            mse_grid=EvalGrid(_B1_REGION, two_step_band(200.0, 8000.0, 10.0, 75.0)),
            reference_profile=reference_profile,
            eng_unit_scale=scale,
        )
    if kind is k.SLICE_EXC_MSE:
        return RewardSpec(
            kind,
            {"c1": 0.125, "c2": 1e-6},
            mse_grid=EvalGrid(_ON_RESONANCE, two_step_band(1285.0, 32000.0, 3.1, 20.3)),
            reference_profile=reference_profile,
            eng_unit_scale=scale,
        )
    if kind is k.VOL_INV_MSE:
        return RewardSpec(
            kind,
            {"c1": 0.25, "c2": 1e-5},
            mse_grid=EvalGrid(_B1_REGION, symmetric_band(200.0, 8.0)),
            reference_profile=reference_profile,
            eng_unit_scale=scale,
        )
    if kind is k.SLICE_INV_SPEC:
        return RewardSpec(
            kind,
            {"c1": -0.80838, "c2": 0.0028, "c3": 1e-5},
            band_grid=EvalGrid(_ON_RESONANCE, symmetric_band(418.0, 0.8)),
            stop_grid=EvalGrid(_ON_RESONANCE, mirrored_stopband(588.0, 8000.0, 4.9)),
            eng_unit_scale=scale,
        )
    if kind is k.SEL_INV_SPEC:
        return RewardSpec(
            kind,
            {"c1": -0.906, "c2": 0.01, "c3": 1e-5},
            band_grid=EvalGrid(_B1_REGION, symmetric_band(200.0, 4.0)),
            stop_grid=EvalGrid(_B1_REGION, mirrored_stopband(568.0, 8000.0, 74.3)),
            eng_unit_scale=scale,
        )
    raise ValueError(f"unknown reward kind {kind!r}")


def _argmax_seed(values: np.ndarray) -> tuple:
    """Index of the first maximum (subgradient tie rule: lowest index)."""
    return np.unravel_index(int(np.argmax(values)), values.shape)


def reward_terms(pulse: RFPulse, spec: RewardSpec, profiles=None):
    """Evaluate a reward and its sensitivities to the final magnetization.

    Args:
        profiles: optional pre-simulated profiles matching ``spec.grids``;
            simulated here when omitted.

    Returns:
        (reward, seeds) where seeds is a list of (grid, dM) pairs, dM of
        shape grid.shape + (3,), holding d(reward)/d(final magnetization).
        Clipped min/max terms follow a one-sided subgradient: the active
        branch carries derivative 1, ties take the active branch, and
        element-wise maxima route the gradient to the first maximum.
    """
    if spec.kind in MSE_KINDS and spec.reference_profile is None:
        raise ValueError(f"{spec.kind.value} needs a reference profile")
    grids = spec.grids
    if profiles is None:
        profiles = [simulate_profile(pulse, g) for g in grids]
    if len(profiles) != len(grids):
        raise ValueError("profile count does not match the spec's grids")
    for g, p in zip(grids, profiles):
        if p.mz.shape != g.shape:
            raise ValueError("profile shape does not match its grid")

    rewind = None
    if spec.rephase_transverse:
        # Precess each grid point backwards by T/2 about z.  With the
        # simulator's rotation sign this is a +pi*f*T z-rotation.
        rewind = [np.pi * g.offsets[None, :] * pulse.duration for g in grids]
        rotated = []
        for p, th in zip(profiles, rewind):
            cos_t, sin_t = np.cos(th), np.sin(th)
            rotated.append(
                MagnetizationProfile(
                    p.mx * cos_t - p.my * sin_t,
                    p.mx * sin_t + p.my * cos_t,
                    p.mz.copy(),
                )
            )
        profiles = rotated

    c = spec.constants
    seeds = [np.zeros(g.shape + (3,)) for g in grids]
    k = RewardKind

    if spec.kind in MSE_KINDS:
        prof, ref = profiles[0], spec.reference_profile
        n = prof.mz.size
        if spec.kind is k.SLICE_EXC_MSE:
            dx = prof.mx - ref.mx
            dy = prof.my - ref.my
            term = -c["c1"] * (np.mean(dx**2) + np.mean(dy**2))
            seeds[0][..., 0] = -c["c1"] * 2.0 * dx / n
            seeds[0][..., 1] = -c["c1"] * 2.0 * dy / n
        else:
            dz = prof.mz - ref.mz
            term = -c["c1"] * np.mean(dz**2)
            seeds[0][..., 2] = -c["c1"] * 2.0 * dz / n
        reward = term
    elif spec.kind is k.SLICE_EXC_SPEC:
        band, stop = profiles
        n_b = band.mz.size
        mean_x, mean_y = np.mean(band.mx), np.mean(band.my)
        mean_trans = float(np.hypot(mean_x, mean_y))
        if mean_trans <= c["c1"]:  # active branch of min(., c1)
            denom = mean_trans if mean_trans > 0 else 1.0
            seeds[0][..., 0] = mean_x / denom / n_b
            seeds[0][..., 1] = mean_y / denom / n_b
        reward = min(mean_trans, c["c1"])
        ripple = np.sqrt(stop.mx**2 + stop.my**2)
        peak = _argmax_seed(ripple)
        max_ripple = float(ripple[peak])
        if max_ripple - c["c2"] >= 0:  # active branch of max(. - c2, 0)
            r = max_ripple if max_ripple > 0 else 1.0
            seeds[1][peak + (0,)] = -stop.mx[peak] / r
            seeds[1][peak + (1,)] = -stop.my[peak] / r
        reward -= max(max_ripple - c["c2"], 0.0)
    elif spec.kind is k.VOL_INV_SPEC:
        band = profiles[0]
        mean_z = float(np.mean(band.mz))
        if mean_z >= c["c1"]:  # active branch of max(., c1)
            seeds[0][..., 2] = -1.0 / band.mz.size
        reward = -max(mean_z, c["c1"])
    elif spec.kind in (k.SLICE_INV_SPEC, k.SEL_INV_SPEC):
        band, stop = profiles
        mean_z = float(np.mean(band.mz))
        if mean_z >= c["c1"]:
            seeds[0][..., 2] = -1.0 / band.mz.size
        reward = -max(mean_z, c["c1"])
        dev = np.abs(1.0 - stop.mz)
        peak = _argmax_seed(dev)
        max_dev = float(dev[peak])
        if max_dev - c["c2"] >= 0:
            seeds[1][peak + (2,)] = np.sign(1.0 - stop.mz[peak])
        reward -= max(max_dev - c["c2"], 0.0)
    else:
        raise ValueError(f"unknown reward kind {spec.kind!r}")

    if rewind is not None:
        # Seeds live in the rewound frame; rotate them back to the raw one.
        for seed, th in zip(seeds, rewind):
            cos_t, sin_t = np.cos(th), np.sin(th)
            sx = seed[..., 0] * cos_t + seed[..., 1] * sin_t
            sy = -seed[..., 0] * sin_t + seed[..., 1] * cos_t
            seed[..., 0], seed[..., 1] = sx, sy

    reward -= spec.eng_constant * spec.eng_unit_scale * pulse_energy(pulse)
    return float(reward), list(zip(grids, seeds))


def evaluate_reward(pulse: RFPulse, spec: RewardSpec) -> float:
    """Scalar reward of a pulse under a reward spec."""
    reward, _ = reward_terms(pulse, spec)
    return reward


def _grid_hash(grid: EvalGrid) -> str:
    h = hashlib.sha256()
    h.update(grid.b1_scales.tobytes())
    h.update(grid.offsets.tobytes())
    return h.hexdigest()[:16]


def _pulse_hash(pulse: RFPulse) -> str:
    h = hashlib.sha256()
    h.update(pulse.amplitude.tobytes())
    h.update(pulse.phase.tobytes())
    h.update(np.float64(pulse.dt).tobytes())
    return h.hexdigest()[:16]


def build_reference_profile(
    kind: RewardKind, conventional_pulse: RFPulse, cache_dir=None
) -> MagnetizationProfile:
    """Simulate a conventional pulse on an MSE kind's grid.

    Results are cached on disk keyed by pulse and grid hashes; the cache
    file is written atomically (write to a temp file, then rename).
    """
    if kind not in MSE_KINDS:
        raise ValueError(f"{kind.value} is not an MSE reward kind")
    grid = default_spec(kind).mse_grid
    if cache_dir is not None:
        os.makedirs(cache_dir, exist_ok=True)
        key = f"ref_{kind.value}_{_pulse_hash(conventional_pulse)}_{_grid_hash(grid)}.npz"
        path = os.path.join(cache_dir, key)
        if os.path.exists(path):
            with np.load(path) as data:
                return MagnetizationProfile(data["mx"], data["my"], data["mz"])
    profile = simulate_profile(conventional_pulse, grid)
    if cache_dir is not None:
        fd, tmp = tempfile.mkstemp(dir=cache_dir, suffix=".npz.tmp")
        with os.fdopen(fd, "wb") as fh:
            np.savez(fh, mx=profile.mx, my=profile.my, mz=profile.mz)
        os.replace(tmp, path)
    return profile
