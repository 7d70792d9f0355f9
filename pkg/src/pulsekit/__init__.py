"""RF pulse design toolkit: simulation, baselines, generation, refinement."""

__version__ = "0.1.0"

from .adiabatic import AdiabaticParams, adiabatic_grid_search, adiabatic_pulse
from .analysis import BandSet, ProfileMetrics, adiabaticity_series, profile_metrics
from .bloch import EvalGrid, MagnetizationProfile, simulate_profile
from .gradients import PulseGradient, reward_gradient
from .pulse import GAMMA_HZ_PER_G, RFPulse, pulse_energy, read_pulse_csv, write_pulse_csv
from .refine import RefineConfig, RefineReport, refine_pulses
from .rewards import RewardKind, RewardSpec, default_spec, evaluate_reward
from .slr import SLRSpec, design_slr, forward_slr, inverse_slr

__all__ = [
    "AdiabaticParams",
    "BandSet",
    "EvalGrid",
    "GAMMA_HZ_PER_G",
    "MagnetizationProfile",
    "ProfileMetrics",
    "PulseGradient",
    "RFPulse",
    "RefineConfig",
    "RefineReport",
    "RewardKind",
    "RewardSpec",
    "SLRSpec",
    "adiabatic_grid_search",
    "adiabatic_pulse",
    "adiabaticity_series",
    "default_spec",
    "design_slr",
    "evaluate_reward",
    "forward_slr",
    "inverse_slr",
    "profile_metrics",
    "pulse_energy",
    "read_pulse_csv",
    "refine_pulses",
    "reward_gradient",
    "simulate_profile",
    "write_pulse_csv",
]
