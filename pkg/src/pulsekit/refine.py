"""Gradient-ascent pulse refinement with Adam.

Each seed pulse carries its own Adam state and climbs its reward
independently; the best (pulse, reward) pair seen at any iteration by any
seed is the result.  Amplitudes are projected back to >= 0 after every
step when optimizing in amplitude/phase parameterization.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gradients import reward_gradient
from .pulse import RFPulse
from .rewards import RewardSpec, evaluate_reward


class Adam:
    """Per-array Adam accumulator (ascent: parameters move along +grad)."""

    def __init__(self, shape, step_size, beta1=0.9, beta2=0.999, eps=1e-8):
        self.step_size = step_size
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = np.zeros(shape)
        self.v = np.zeros(shape)
        self.t = 0

    def update(self, grad: np.ndarray) -> np.ndarray:
        """Return the additive parameter update for this gradient."""
        self.t += 1
        self.m = self.beta1 * self.m + (1.0 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1.0 - self.beta2) * grad**2
        m_hat = self.m / (1.0 - self.beta1**self.t)
        v_hat = self.v / (1.0 - self.beta2**self.t)
        return self.step_size * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class RefineConfig:
    """Settings of one refinement run."""

    spec: RewardSpec
    step_size: float = 0.01
    iterations: int = 10_000
    parameterization: str = "amplitude-phase"  # or "real-imaginary"
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    snapshot_every: int = 0  # 0 disables snapshots
    max_amplitude: float | None = None  # optional hardware cap, Gauss

    def __post_init__(self):
        if self.step_size <= 0:
            raise ValueError("step_size must be positive")
        if self.iterations < 0:
            raise ValueError("iterations must be >= 0")
        if self.parameterization not in ("amplitude-phase", "real-imaginary"):
            raise ValueError(f"unknown parameterization {self.parameterization!r}")


@dataclass
class RefineReport:
    """Outcome of a refinement run."""

    best_pulse: RFPulse
    best_reward: float
    reward_trace: np.ndarray  # per-iteration best-so-far reward
    mean_trace: np.ndarray  # per-iteration mean reward over surviving seeds
    final_rewards: list  # per-seed final reward (nan for aborted seeds)
    snapshots: list = field(default_factory=list)  # (iteration, RFPulse)


def _to_real_imag(pulse: RFPulse):
    b1 = pulse.b1
    return b1.real.copy(), b1.imag.copy()


def _from_real_imag(re, im, dt) -> RFPulse:
    return RFPulse(np.hypot(re, im), np.arctan2(im, re), dt)


def refine_pulses(seeds, cfg: RefineConfig) -> RefineReport:
    """Iteratively improve seed pulses by Adam gradient ascent on the reward.

    Every seed keeps independent optimizer state; the returned best pulse
    is the highest-reward iterate over all seeds and iterations (including
    the unmodified seeds themselves).  Seeds whose gradient turns
    non-finite are dropped with a warning entry and the others continue.
    """
    seeds = list(seeds)
    if not seeds:
        raise ValueError("need at least one seed")
    length, dt = len(seeds[0]), seeds[0].dt
    for s in seeds:
        if len(s) != length or s.dt != dt:
            raise ValueError("all seeds must share length and dt")

    amp_like = cfg.parameterization == "amplitude-phase"
    states = []
    best_pulse, best_reward = None, -np.inf
    for idx, seed in enumerate(seeds):
        r0 = evaluate_reward(seed, cfg.spec)
        if r0 > best_reward:
            best_pulse, best_reward = seed, r0
        opt_a = Adam(length, cfg.step_size, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
        opt_b = Adam(length, cfg.step_size, cfg.adam_beta1, cfg.adam_beta2, cfg.adam_eps)
        states.append({"pulse": seed, "opt": (opt_a, opt_b), "alive": True, "reward": r0})

    trace = np.empty(cfg.iterations)
    mean_trace = np.empty(cfg.iterations)
    snapshots = []
    for it in range(cfg.iterations):
        rewards_now = []
        for st in states:
            if not st["alive"]:
                continue
            pulse = st["pulse"]
            reward, grad = reward_gradient(pulse, cfg.spec)
            rewards_now.append(reward)
            if not (np.isfinite(grad.d_amplitude).all() and np.isfinite(grad.d_phase).all()):
                st["alive"] = False
                st["reward"] = np.nan
                continue
            opt_a, opt_b = st["opt"]
            if amp_like:
                amp = pulse.amplitude + opt_a.update(grad.d_amplitude)
                phase = pulse.phase + opt_b.update(grad.d_phase)
                np.clip(amp, 0.0, cfg.max_amplitude, out=amp)
                new = RFPulse(amp, phase, dt)
            else:
                re, im = _to_real_imag(pulse)
                # Chain rule from (amplitude, phase) to (real, imaginary).
                amp = np.maximum(pulse.amplitude, 1e-12)
                cos_p, sin_p = np.cos(pulse.phase), np.sin(pulse.phase)
                d_re = grad.d_amplitude * cos_p - grad.d_phase * sin_p / amp
                d_im = grad.d_amplitude * sin_p + grad.d_phase * cos_p / amp
                re += opt_a.update(d_re)
                im += opt_b.update(d_im)
                new = _from_real_imag(re, im, dt)
            new_reward = evaluate_reward(new, cfg.spec)
            st["pulse"], st["reward"] = new, new_reward
            if new_reward > best_reward:
                best_pulse, best_reward = new, new_reward
        if not rewards_now:
            trace = trace[:it]
            mean_trace = mean_trace[:it]
            break
        trace[it] = best_reward
        mean_trace[it] = float(np.mean(rewards_now))
        if cfg.snapshot_every and (it + 1) % cfg.snapshot_every == 0:
            snapshots.append((it + 1, best_pulse))

    return RefineReport(
        best_pulse=best_pulse,
        best_reward=best_reward,
        reward_trace=trace,
        mean_trace=mean_trace,
        final_rewards=[st["reward"] for st in states],
        snapshots=snapshots,
    )
