"""Recurrent stochastic policy that writes RF pulses, trained with PPO.

A single GRU layer (hidden width 256) followed by four cascaded
fully-connected layers maps the previous (amplitude, phase) action and
the hidden state to the next action means and a value estimate.  Actions
are sampled from fixed-variance Gaussians; a half-pulse of T actions is
mirrored and linearly up-sampled to the full waveform.  The policy is
trained on complete episodes with a clipped-surrogate policy gradient
(terminal reward, value baseline) and manual backpropagation through
time; no autograd framework is used.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

import numpy as np

from .pulse import RFPulse
from .refine import Adam
from .rewards import RewardSpec, evaluate_reward

HIDDEN = 256
HEAD_WIDTHS = (128, 64, 32, 3)
MAX_ACTION_AMPLITUDE = 0.2  # Gauss; matches the random-seed sampling range


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class PolicyParams:
    """All weights of the recurrent policy plus the fixed action stddevs.

    GRU weights follow the gate order (reset, update, candidate), with
    the candidate's hidden contribution gated by the reset gate.  Head
    layers apply tanh between layers and a linear final map to
    (mu_amplitude, mu_phase, value).
    """

    weights: dict
    sigma_a: float = 0.01  # Gauss
    sigma_p: float = 0.1  # rad

    def __post_init__(self):
        if self.sigma_a <= 0 or self.sigma_p <= 0:
            raise ValueError("action stddevs must be positive")
        for name, w in self.weights.items():
            if not np.isfinite(w).all():
                raise ValueError(f"non-finite weight {name}")

    def copy(self) -> "PolicyParams":
        return PolicyParams(
            {k: v.copy() for k, v in self.weights.items()}, self.sigma_a, self.sigma_p
        )


def _xavier(rng, fan_out, fan_in):
    limit = np.sqrt(6.0 / (fan_in + fan_out))
    return rng.uniform(-limit, limit, size=(fan_out, fan_in))


def init_policy(rng, sigma_a: float = 0.01, sigma_p: float = 0.1) -> PolicyParams:
    """Xavier-uniform weights, zero biases."""
    w = {
        "gru_wx": _xavier(rng, 3 * HIDDEN, 2),
        "gru_wh": _xavier(rng, 3 * HIDDEN, HIDDEN),
        "gru_bx": np.zeros(3 * HIDDEN),
        "gru_bh": np.zeros(3 * HIDDEN),
    }
    fan_in = HIDDEN
    for i, width in enumerate(HEAD_WIDTHS, start=1):
        w[f"fc{i}_w"] = _xavier(rng, width, fan_in)
        w[f"fc{i}_b"] = np.zeros(width)
        fan_in = width
    return PolicyParams(w, sigma_a, sigma_p)


def _gru_forward(p: dict, x: np.ndarray, h: np.ndarray):
    """One batched GRU step; returns (new hidden, cache for backprop)."""
    gi = x @ p["gru_wx"].T + p["gru_bx"]
    gh = h @ p["gru_wh"].T + p["gru_bh"]
    ri, zi, ni = np.split(gi, 3, axis=-1)
    rh, zh, nh = np.split(gh, 3, axis=-1)
    r = _sigmoid(ri + rh)
    z = _sigmoid(zi + zh)
    n = np.tanh(ni + r * nh)
    h_new = (1.0 - z) * n + z * h
    return h_new, (x, h, r, z, n, nh)


def _gru_backward(p: dict, cache, d_h_new: np.ndarray, grads: dict) -> np.ndarray:
    """Accumulate weight gradients; return gradient w.r.t. the old hidden."""
    x, h, r, z, n, nh = cache
    dn = d_h_new * (1.0 - z)
    dz = d_h_new * (h - n)
    dh = d_h_new * z
    d_pre_n = dn * (1.0 - n**2)
    dr = d_pre_n * nh
    d_nh = d_pre_n * r
    d_pre_z = dz * z * (1.0 - z)
    d_pre_r = dr * r * (1.0 - r)
    dgi = np.concatenate([d_pre_r, d_pre_z, d_pre_n], axis=-1)
    dgh = np.concatenate([d_pre_r, d_pre_z, d_nh], axis=-1)
    grads["gru_wx"] += dgi.T @ x
    grads["gru_bx"] += dgi.sum(axis=0)
    grads["gru_wh"] += dgh.T @ h
    grads["gru_bh"] += dgh.sum(axis=0)
    return dh + dgh @ p["gru_wh"]


def _heads_forward(p: dict, h: np.ndarray):
    """Four cascaded layers: tanh between layers, linear final map."""
    acts = [h]
    a = h
    for i in range(1, len(HEAD_WIDTHS) + 1):
        a = a @ p[f"fc{i}_w"].T + p[f"fc{i}_b"]
        if i < len(HEAD_WIDTHS):
            a = np.tanh(a)
        acts.append(a)
    return a, acts


def _heads_backward(p: dict, acts, d_out: np.ndarray, grads: dict) -> np.ndarray:
    da = d_out
    for i in range(len(HEAD_WIDTHS), 0, -1):
        if i < len(HEAD_WIDTHS):
            da = da * (1.0 - acts[i] ** 2)
        grads[f"fc{i}_w"] += da.T @ acts[i - 1]
        grads[f"fc{i}_b"] += da.sum(axis=0)
        da = da @ p[f"fc{i}_w"]
    return da


def policy_step(params: PolicyParams, prev_action, hidden: np.ndarray):
    """(mu_amplitude, mu_phase, value, next_hidden) for one input pair."""
    x = np.asarray(prev_action, dtype=float).reshape(1, 2)
    h = np.asarray(hidden, dtype=float).reshape(1, HIDDEN)
    h_new, _ = _gru_forward(params.weights, x, h)
    out, _ = _heads_forward(params.weights, h_new)
    return float(out[0, 0]), float(out[0, 1]), float(out[0, 2]), h_new[0]


def _unroll(params: PolicyParams, inputs: np.ndarray, keep_caches: bool):
    """Teacher-forced forward over a (batch, T, 2) input tensor.

    Returns per-step head outputs (batch, T, 3) and the caches needed
    for backpropagation (None when keep_caches is false).
    """
    p = params.weights
    batch, t_steps, _ = inputs.shape
    h = np.zeros((batch, HIDDEN))
    outs = np.empty((batch, t_steps, 3))
    caches = [] if keep_caches else None
    for t in range(t_steps):
        h, gru_cache = _gru_forward(p, inputs[:, t, :], h)
        out, acts = _heads_forward(p, h)
        outs[:, t, :] = out
        if keep_caches:
            caches.append((gru_cache, acts))
    return outs, caches


def _unroll_backward(params: PolicyParams, caches, d_outs: np.ndarray) -> dict:
    """Backpropagate d(loss)/d(head outputs) through the unrolled policy."""
    p = params.weights
    grads = {k: np.zeros_like(v) for k, v in p.items()}
    dh = np.zeros((d_outs.shape[0], HIDDEN))
    for t in range(d_outs.shape[1] - 1, -1, -1):
        gru_cache, acts = caches[t]
        dh = dh + _heads_backward(p, acts, d_outs[:, t, :], grads)
        dh = _gru_backward(p, gru_cache, dh, grads)
    return grads


@dataclass(frozen=True)
class Episode:
    """One sampled half-pulse trajectory and its terminal reward."""

    actions: np.ndarray  # (T, 2) raw sampled (amplitude, phase)
    log_probs: np.ndarray  # (T,) joint Gaussian log densities
    values: np.ndarray  # (T,) value estimates
    reward: float
    pulse: RFPulse

    def __post_init__(self):
        t = self.actions.shape[0]
        if self.actions.shape != (t, 2) or self.log_probs.shape != (t,) or self.values.shape != (t,):
            raise ValueError("episode sequences must share length T")
        if not np.isfinite(self.reward):
            raise ValueError("episode reward must be finite")


@dataclass(frozen=True)
class PPOConfig:
    """Clipped-surrogate update hyperparameters."""

    clip: float = 0.2
    value_weight: float = 0.5
    entropy_weight: float = 0.01  # constant with fixed stddevs; kept for config parity
    epochs: int = 4
    minibatch: int = 64
    learning_rate: float = 3e-4

    def __post_init__(self):
        if self.clip < 0 or self.learning_rate < 0:
            raise ValueError("clip and learning_rate must be >= 0")
        if self.epochs < 1 or self.minibatch < 1:
            raise ValueError("epochs and minibatch must be >= 1")


@dataclass
class TrainConfig:
    """Settings of one generation campaign."""

    spec: RewardSpec
    t_steps: int = 32
    length: int = 256
    duration: float = 5.12e-3
    buffer: int = 256
    updates_per_run: int = 300
    runs: int = 50
    top_k: int = 256
    ppo: PPOConfig = field(default_factory=PPOConfig)
    sigma_a: float = 0.01
    sigma_p: float = 0.1
    rng_seed: int = 0

    def __post_init__(self):
        if self.t_steps < 2:
            raise ValueError("t_steps must be >= 2")
        if self.length < 2 * self.t_steps:
            raise ValueError("length must be >= 2 * t_steps")
        if self.top_k > self.runs * self.updates_per_run * self.buffer:
            raise ValueError("top_k exceeds the number of generated pulses")
        if self.buffer < 1 or self.updates_per_run < 1 or self.runs < 1:
            raise ValueError("buffer, updates_per_run, runs must be >= 1")
        if self.duration <= 0:
            raise ValueError("duration must be positive")


def assemble_pulse(actions: np.ndarray, cfg: TrainConfig) -> RFPulse:
    """Mirror T action pairs and linearly up-sample to the full length.

    Amplitudes are clamped to [0, MAX_ACTION_AMPLITUDE] and phases
    wrapped to (-pi, pi] before interpolation; sample positions use
    centered grids so the mirror symmetry survives exactly.
    """
    actions = np.asarray(actions, dtype=float)
    amps = np.clip(actions[:, 0], 0.0, MAX_ACTION_AMPLITUDE)
    phases = np.angle(np.exp(1j * actions[:, 1]))
    half = np.stack([amps, phases])
    mirrored = np.concatenate([half, half[:, ::-1]], axis=1)
    n_src = mirrored.shape[1]
    x_src = (np.arange(n_src) + 0.5) / n_src
    x_dst = (np.arange(cfg.length) + 0.5) / cfg.length
    amp = np.interp(x_dst, x_src, mirrored[0])
    phase = np.interp(x_dst, x_src, mirrored[1])
    return RFPulse(amp, phase, cfg.duration / cfg.length)


def rollout_episode(params: PolicyParams, cfg: TrainConfig, rng) -> Episode:
    """Sample one episode; the first input is (0, 0) with a zero hidden state."""
    actions = np.empty((cfg.t_steps, 2))
    log_probs = np.empty(cfg.t_steps)
    values = np.empty(cfg.t_steps)
    hidden = np.zeros(HIDDEN)
    prev = (0.0, 0.0)
    log_norm = -np.log(2.0 * np.pi * params.sigma_a * params.sigma_p)
    for t in range(cfg.t_steps):
        mu_a, mu_p, v, hidden = policy_step(params, prev, hidden)
        a = rng.normal(mu_a, params.sigma_a)
        ph = rng.normal(mu_p, params.sigma_p)
        actions[t] = (a, ph)
        log_probs[t] = log_norm - 0.5 * (
            ((a - mu_a) / params.sigma_a) ** 2 + ((ph - mu_p) / params.sigma_p) ** 2
        )
        values[t] = v
        prev = (a, ph)
    pulse = assemble_pulse(actions, cfg)
    reward = evaluate_reward(pulse, cfg.spec)
    return Episode(actions, log_probs, values, reward, pulse)


def _episode_inputs(episodes, t_steps: int) -> np.ndarray:
    """Teacher-forcing inputs: (0, 0) then each episode's recorded actions."""
    batch = np.zeros((len(episodes), t_steps, 2))
    for i, ep in enumerate(episodes):
        batch[i, 1:] = ep.actions[:-1]
    return batch


def _log_probs_from_outs(params: PolicyParams, outs: np.ndarray, actions: np.ndarray):
    log_norm = -np.log(2.0 * np.pi * params.sigma_a * params.sigma_p)
    za = (actions[:, :, 0] - outs[:, :, 0]) / params.sigma_a
    zp = (actions[:, :, 1] - outs[:, :, 1]) / params.sigma_p
    return log_norm - 0.5 * (za**2 + zp**2), za, zp


@dataclass
class UpdateStats:
    """Diagnostics of one ppo_update call."""

    policy_loss: float
    value_loss: float
    aborted: bool = False


def ppo_update(
    params: PolicyParams,
    buffer,
    cfg: TrainConfig,
    rng,
    optimizer: dict | None = None,
) -> tuple[PolicyParams, UpdateStats]:
    """Clipped-surrogate update over a full episode buffer.

    Advantages are the terminal reward minus the per-step value baseline,
    standardized across the buffer (exactly zero when degenerate).  Old
    log probabilities are recomputed with the batched forward pass before
    any step, so the importance ratio starts at exactly 1.  A non-finite
    loss or gradient aborts the update and returns the old params.

    The optimizer dict (per-weight Adam states) persists across calls
    when passed back in; with a fresh dict the step counts restart.
    """
    ppo = cfg.ppo
    episodes = list(buffer)
    n_ep = len(episodes)
    if n_ep == 0:
        raise ValueError("empty episode buffer")
    inputs = _episode_inputs(episodes, cfg.t_steps)
    actions = np.stack([ep.actions for ep in episodes])
    rewards = np.array([ep.reward for ep in episodes])

    outs_old, _ = _unroll(params, inputs, keep_caches=False)
    old_lp, _, _ = _log_probs_from_outs(params, outs_old, actions)
    adv = rewards[:, None] - outs_old[:, :, 2]
    std = adv.std()
    adv = np.zeros_like(adv) if std < 1e-12 else (adv - adv.mean()) / std

    if optimizer is None:
        optimizer = {}
    for k, w in params.weights.items():
        if k not in optimizer:
            optimizer[k] = Adam(w.shape, ppo.learning_rate)

    new = params.copy()
    n_total = adv.size
    pol_loss = val_loss = np.nan
    for _ in range(ppo.epochs):
        order = rng.permutation(n_ep)
        for start in range(0, n_ep, ppo.minibatch):
            idx = order[start : start + ppo.minibatch]
            outs, caches = _unroll(new, inputs[idx], keep_caches=True)
            lp, za, zp = _log_probs_from_outs(new, outs, actions[idx])
            ratio = np.exp(lp - old_lp[idx])
            a_mb = adv[idx]
            surr1 = ratio * a_mb
            surr2 = np.clip(ratio, 1.0 - ppo.clip, 1.0 + ppo.clip) * a_mb
            pol_loss = -np.sum(np.minimum(surr1, surr2)) / n_total
            v_err = outs[:, :, 2] - rewards[idx, None]
            val_loss = ppo.value_weight * np.sum(v_err**2) / n_total

            # d(loss)/d(head outputs): policy term flows through the
            # unclipped surrogate branch only.
            active = surr1 <= surr2
            d_ratio = np.where(active, -a_mb, 0.0) / n_total
            d_lp = d_ratio * ratio
            d_outs = np.empty_like(outs)
            d_outs[:, :, 0] = d_lp * za / new.sigma_a
            d_outs[:, :, 1] = d_lp * zp / new.sigma_p
            d_outs[:, :, 2] = ppo.value_weight * 2.0 * v_err / n_total
            if not (np.isfinite(pol_loss) and np.isfinite(val_loss) and np.isfinite(d_outs).all()):
                return params, UpdateStats(float(pol_loss), float(val_loss), aborted=True)
            grads = _unroll_backward(new, caches, d_outs)
            if any(not np.isfinite(g).all() for g in grads.values()):
                return params, UpdateStats(float(pol_loss), float(val_loss), aborted=True)
            for k in new.weights:
                # Adam steps along +input; pass -grad to descend the loss.
                new.weights[k] += optimizer[k].update(-grads[k])
    return new, UpdateStats(float(pol_loss), float(val_loss))


def generate_seeds(cfg: TrainConfig) -> tuple[list, list]:
    """Run the full generation campaign and keep the top-k pulses.

    Every run restarts from a fresh Xavier initialization; the top-k heap
    is global across runs and keyed by (reward, -episode index) so equal
    rewards favor the earlier episode.  Returns (pulses, training log);
    the log holds one dict per update with keys update, mean_reward,
    max_reward, policy_loss, value_loss.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    heap = []  # (reward, -episode_index, pulse)
    log = []
    episode_index = 0
    update_index = 0
    for _ in range(cfg.runs):
        params = init_policy(rng, cfg.sigma_a, cfg.sigma_p)
        optimizer = {}
        for _ in range(cfg.updates_per_run):
            episodes = []
            for _ in range(cfg.buffer):
                ep = rollout_episode(params, cfg, rng)
                episodes.append(ep)
                entry = (ep.reward, -episode_index, ep.pulse)
                if len(heap) < cfg.top_k:
                    heapq.heappush(heap, entry)
                elif entry > heap[0]:
                    heapq.heapreplace(heap, entry)
                episode_index += 1
            params, stats = ppo_update(params, episodes, cfg, rng, optimizer)
            rewards = [ep.reward for ep in episodes]
            log.append(
                {
                    "update": update_index,
                    "mean_reward": float(np.mean(rewards)),
                    "max_reward": float(np.max(rewards)),
                    "policy_loss": stats.policy_loss,
                    "value_loss": stats.value_loss,
                }
            )
            update_index += 1
    ranked = sorted(heap, key=lambda e: (-e[0], -e[1]))
    return [pulse for _, _, pulse in ranked], log


def write_training_log_csv(path, log) -> None:
    """Write `update,mean_reward,max_reward,policy_loss,value_loss` rows."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["update", "mean_reward", "max_reward", "policy_loss", "value_loss"])
        for row in log:
            writer.writerow(
                [
                    row["update"],
                    repr(row["mean_reward"]),
                    repr(row["max_reward"]),
                    repr(row["policy_loss"]),
                    repr(row["value_loss"]),
                ]
            )


def save_policy(path, params: PolicyParams) -> None:
    """Persist weights and stddevs to a single .npz container."""
    np.savez(
        path,
        __version__=np.array(1),
        sigma_a=np.array(params.sigma_a),
        sigma_p=np.array(params.sigma_p),
        **params.weights,
    )


def load_policy(path) -> PolicyParams:
    with np.load(path) as data:
        if int(data["__version__"]) != 1:
            raise ValueError("unsupported checkpoint version")
        weights = {
            k: data[k]
            for k in data.files
            if k not in ("__version__", "sigma_a", "sigma_p")
        }
        return PolicyParams(weights, float(data["sigma_a"]), float(data["sigma_p"]))
