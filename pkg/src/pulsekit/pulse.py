"""RF pulse container and plain-text I/O.

A pulse is stored as non-negative amplitude samples (Gauss) plus phase
samples (radians) on a uniform time grid.  Sign changes of the B1 field
are carried by the phase, never by the amplitude.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Proton gyromagnetic ratio, Hz per Gauss.
GAMMA_HZ_PER_G = 4257.6


@dataclass(frozen=True)
class RFPulse:
    """Complex B1 waveform sampled at a uniform time step.

    Attributes:
        amplitude: per-step |B1| in Gauss, all entries >= 0.
        phase: per-step phase in radians.
        dt: time step in seconds.
    """

    amplitude: np.ndarray
    phase: np.ndarray
    dt: float

    def __post_init__(self):
        amp = np.asarray(self.amplitude, dtype=float)
        ph = np.asarray(self.phase, dtype=float)
        object.__setattr__(self, "amplitude", amp)
        object.__setattr__(self, "phase", ph)
        if amp.ndim != 1 or ph.ndim != 1 or amp.shape != ph.shape:
            raise ValueError("amplitude and phase must be 1-D and equally long")
        if amp.size < 1:
            raise ValueError("pulse must contain at least one sample")
        if not (np.isfinite(amp).all() and np.isfinite(ph).all()):
            raise ValueError("pulse samples must be finite")
        if (amp < 0).any():
            raise ValueError("amplitude must be non-negative (sign lives in phase)")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError("dt must be a positive real")

    def __len__(self) -> int:
        return self.amplitude.size

    @property
    def duration(self) -> float:
        """Total pulse length in seconds."""
        return len(self) * self.dt

    @property
    def b1(self) -> np.ndarray:
        """Complex envelope amplitude * exp(i * phase), in Gauss."""
        return self.amplitude * np.exp(1j * self.phase)


def pulse_energy(pulse: RFPulse) -> float:
    """Integrated |B1|^2 over the pulse, in Gauss^2 * second."""
    return float(np.sum(pulse.amplitude**2) * pulse.dt)


def zero_pulse(n: int, dt: float) -> RFPulse:
    """All-zero pulse of n steps."""
    return RFPulse(np.zeros(n), np.zeros(n), dt)


def write_pulse_csv(path, pulse: RFPulse, extra: dict | None = None) -> None:
    """Write a pulse as CSV with a `# dt_seconds=` metadata comment.

    Args:
        extra: optional mapping of column name -> per-step array, appended
            after the standard columns (used for gradient dumps).
    """
    extra = extra or {}
    cols = ["index", "amplitude_gauss", "phase_rad"] + list(extra)
    with open(path, "w") as fh:
        fh.write(f"# dt_seconds={pulse.dt!r}\n")
        fh.write(",".join(cols) + "\n")
        for j in range(len(pulse)):
            row = [str(j), repr(float(pulse.amplitude[j])), repr(float(pulse.phase[j]))]
            row += [repr(float(extra[name][j])) for name in extra]
            fh.write(",".join(row) + "\n")


def read_pulse_csv(path) -> RFPulse:
    """Read a pulse written by :func:`write_pulse_csv`."""
    dt = None
    amps, phases = [], []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, _, value = line.lstrip("# ").partition("=")
                if key.strip() == "dt_seconds":
                    dt = float(value)
                continue
            if line.startswith("index"):
                continue
            parts = line.split(",")
            amps.append(float(parts[1]))
            phases.append(float(parts[2]))
    if dt is None:
        raise ValueError(f"{path}: missing '# dt_seconds=' metadata line")
    return RFPulse(np.array(amps), np.array(phases), dt)
