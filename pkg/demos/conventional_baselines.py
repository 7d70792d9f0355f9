"""Design the conventional baseline pulses and print their profile metrics.

Runs in a few seconds:
  python demos/conventional_baselines.py
"""

import numpy as np

from pulsekit.adiabatic import AdiabaticParams, adiabatic_pulse
from pulsekit.analysis import BandSet, adiabaticity_series, profile_metrics
from pulsekit.bloch import EvalGrid, simulate_profile
from pulsekit.pulse import pulse_energy
from pulsekit.slr import SLRSpec, design_slr


def show(title, metrics):
    print(f"\n{title}")
    print(f"  mean |Mxy| in band : {metrics.mean_transverse_over_bw:+.4f}")
    print(f"  mean Mz in band    : {metrics.mean_mz_over_bw:+.4f}")
    print(f"  passband ripple    : {100 * metrics.max_passband_ripple:.2f} %")
    print(f"  stopband ripple    : {100 * metrics.max_stopband_ripple:.2f} %")
    print(f"  FWHM               : {metrics.fwhm_hz:.0f} Hz")
    print(f"  ENG                : {metrics.eng:.3e} G^2*s")


def main():
    # 90-degree slice-selective excitation, 2 kHz slice.
    exc = design_slr(SLRSpec(90.0, 2.56e-3, 256, 2000.0))
    grid = EvalGrid(np.array([1.0]), np.linspace(-8000.0, 8000.0, 801))
    m = profile_metrics(
        simulate_profile(exc, grid),
        grid,
        BandSet(1285.0, 1614.0, 8000.0, pass_limit=1000.0),
        pulse=exc,
    )
    show("SLR excitation (90 deg, 2.56 ms, 2 kHz)", m)

    # 180-degree slice-selective inversion, 500 Hz slice.
    inv = design_slr(SLRSpec(180.0, 5.12e-3, 256, 500.0, filter="equi-ripple"))
    grid = EvalGrid(np.array([1.0]), np.linspace(-4000.0, 4000.0, 801))
    m = profile_metrics(
        simulate_profile(inv, grid),
        grid,
        BandSet(418.0, 801.0, 4000.0, pass_limit=250.0, excitation=False),
        pulse=inv,
    )
    show("SLR inversion (180 deg, 5.12 ms, 500 Hz)", m)

    # Hyperbolic-secant adiabatic inversion.
    hs = adiabatic_pulse(AdiabaticParams("hs", 0.082, 3600.0, 340.0, 8e-3, 256))
    region = EvalGrid(np.arange(0.5, 2.001, 0.03), np.arange(-200.0, 201.0, 8.0))
    mz = simulate_profile(hs, region).mz
    k = adiabaticity_series(hs)
    print("\nHS adiabatic inversion (82 mG, 3600 rad/s, 340 Hz, 8 ms)")
    print(f"  mean Mz over B1 0.5-2.0 x +-200 Hz : {mz.mean():+.4f}")
    print(f"  ENG                                : {pulse_energy(hs):.3e} G^2*s")
    print(f"  min adiabaticity K                 : {np.min(k):.2f}")


if __name__ == "__main__":
    main()
