"""Command-line entry point.

Every subcommand reads one JSON config file, writes its artifacts into an
output directory, and finishes by writing `manifest.json`.  All files are
written atomically (temp file + rename), the manifest last, so a crashed
run never leaves a manifest pointing at partial outputs.

Exit codes: 0 success, 2 config error, 3 numerical failure,
4 infeasible search.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .adiabatic import (
    AdiabaticParams,
    GridSearchRanges,
    InfeasibleSearchError,
    adiabatic_grid_search,
    adiabatic_pulse,
)
from .analysis import (
    BandSet,
    adiabaticity_series,
    profile_metrics,
    write_adiabaticity_csv,
    write_metrics_csv,
)
from .bloch import EvalGrid, simulate_profile
from .policy import PPOConfig, TrainConfig, generate_seeds, write_training_log_csv
from .pulse import RFPulse, pulse_energy, read_pulse_csv, write_pulse_csv
from .refine import RefineConfig, RefineReport, refine_pulses
from .rewards import (
    MSE_KINDS,
    RewardKind,
    build_reference_profile,
    default_spec,
    stepped_range,
)
from .slr import InfeasibleDesignError, SLRSpec, design_slr

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4


class ConfigError(ValueError):
    """Invalid or missing configuration value."""


# ---------------------------------------------------------------------------
# Small helpers


def _atomic_write(path: str, writer) -> None:
    """Run `writer(tmp_path)` then rename the temp file onto `path`."""
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    os.close(fd)
    try:
        writer(tmp)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _require(cfg: dict, key: str):
    if key not in cfg:
        raise ConfigError(f"missing config field {key!r}")
    return cfg[key]


def _validated(factory):
    """Re-raise constructor validation errors as config errors."""
    try:
        return factory()
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def _grid_from_config(cfg: dict) -> EvalGrid:
    """Build an EvalGrid from `{"b1": [lo, hi, step], "offsets": [lo, hi, step]}`.

    Scalars are accepted for a single-value axis.
    """

    def axis(value, default):
        if value is None:
            return np.asarray(default)
        if isinstance(value, (int, float)):
            return np.array([float(value)])
        lo, hi, step = value
        return stepped_range(float(lo), float(hi), float(step))

    return _validated(
        lambda: EvalGrid(axis(cfg.get("b1"), [1.0]), axis(_require(cfg, "offsets"), None))
    )


def _bands_from_config(cfg: dict) -> BandSet:
    return _validated(lambda: BandSet(
        band_limit=float(_require(cfg, "band_limit")),
        stop_inner=float(_require(cfg, "stop_inner")),
        stop_outer=float(_require(cfg, "stop_outer")),
        pass_limit=cfg.get("pass_limit"),
        region_limit=cfg.get("region_limit"),
        excitation=bool(cfg.get("excitation", True)),
    ))


def _reward_from_config(cfg: dict):
    try:
        kind = RewardKind(_require(cfg, "kind"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    spec = default_spec(kind, eng_unit_scale=cfg.get("eng_unit_scale"))
    if kind in MSE_KINDS:
        ref_path = _require(cfg, "reference_pulse")
        reference = build_reference_profile(kind, read_pulse_csv(ref_path))
        spec = spec.with_reference(reference)
    return spec


def _write_profile_csv(path: str, grid: EvalGrid, profile) -> None:
    def write(tmp):
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["b1_scale", "offset_hz", "mx", "my", "mz"])
            for i, s in enumerate(grid.b1_scales):
                for j, f in enumerate(grid.offsets):
                    writer.writerow(
                        [
                            repr(float(s)),
                            repr(float(f)),
                            repr(float(profile.mx[i, j])),
                            repr(float(profile.my[i, j])),
                            repr(float(profile.mz[i, j])),
                        ]
                    )

    _atomic_write(path, write)


def _write_trace_csv(path: str, report: RefineReport) -> None:
    def write(tmp):
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "best_reward", "mean_reward"])
            for it, (best, mean) in enumerate(zip(report.reward_trace, report.mean_trace)):
                writer.writerow([it, repr(float(best)), repr(float(mean))])

    _atomic_write(path, write)


class Run:
    """Collects outputs/timings and writes the manifest last."""

    def __init__(self, command: str, config: dict, out_dir: str, seed, threads: int):
        self.command = command
        self.config = config
        self.out_dir = out_dir
        self.seed = seed
        self.threads = threads
        self.inputs: list = []
        self.outputs: list = []
        self.started = time.time()
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        full = os.path.join(self.out_dir, name)
        self.outputs.append(name)
        return full

    def write_manifest(self, status: str = "ok", error: str | None = None) -> None:
        canonical = json.dumps(self.config, sort_keys=True).encode()
        manifest = {
            "command": self.command,
            "config_hash": hashlib.sha256(canonical).hexdigest(),
            "seed": self.seed,
            "threads": self.threads,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "elapsed_seconds": time.time() - self.started,
            "versions": {
                "pulsekit": __version__,
                "numpy": np.__version__,
                "python": sys.version.split()[0],
            },
            "status": status,
        }
        if error is not None:
            manifest["error"] = error
        _atomic_write(
            os.path.join(self.out_dir, "manifest.json"),
            lambda tmp: open(tmp, "w").write(json.dumps(manifest, indent=2) + "\n"),
        )


# ---------------------------------------------------------------------------
# Subcommands


def _cmd_design_slr(cfg: dict, run: Run, args) -> int:
    spec = _validated(lambda: SLRSpec(
        flip_angle=float(_require(cfg, "flip_angle")),
        duration=float(_require(cfg, "duration")),
        n_steps=int(_require(cfg, "n_steps")),
        bandwidth=float(_require(cfg, "bandwidth")),
        max_passband_ripple=float(cfg.get("max_passband_ripple", 0.01)),
        max_stopband_ripple=float(cfg.get("max_stopband_ripple", 0.01)),
        filter=cfg.get("filter", "least-squares"),
    ))
    pulse = design_slr(spec)
    _atomic_write(run.path("pulse.csv"), lambda tmp: write_pulse_csv(tmp, pulse))
    return EXIT_OK


def _cmd_design_adiabatic(cfg: dict, run: Run, args) -> int:
    params = _validated(lambda: AdiabaticParams(
        shape=_require(cfg, "shape"),
        omega1_max=float(_require(cfg, "omega1_max")),
        beta=float(_require(cfg, "beta")),
        a=float(_require(cfg, "a")),
        duration=float(_require(cfg, "duration")),
        n_steps=int(_require(cfg, "n_steps")),
    ))
    pulse = adiabatic_pulse(params)
    _atomic_write(run.path("pulse.csv"), lambda tmp: write_pulse_csv(tmp, pulse))
    return EXIT_OK


def _cmd_grid_search(cfg: dict, run: Run, args) -> int:
    target = _grid_from_config(_require(cfg, "target"))
    ranges = None
    if "ranges" in cfg:
        block = cfg["ranges"]
        ranges = _validated(
            lambda: GridSearchRanges(
                omega1_max=np.asarray(_require(block, "omega1_max"), dtype=float),
                beta=np.asarray(_require(block, "beta"), dtype=float),
                a=np.asarray(_require(block, "a"), dtype=float),
                shapes=tuple(block.get("shapes", ("hs", "hanning", "gauss", "lorentz"))),
            )
        )
    elif "points_per_axis" in cfg:
        ranges = GridSearchRanges.default(int(cfg["points_per_axis"]))
    rows = []
    params, pulse = adiabatic_grid_search(
        target,
        float(_require(cfg, "threshold")),
        ranges=ranges,
        duration=float(cfg.get("duration", 8e-3)),
        n_steps=int(cfg.get("n_steps", 256)),
        log=rows.append,
    )

    def write_log(tmp):
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["shape", "omega1_max_g", "beta_rad_s", "a_hz", "mean_mz", "eng"])
            for row in rows:
                writer.writerow(
                    [
                        row["shape"],
                        repr(row["omega1_max_g"]),
                        repr(row["beta_rad_s"]),
                        repr(row["a_hz"]),
                        repr(row["mean_mz"]),
                        repr(row["eng"]),
                    ]
                )

    _atomic_write(run.path("search_log.csv"), write_log)
    winner = {
        "shape": params.shape,
        "omega1_max": params.omega1_max,
        "beta": params.beta,
        "a": params.a,
        "duration": params.duration,
        "n_steps": params.n_steps,
        "eng": pulse_energy(pulse),
    }
    _atomic_write(
        run.path("winner.json"),
        lambda tmp: open(tmp, "w").write(json.dumps(winner, indent=2) + "\n"),
    )
    _atomic_write(run.path("pulse.csv"), lambda tmp: write_pulse_csv(tmp, pulse))
    return EXIT_OK


def _cmd_simulate(cfg: dict, run: Run, args) -> int:
    pulse_path = _require(cfg, "pulse")
    run.inputs.append(pulse_path)
    pulse = read_pulse_csv(pulse_path)
    grid = _grid_from_config(_require(cfg, "grid"))
    profile = simulate_profile(pulse, grid)
    _write_profile_csv(run.path("profile.csv"), grid, profile)
    return EXIT_OK


def _cmd_analyze(cfg: dict, run: Run, args) -> int:
    pulse_path = _require(cfg, "pulse")
    run.inputs.append(pulse_path)
    pulse = read_pulse_csv(pulse_path)
    grid = _grid_from_config(_require(cfg, "grid"))
    bands = _bands_from_config(_require(cfg, "bands"))
    metrics = profile_metrics(simulate_profile(pulse, grid), grid, bands, pulse)
    pulse_id = cfg.get("pulse_id", os.path.basename(pulse_path))
    _atomic_write(
        run.path("metrics.csv"), lambda tmp: write_metrics_csv(tmp, {pulse_id: metrics})
    )
    adia = cfg.get("adiabaticity", {})
    k = adiabaticity_series(
        pulse, float(adia.get("b1_scale", 1.0)), float(adia.get("offset", 0.0))
    )
    _atomic_write(
        run.path("adiabaticity.csv"), lambda tmp: write_adiabaticity_csv(tmp, pulse, k)
    )
    return EXIT_OK


def _cmd_compare(cfg: dict, run: Run, args) -> int:
    ref_path = _require(cfg, "reference")
    cand_path = _require(cfg, "candidate")
    run.inputs += [ref_path, cand_path]
    reference = read_pulse_csv(ref_path)
    candidate = read_pulse_csv(cand_path)
    grid = _grid_from_config(_require(cfg, "grid"))
    bands = _bands_from_config(_require(cfg, "bands"))
    m_ref = profile_metrics(simulate_profile(reference, grid), grid, bands, reference)
    m_cand = profile_metrics(simulate_profile(candidate, grid), grid, bands, candidate)

    def write(tmp):
        with open(tmp, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["metric", "reference", "candidate", "delta"])
            for name in (
                "mean_transverse_over_bw",
                "mean_mz_over_bw",
                "max_passband_ripple",
                "max_stopband_ripple",
                "fwhm_hz",
                "mean_mz_over_region",
                "eng",
            ):
                a, b = getattr(m_ref, name), getattr(m_cand, name)
                writer.writerow([name, repr(a), repr(b), repr(b - a)])
            reduction = (1.0 - m_cand.eng / m_ref.eng) * 100.0
            writer.writerow(["eng_reduction_percent", "", "", repr(reduction)])

    _atomic_write(run.path("compare.csv"), write)
    return EXIT_OK


def _train_config(cfg: dict, args) -> TrainConfig:
    spec = _reward_from_config(_require(cfg, "reward"))
    ppo_cfg = cfg.get("ppo", {})
    seed = cfg.get("rng_seed", 0) if args.seed is None else args.seed
    return _validated(lambda: TrainConfig(
        spec=spec,
        t_steps=int(cfg.get("t_steps", 32)),
        length=int(cfg.get("length", 256)),
        duration=float(cfg.get("duration", 5.12e-3)),
        buffer=int(cfg.get("buffer", 256)),
        updates_per_run=int(cfg.get("updates_per_run", 300)),
        runs=int(cfg.get("runs", 50)),
        top_k=int(cfg.get("top_k", 256)),
        ppo=PPOConfig(
            clip=float(ppo_cfg.get("clip", 0.2)),
            value_weight=float(ppo_cfg.get("value_weight", 0.5)),
            entropy_weight=float(ppo_cfg.get("entropy_weight", 0.01)),
            epochs=int(ppo_cfg.get("epochs", 4)),
            minibatch=int(ppo_cfg.get("minibatch", 64)),
            learning_rate=float(ppo_cfg.get("learning_rate", 3e-4)),
        ),
        sigma_a=float(cfg.get("sigma_a", 0.01)),
        sigma_p=float(cfg.get("sigma_p", 0.1)),
        rng_seed=int(seed),
    ))


def _run_generate(cfg: dict, run: Run, args) -> list:
    tcfg = _train_config(cfg, args)
    pulses, log = generate_seeds(tcfg)
    _atomic_write(run.path("training_log.csv"), lambda tmp: write_training_log_csv(tmp, log))
    os.makedirs(os.path.join(run.out_dir, "seeds"), exist_ok=True)
    for i, pulse in enumerate(pulses):
        _atomic_write(
            run.path(os.path.join("seeds", f"seed_{i:04d}.csv")),
            lambda tmp, p=pulse: write_pulse_csv(tmp, p),
        )
    return pulses


def _refine_config(cfg: dict, args) -> RefineConfig:
    spec = _reward_from_config(_require(cfg, "reward"))
    return _validated(lambda: RefineConfig(
        spec=spec,
        step_size=float(cfg.get("step_size", 0.01)),
        iterations=int(cfg.get("iterations", 10_000)),
        parameterization=cfg.get("parameterization", "amplitude-phase"),
        snapshot_every=int(
            args.snapshot_every if args.snapshot_every is not None else cfg.get("snapshot_every", 0)
        ),
        max_amplitude=cfg.get("max_amplitude"),
    ))


def _run_refine(cfg: dict, run: Run, args, seeds: list) -> RefineReport:
    rcfg = _refine_config(cfg, args)
    if args.threads > 1 and len(seeds) > 1:
        # Seeds refine independently, so partitioning across a pool is
        # exact for the best pulse; the mean trace is re-weighted by
        # chunk size (exact while no seed aborts).
        chunks = [seeds[i :: args.threads] for i in range(args.threads)]
        chunks = [c for c in chunks if c]
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            reports = list(pool.map(lambda c: refine_pulses(c, rcfg), chunks))
        best = max(reports, key=lambda r: r.best_reward)
        length = min(r.reward_trace.size for r in reports)
        trace = np.max([r.reward_trace[:length] for r in reports], axis=0)
        np.maximum.accumulate(trace, out=trace)
        weights = np.array([len(c) for c in chunks], dtype=float)
        mean = (
            np.sum([w * r.mean_trace[:length] for w, r in zip(weights, reports)], axis=0)
            / weights.sum()
        )
        report = RefineReport(
            best_pulse=best.best_pulse,
            best_reward=best.best_reward,
            reward_trace=trace,
            mean_trace=mean,
            final_rewards=[r for rep in reports for r in rep.final_rewards],
            snapshots=best.snapshots,
        )
    else:
        report = refine_pulses(seeds, rcfg)
    _atomic_write(run.path("best_pulse.csv"), lambda tmp: write_pulse_csv(tmp, report.best_pulse))
    _write_trace_csv(run.path("trace.csv"), report)
    for iteration, pulse in report.snapshots:
        _atomic_write(
            run.path(f"snapshot_{iteration:06d}.csv"),
            lambda tmp, p=pulse: write_pulse_csv(tmp, p),
        )
    return report


def _cmd_generate(cfg: dict, run: Run, args) -> int:
    _run_generate(cfg, run, args)
    return EXIT_OK


def _cmd_refine(cfg: dict, run: Run, args) -> int:
    seed_paths = _require(cfg, "seeds")
    if not seed_paths:
        raise ConfigError("refine needs at least one seed pulse")
    run.inputs += list(seed_paths)
    seeds = [read_pulse_csv(p) for p in seed_paths]
    _run_refine(cfg, run, args, seeds)
    return EXIT_OK


def _cmd_pipeline(cfg: dict, run: Run, args) -> int:
    seeds = _run_generate(_require(cfg, "generate"), run, args)
    refine_cfg = dict(_require(cfg, "refine"))
    refine_cfg.setdefault("reward", _require(cfg, "generate")["reward"])
    _run_refine(refine_cfg, run, args, seeds)
    return EXIT_OK


def _cmd_ablate(cfg: dict, run: Run, args) -> int:
    mode = _require(cfg, "mode")
    if mode == "skip-generation":
        seed = cfg.get("rng_seed", 0) if args.seed is None else args.seed
        rng = np.random.default_rng(int(seed))
        n_seeds = int(cfg.get("n_seeds", 16))
        length = int(cfg.get("length", 256))
        duration = float(cfg.get("duration", 5.12e-3))
        dt = duration / length
        seeds = [
            RFPulse(
                rng.uniform(0.0, 0.2, length),
                rng.uniform(-np.pi, np.pi, length),
                dt,
            )
            for _ in range(n_seeds)
        ]
        os.makedirs(os.path.join(run.out_dir, "seeds"), exist_ok=True)
        for i, pulse in enumerate(seeds):
            _atomic_write(
                run.path(os.path.join("seeds", f"seed_{i:04d}.csv")),
                lambda tmp, p=pulse: write_pulse_csv(tmp, p),
            )
        _run_refine(_require(cfg, "refine"), run, args, seeds)
        return EXIT_OK
    if mode == "skip-refinement":
        _run_generate(_require(cfg, "generate"), run, args)
        return EXIT_OK
    raise ConfigError(f"unknown ablation mode {mode!r}")


COMMANDS = {
    "design-slr": _cmd_design_slr,
    "design-adiabatic": _cmd_design_adiabatic,
    "grid-search": _cmd_grid_search,
    "generate": _cmd_generate,
    "refine": _cmd_refine,
    "pipeline": _cmd_pipeline,
    "ablate": _cmd_ablate,
    "simulate": _cmd_simulate,
    "analyze": _cmd_analyze,
    "compare": _cmd_compare,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="pulsekit", description="RF pulse design, refinement, and analysis"
    )
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="path to a JSON config file")
    parser.add_argument(
        "--out",
        default=os.environ.get("PULSEKIT_OUT", "out"),
        help="output directory (env PULSEKIT_OUT)",
    )
    parser.add_argument(
        "--threads",
        type=int,
        default=int(os.environ.get("PULSEKIT_THREADS", "1")),
        help="worker pool size; 1 guarantees byte-identical reruns",
    )
    parser.add_argument("--seed", type=int, default=None, help="override the config rng seed")
    parser.add_argument(
        "--snapshot-every", type=int, default=None, help="refinement snapshot interval"
    )
    args = parser.parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG

    try:
        with open(args.config) as fh:
            config = json.load(fh)
        if not isinstance(config, dict):
            raise ConfigError("config root must be a JSON object")
    except (OSError, json.JSONDecodeError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    run = Run(args.command, config, args.out, args.seed, args.threads)
    try:
        status = COMMANDS[args.command](config, run, args)
    except (ConfigError, KeyError, TypeError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        run.write_manifest(status="config-error", error=str(exc))
        return EXIT_CONFIG
    except InfeasibleSearchError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        run.write_manifest(status="infeasible", error=str(exc))
        return EXIT_INFEASIBLE
    except (InfeasibleDesignError, FloatingPointError, np.linalg.LinAlgError, ValueError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        run.write_manifest(status="failed", error=str(exc))
        return EXIT_NUMERICAL
    run.write_manifest()
    return status


if __name__ == "__main__":
    sys.exit(main())
