"""Command line interface.

Subcommands: ``run`` (cached sampling with optional baselines), ``analyze``
(band dynamics of a recorded trajectory), ``sweep`` (policy grid), and
``dump`` (record a ground-truth trajectory to a binary file).  Exit code 0
on success, 2 for configuration problems, 3 for runtime failures.
"""

import argparse
import os
import sys

from .analyze import frequency_dynamics
from .cache import build_plan
from .config import load_grid_config, load_run_config
from .engine import baseline_policy, run_full, run_layerwise_baseline, run_policy
from .errors import ConfigError, FreqcaError
from .frequency import TransformKind
from .reports import write_dynamics_report, write_run_report, write_sweep_report
from .sweep import run_sweep
from .toydit import config_hash, dump_trajectory, init_model, load_trajectory

BASELINES = ("fora", "taylor", "layerwise")


def _parse_intervals(text: str):
    text = text.strip()
    try:
        if ".." in text:
            lo_s, hi_s = text.split("..", 1)
            lo, hi = int(lo_s), int(hi_s)
            if hi < lo:
                raise ValueError
            return tuple(range(lo, hi + 1))
        if "," in text:
            return tuple(int(p) for p in text.split(","))
        return (int(text),)
    except ValueError:
        raise ConfigError(
            f"--intervals must look like '1..10', '1,2,5', or '4', got {text!r}"
        ) from None


def _summary_line(label: str, summary) -> str:
    return (
        f"{label}: mean_mse={summary.mean_mse:.6e} "
        f"final_state_mse={summary.final_state_mse:.6e} "
        f"speedup={summary.speedup:.3f} total_flops={summary.total_flops}"
    )


def cmd_run(args) -> int:
    cfg = load_run_config(args.config)
    os.makedirs(args.out, exist_ok=True)
    model = init_model(cfg.model)
    plan = build_plan(cfg.sampler.steps, cfg.policy.interval)
    truth = run_full(model, cfg.sampler.steps, cfg.sampler.noise_seed)

    report = run_policy(model, plan, cfg.policy, cfg.sampler.noise_seed, truth=truth)
    write_run_report(
        report,
        os.path.join(args.out, "run_freqca.json"),
        os.path.join(args.out, "run_freqca.csv"),
    )
    print(_summary_line("freqca", report.summary))

    for name in args.baseline or ():
        if name == "layerwise":
            base = run_layerwise_baseline(
                model, plan, cfg.policy.high_order, cfg.sampler.noise_seed, truth=truth
            )
        else:
            base = run_policy(
                model,
                plan,
                baseline_policy(name, cfg.policy.interval),
                cfg.sampler.noise_seed,
                truth=truth,
                label=name,
            )
        write_run_report(
            base,
            os.path.join(args.out, f"run_{name}.json"),
            os.path.join(args.out, f"run_{name}.csv"),
        )
        print(_summary_line(name, base.summary))
    return 0


def cmd_analyze(args) -> int:
    try:
        outputs, _header = load_trajectory(args.traj)
    except OSError as exc:
        raise ConfigError(f"cannot read trajectory {args.traj}: {exc}") from exc
    intervals = _parse_intervals(args.intervals)
    transform = TransformKind(args.transform)
    report = frequency_dynamics(outputs, intervals, args.cutoff, transform)
    os.makedirs(args.out, exist_ok=True)
    write_dynamics_report(
        report,
        os.path.join(args.out, "dynamics.json"),
        os.path.join(args.out, "dynamics.csv"),
    )
    top = max(intervals)
    print(
        f"steps={report.steps} transform={transform.value} cutoff={args.cutoff} "
        f"interval={top}: low_mean={report.low_mean[top]:.4f} "
        f"high_mean={report.high_mean[top]:.4f}"
    )
    return 0


def cmd_sweep(args) -> int:
    gc = load_grid_config(args.grid)
    try:
        doc = run_sweep(gc.model, gc.sampler.steps, gc.sampler.noise_seed, gc.grid)
    except ValueError as exc:
        # Bad FREQCA_THREADS values surface here; treat as configuration.
        raise ConfigError(str(exc)) from exc
    os.makedirs(args.out, exist_ok=True)
    write_sweep_report(
        doc, os.path.join(args.out, "sweep.json"), os.path.join(args.out, "sweep.csv")
    )
    for interval, best in sorted(doc["best_by_interval"].items(), key=lambda kv: int(kv[0])):
        print(
            f"interval={interval}: best=({best['low_order']}, {best['high_order']}) "
            f"transform={best['transform']} mean_mse={best['mean_mse']:.6e}"
        )
    return 0


def cmd_dump(args) -> int:
    cfg = load_run_config(args.config)
    model = init_model(cfg.model)
    truth = run_full(model, cfg.sampler.steps, cfg.sampler.noise_seed)
    parent = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(parent, exist_ok=True)
    dump_trajectory(args.out, truth.outputs, cfg.sampler.noise_seed, config_hash(cfg.model))
    print(
        f"wrote {args.out}: steps={truth.outputs.shape[0]} "
        f"tokens={truth.outputs.shape[1]} channels={truth.outputs.shape[2]}"
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqca",
        description="Frequency-split feature caching on a toy denoiser",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="cached sampling run with optional baselines")
    p_run.add_argument("--config", required=True, help="run configuration JSON")
    p_run.add_argument(
        "--baseline",
        action="append",
        choices=BASELINES,
        help="also run a baseline (repeatable)",
    )
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.set_defaults(func=cmd_run)

    p_an = sub.add_parser("analyze", help="band dynamics of a recorded trajectory")
    p_an.add_argument("--traj", required=True, help="trajectory file from 'dump'")
    p_an.add_argument("--intervals", default="1..10", help="e.g. '1..10' or '1,2,5'")
    p_an.add_argument("--cutoff", type=float, default=0.25)
    p_an.add_argument("--transform", choices=["dct", "fft", "none"], default="dct")
    p_an.add_argument("--out", required=True, help="output directory")
    p_an.set_defaults(func=cmd_analyze)

    p_sw = sub.add_parser("sweep", help="evaluate a policy grid")
    p_sw.add_argument("--grid", required=True, help="grid configuration JSON")
    p_sw.add_argument("--out", required=True, help="output directory")
    p_sw.set_defaults(func=cmd_sweep)

    p_du = sub.add_parser("dump", help="record a ground-truth trajectory")
    p_du.add_argument("--config", required=True, help="run configuration JSON")
    p_du.add_argument("--out", required=True, help="output trajectory file")
    p_du.set_defaults(func=cmd_dump)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FreqcaError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
