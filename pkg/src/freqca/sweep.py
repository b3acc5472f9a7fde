"""Grid evaluation of caching policies over one model and noise seed.

Every grid cell (transform, low order, high order, interval) runs the same
sampling problem against a shared ground-truth trajectory; the per-interval
winner by mean reconstruction error is marked in the output.  Cells execute
on a thread pool whose width is capped by the FREQCA_THREADS environment
variable, and each cell builds its own model instance so no state is shared
between threads.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

from .cache import build_plan
from .config import SweepGrid
from .engine import PolicyConfig, _as_host, run_full, run_policy
from .toydit import ToyDitConfig, init_model

# Two cells tie when their mean errors differ by less than this floor (or
# one part in 1e9 relative); the winner is then the simpler policy.
TIE_ABS = 1e-12
TIE_REL = 1e-9


def _thread_cap(n_cells: int) -> int:
    raw = os.environ.get("FREQCA_THREADS", "").strip()
    if raw:
        try:
            cap = int(raw)
        except ValueError:
            raise ValueError(f"FREQCA_THREADS must be an integer, got {raw!r}") from None
        if cap < 1:
            raise ValueError(f"FREQCA_THREADS must be >= 1, got {cap}")
    else:
        cap = os.cpu_count() or 1
    return max(1, min(cap, n_cells))


def run_sweep(
    model_cfg: ToyDitConfig,
    steps: int,
    noise_seed: int,
    grid: SweepGrid,
    host_factory=None,
) -> dict:
    """Evaluate every grid cell and mark the best policy per interval.

    Cells normally run the toy model described by ``model_cfg``; passing
    ``host_factory`` (a zero-argument callable returning a fresh host per
    cell) sweeps an arbitrary host instead.  Ties in mean error break toward
    the lower (low_order, high_order) pair, then toward the transform listed
    first in the grid.  The returned dict matches the sweep report schema.
    """
    if host_factory is None:
        def host_factory():
            return init_model(model_cfg)

    cells = []
    for transform in grid.transforms:
        for low in grid.low_orders:
            for high in grid.high_orders:
                for interval in grid.intervals:
                    cells.append((transform, low, high, interval))

    truth = run_full(host_factory(), steps, noise_seed)

    def evaluate(cell):
        transform, low, high, interval = cell
        plan = build_plan(steps, interval)
        policy = PolicyConfig(interval, low, high, grid.cutoff, transform)
        report = run_policy(host_factory(), plan, policy, noise_seed, truth=truth)
        s = report.summary
        return {
            "transform": transform.value,
            "low_order": low,
            "high_order": high,
            "interval": interval,
            "cutoff": grid.cutoff,
            "mean_mse": s.mean_mse,
            "final_state_mse": s.final_state_mse,
            "speedup": s.speedup,
            "total_flops": s.total_flops,
            "peak_cache_units": s.peak_cache_units,
            "best_for_interval": False,
        }

    with ThreadPoolExecutor(max_workers=_thread_cap(len(cells))) as pool:
        results = list(pool.map(evaluate, cells))

    transform_rank = {t.value: i for i, t in enumerate(grid.transforms)}
    best_by_interval = {}
    for interval in grid.intervals:
        group = [(i, c) for i, c in enumerate(results) if c["interval"] == interval]
        low_mse = min(c["mean_mse"] for _, c in group)
        tied = [
            (i, c)
            for i, c in group
            if c["mean_mse"] - low_mse <= max(TIE_ABS, TIE_REL * abs(low_mse))
        ]
        win_idx, winner = min(
            tied,
            key=lambda item: (
                item[1]["low_order"],
                item[1]["high_order"],
                transform_rank[item[1]["transform"]],
                item[0],
            ),
        )
        results[win_idx]["best_for_interval"] = True
        best_by_interval[str(interval)] = {
            "transform": winner["transform"],
            "low_order": winner["low_order"],
            "high_order": winner["high_order"],
            "mean_mse": winner["mean_mse"],
        }

    if model_cfg is not None:
        model_echo = asdict(model_cfg)
    else:
        model_echo = _as_host(host_factory()).config_echo()
    return {
        "grid": {
            "transforms": [t.value for t in grid.transforms],
            "low_orders": list(grid.low_orders),
            "high_orders": list(grid.high_orders),
            "intervals": list(grid.intervals),
            "cutoff": grid.cutoff,
            "model": model_echo,
            "sampler": {"steps": steps, "noise_seed": noise_seed},
        },
        "cells": results,
        "best_by_interval": best_by_interval,
    }
