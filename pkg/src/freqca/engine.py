"""Cached sampling runs: policy execution, baselines, and run reports.

A run integrates the sampler with the network evaluated only on scheduled
full steps; between them the cache reconstructs the cumulative feature.  For
every step the report records the error of the fed-forward feature against
what the full network would have produced at the same state, so full steps
score exactly zero and predicted steps measure pure reconstruction error.
The run's final state is additionally compared against a ground-truth run
that evaluates the network at every step from the same noise seed.
"""

from dataclasses import asdict, dataclass

import numpy as np

from .cache import (
    CrfCache,
    SchedulerPlan,
    StepKind,
    layerwise_predict_macs,
    reconstruct_macs,
    split_macs,
)
from .errors import ShapeMismatchError
from .frequency import TransformKind
from .numerics import cosine_similarity
from .predictor import MAX_ORDER, fit_hermite, predict
from .toydit import SampleResult, ToyDit, forward_full, model_forward_macs


@dataclass(frozen=True)
class PolicyConfig:
    """Caching policy: schedule interval, band orders, and the split."""

    interval: int = 5
    low_order: int = 0
    high_order: int = 2
    cutoff: float = 0.25
    transform: TransformKind = TransformKind.DCT


class ToyDitHost:
    """Adapter exposing a toy network to the runner."""

    def __init__(self, model: ToyDit):
        self.model = model

    @property
    def tokens(self) -> int:
        return self.model.config.tokens

    @property
    def channels(self) -> int:
        return self.model.config.channels

    @property
    def full_macs(self) -> int:
        return model_forward_macs(self.model.config)

    def output(self, x: np.ndarray, t: float, step: int) -> np.ndarray:
        return forward_full(self.model, x, t).output

    def config_echo(self) -> dict:
        return asdict(self.model.config)


class TrajectoryHost:
    """Replays a precomputed step-major output sequence as the network.

    The output at step k is fixed in advance and independent of the state,
    which makes reconstruction errors exactly analyzable.
    """

    def __init__(self, outputs: np.ndarray):
        arr = np.asarray(outputs, dtype=np.float64)
        if arr.ndim != 3:
            raise ShapeMismatchError(f"trajectory must be 3-D, got shape {arr.shape}")
        self.outputs = arr

    @property
    def tokens(self) -> int:
        return self.outputs.shape[1]

    @property
    def channels(self) -> int:
        return self.outputs.shape[2]

    @property
    def full_macs(self) -> int:
        return 0

    def output(self, x: np.ndarray, t: float, step: int) -> np.ndarray:
        return self.outputs[step]

    def config_echo(self) -> dict:
        return {
            "source": "trajectory",
            "steps": int(self.outputs.shape[0]),
            "tokens": self.tokens,
            "channels": self.channels,
        }


def _as_host(model_or_host):
    if isinstance(model_or_host, ToyDit):
        return ToyDitHost(model_or_host)
    return model_or_host


@dataclass(frozen=True)
class StepRecord:
    """What happened at one sampling step."""

    step: int
    kind: str  # "full" or "predicted"
    mse_vs_truth: float
    cosine_vs_truth: float
    effective_low_order: object  # int on predicted steps, None on full steps
    effective_high_order: object
    flops: int
    cache_units: int


@dataclass(frozen=True)
class RunSummary:
    final_state_mse: float
    mean_mse: float  # over predicted steps; 0.0 when the plan has none
    mean_cosine: float
    total_flops: int
    full_cost: int
    pred_cost: int
    speedup: float
    full_steps: int
    predicted_steps: int
    peak_cache_units: int


@dataclass(frozen=True)
class RunReport:
    label: str
    noise_seed: int
    config: dict
    per_step: tuple
    summary: RunSummary
    final_state: np.ndarray


def _safe_cosine(a: np.ndarray, b: np.ndarray) -> float:
    # Two zero tensors agree perfectly for reporting purposes.
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    return cosine_similarity(a, b)


def initial_state(host, noise_seed: int) -> np.ndarray:
    host = _as_host(host)
    rng = np.random.default_rng(noise_seed)
    return rng.standard_normal((host.tokens, host.channels))


def run_full(host, steps: int, noise_seed: int) -> SampleResult:
    """Ground-truth Euler run evaluating the host at every step."""
    host = _as_host(host)
    x = initial_state(host, noise_seed)
    dt = 1.0 / steps
    states, outputs = [x.copy()], []
    times = np.arange(steps) / steps
    for k in range(steps):
        v = host.output(x, float(times[k]), k)
        outputs.append(v)
        x = x + dt * v
        states.append(x.copy())
    return SampleResult(np.stack(states), np.stack(outputs), times)


def _summarize(records, final_mse, full_cost, pred_cost, plan, peak_units):
    predicted = [r for r in records if r.kind == "predicted"]
    mean_mse = float(np.mean([r.mse_vs_truth for r in predicted])) if predicted else 0.0
    mean_cos = float(np.mean([r.cosine_vs_truth for r in predicted])) if predicted else 1.0
    total = sum(r.flops for r in records)
    n = plan.interval
    if pred_cost == 0:
        speedup = float(n)
    else:
        speedup = n * full_cost / (full_cost + (n - 1) * pred_cost)
    return RunSummary(
        final_state_mse=final_mse,
        mean_mse=mean_mse,
        mean_cosine=mean_cos,
        total_flops=total,
        full_cost=full_cost,
        pred_cost=pred_cost,
        speedup=speedup,
        full_steps=plan.full_steps,
        predicted_steps=plan.predicted_steps,
        peak_cache_units=peak_units,
    )


def _final_mse(x: np.ndarray, truth: SampleResult) -> float:
    return float(np.mean((x - truth.states[-1]) ** 2))


def _config_echo(host, plan, policy, noise_seed, label):
    return {
        "label": label,
        "model": host.config_echo(),
        "sampler": {"steps": plan.total_steps, "noise_seed": int(noise_seed)},
        "policy": {
            "interval": plan.interval,
            "low_order": getattr(policy, "low_order", None),
            "high_order": getattr(policy, "high_order", None),
            "cutoff": getattr(policy, "cutoff", None),
            "transform": getattr(policy, "transform", TransformKind.NONE).value
            if hasattr(policy, "transform")
            else None,
        },
    }


def run_policy(
    model_or_host,
    plan: SchedulerPlan,
    policy: PolicyConfig,
    noise_seed: int,
    truth: SampleResult = None,
    label: str = "freqca",
) -> RunReport:
    """Execute one cached sampling run and report per-step fidelity.

    Counterfactual full outputs are computed at predicted steps purely for
    measurement; their cost is not charged to the run's FLOP total, which
    counts exactly full_steps * full_cost + predicted_steps * pred_cost.
    """
    host = _as_host(model_or_host)
    if truth is None:
        truth = run_full(host, plan.total_steps, noise_seed)
    cache = CrfCache(policy.low_order, policy.high_order, policy.cutoff, policy.transform)
    full_cost = host.full_macs + split_macs(host.tokens, host.channels, policy.transform)
    pred_cost = reconstruct_macs(host.tokens, host.channels, policy.low_order, policy.high_order)

    x = initial_state(host, noise_seed)
    dt = 1.0 / plan.total_steps
    records = []
    for k in range(plan.total_steps):
        t = float(k) / plan.total_steps
        if plan.kinds[k] is StepKind.FULL:
            v = host.output(x, t, k)
            cache.record_full(k, v)
            records.append(
                StepRecord(k, "full", 0.0, 1.0, None, None, full_cost, cache.unit_capacity)
            )
        else:
            v, eff_lo, eff_hi = cache.reconstruct_detail(k)
            ref = host.output(x, t, k)
            mse = float(np.mean((v - ref) ** 2))
            records.append(
                StepRecord(
                    k,
                    "predicted",
                    mse,
                    _safe_cosine(v, ref),
                    eff_lo,
                    eff_hi,
                    pred_cost,
                    cache.unit_capacity,
                )
            )
        x = x + dt * v

    summary = _summarize(
        records, _final_mse(x, truth), full_cost, pred_cost, plan, cache.unit_capacity
    )
    return RunReport(
        label=label,
        noise_seed=int(noise_seed),
        config=_config_echo(host, plan, policy, noise_seed, label),
        per_step=tuple(records),
        summary=summary,
        final_state=x,
    )


def run_layerwise_baseline(
    model: ToyDit,
    plan: SchedulerPlan,
    order: int = 2,
    noise_seed: int = 0,
    truth: SampleResult = None,
) -> RunReport:
    """Depth-proportional baseline: forecast every residual stream.

    Both residual streams of every block are cached with an order+1 window
    each and individually forecast on predicted steps; the feature is then
    reassembled as the current state plus the forecast streams.  Memory
    grows as 2 * layers * (order + 1) cache units.
    """
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"order must be in [0, {MAX_ORDER}]")
    host = ToyDitHost(model)
    if truth is None:
        truth = run_full(host, plan.total_steps, noise_seed)
    cfg = model.config
    streams = 2 * cfg.layers
    rings = [[] for _ in range(streams)]
    window = order + 1
    full_cost = model_forward_macs(cfg)
    pred_cost = layerwise_predict_macs(cfg.tokens, cfg.channels, cfg.layers, order)
    capacity = streams * window

    x = initial_state(host, noise_seed)
    dt = 1.0 / plan.total_steps
    records = []
    for k in range(plan.total_steps):
        t = float(k) / plan.total_steps
        trace = forward_full(model, x, t)
        if plan.kinds[k] is StepKind.FULL:
            for ring, r in zip(rings, trace.residuals):
                ring.append((k, r))
                if len(ring) > window:
                    ring.pop(0)
            v = trace.output
            records.append(
                StepRecord(k, "full", 0.0, 1.0, None, None, full_cost, capacity)
            )
        else:
            v = x.copy()
            eff_used = order
            for ring in rings:
                eff = min(order, len(ring) - 1)
                eff_used = min(eff_used, eff)
                if eff == 0:
                    v = v + ring[-1][1]
                else:
                    fit = fit_hermite(ring[-(eff + 1):], eff)
                    v = v + predict(fit, k)
            mse = float(np.mean((v - trace.output) ** 2))
            records.append(
                StepRecord(
                    k,
                    "predicted",
                    mse,
                    _safe_cosine(v, trace.output),
                    eff_used,
                    eff_used,
                    pred_cost,
                    capacity,
                )
            )
        x = x + dt * v

    summary = _summarize(
        records, _final_mse(x, truth), full_cost, pred_cost, plan, capacity
    )
    echo = {
        "label": "layerwise",
        "model": asdict(cfg),
        "sampler": {"steps": plan.total_steps, "noise_seed": int(noise_seed)},
        "policy": {"interval": plan.interval, "order": order},
    }
    return RunReport(
        label="layerwise",
        noise_seed=int(noise_seed),
        config=echo,
        per_step=tuple(records),
        summary=summary,
        final_state=x,
    )


def baseline_policy(kind: str, interval: int) -> PolicyConfig:
    """Reference policies: whole-feature reuse and full-band forecasting."""
    if kind == "fora":
        return PolicyConfig(interval, 0, 0, 0.25, TransformKind.NONE)
    if kind == "taylor":
        return PolicyConfig(interval, 2, 0, 0.25, TransformKind.NONE)
    raise ValueError(f"unknown baseline {kind!r}")
