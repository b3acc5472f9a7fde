"""Cumulative-feature cache, caching schedule, and the cost model.

The cache stores the denoiser's cumulative feature (input plus every
attention and MLP residual, i.e. the tensor the network hands back), split
once into frequency bands at record time.  Between full evaluations the low
band is reused or low-order forecast and the high band is forecast with a
short Hermite fit, so reconstruction touches a handful of cached tensors
regardless of network depth.

Costs are counted in multiply-accumulate operations (MACs) under a stated
accounting model; the numbers are used for reproducible bookkeeping, not as
hardware truth.
"""

import math
from collections import deque
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import (
    BackwardPredictionError,
    EmptyCacheError,
    InvalidCutoffError,
    InvalidIntervalError,
    NonMonotoneStepError,
    OrderTooHighError,
    RankDeficientError,
)
from .frequency import BandSplit, TransformKind, split_bands
from .predictor import MAX_ORDER, fit_hermite, predict


class StepKind(Enum):
    FULL = "full"
    PREDICTED = "predicted"


@dataclass(frozen=True)
class SchedulerPlan:
    """Per-step schedule: a full evaluation every ``interval`` steps."""

    total_steps: int
    interval: int
    kinds: tuple

    @property
    def full_steps(self) -> int:
        return sum(1 for k in self.kinds if k is StepKind.FULL)

    @property
    def predicted_steps(self) -> int:
        return self.total_steps - self.full_steps


def build_plan(total_steps: int, interval: int) -> SchedulerPlan:
    """Mark step k as FULL when k % interval == 0, PREDICTED otherwise.

    Step 0 is always full, so ceil(total_steps / interval) steps run the
    network.  ``interval = 1`` disables caching entirely.
    """
    if total_steps < 1:
        raise InvalidIntervalError(f"total_steps must be >= 1, got {total_steps}")
    if not isinstance(interval, int) or interval < 1 or interval > total_steps:
        raise InvalidIntervalError(
            f"interval must be an integer in [1, {total_steps}], got {interval!r}"
        )
    kinds = tuple(
        StepKind.FULL if k % interval == 0 else StepKind.PREDICTED
        for k in range(total_steps)
    )
    return SchedulerPlan(total_steps, interval, kinds)


class CrfCache:
    """Band-split history of the cumulative feature, O(1) in network depth.

    Two short rings hold the newest ``low_order + 1`` low-band and
    ``high_order + 1`` high-band tensors.  ``unit_capacity`` counts the
    tensors the rings can hold (the memory footprint in cache units, one
    unit being one feature-sized tensor); ``units_held`` counts what they
    currently hold, which is smaller right after a reset.
    """

    def __init__(
        self,
        low_order: int = 0,
        high_order: int = 2,
        cutoff: float = 0.25,
        transform: TransformKind = TransformKind.DCT,
    ):
        for name, order in (("low_order", low_order), ("high_order", high_order)):
            if not 0 <= order <= MAX_ORDER:
                raise OrderTooHighError(f"{name} must be in [0, {MAX_ORDER}], got {order}")
        if not 0.0 < cutoff < 1.0:
            raise InvalidCutoffError(f"cutoff must lie in (0, 1), got {cutoff}")
        self.low_order = low_order
        self.high_order = high_order
        self.cutoff = cutoff
        self.transform = TransformKind(transform)
        self._low = deque(maxlen=low_order + 1)
        self._high = deque(maxlen=high_order + 1)
        self._last_step = None

    @property
    def unit_capacity(self) -> int:
        return (self.low_order + 1) + (self.high_order + 1)

    @property
    def units_held(self) -> int:
        return len(self._low) + len(self._high)

    @property
    def last_step(self):
        return self._last_step

    def record_full(self, step: int, crf: np.ndarray) -> BandSplit:
        """Band-split a freshly computed cumulative feature and retain it."""
        if self._last_step is not None and step <= self._last_step:
            raise NonMonotoneStepError(
                f"record at step {step} after step {self._last_step}"
            )
        split = split_bands(crf, self.cutoff, self.transform)
        self._low.append((step, split.low))
        self._high.append((step, split.high))
        self._last_step = int(step)
        return split

    def _forecast(self, ring, order: int, step: int):
        # Returns (tensor, effective order).  Degrades to whatever the ring
        # can support; with one entry that is order zero, literal reuse.
        effective = min(order, len(ring) - 1)
        while True:
            if effective == 0:
                return ring[-1][1], 0
            window = list(ring)[-(effective + 1):]
            try:
                fit = fit_hermite(window, effective)
            except RankDeficientError:
                effective -= 1
                continue
            return predict(fit, step), effective

    def reconstruct_detail(self, step: int, low_order=None, high_order=None):
        """Forecast both bands at ``step`` and recombine.

        Returns (tensor, effective_low_order, effective_high_order).  The
        effective orders are lower than requested while the rings are still
        filling after a reset.
        """
        if not self._low:
            raise EmptyCacheError("reconstruct before any full step was recorded")
        if step < self._last_step:
            raise BackwardPredictionError(
                f"step {step} precedes newest recorded step {self._last_step}"
            )
        low_order = self.low_order if low_order is None else low_order
        high_order = self.high_order if high_order is None else high_order
        for name, order in (("low_order", low_order), ("high_order", high_order)):
            if not 0 <= order <= MAX_ORDER:
                raise OrderTooHighError(f"{name} must be in [0, {MAX_ORDER}], got {order}")
        low, eff_lo = self._forecast(self._low, low_order, step)
        high, eff_hi = self._forecast(self._high, high_order, step)
        return low + high, eff_lo, eff_hi

    def reconstruct(self, step: int, low_order=None, high_order=None) -> np.ndarray:
        return self.reconstruct_detail(step, low_order, high_order)[0]


# ------------------------------------------------------------------ costs


@dataclass(frozen=True)
class CostLedger:
    """Memory and compute bookkeeping for one cache configuration."""

    layer_count: int
    order: int
    interval: int
    full_cost: float
    pred_cost: float
    average_cost: float
    speedup: float
    cache_units: int
    layerwise_cache_units: int
    unit_ratio: float


def cost_ledger(
    layer_count: int,
    order: int = 2,
    interval: int = 1,
    full_cost: float = 1.0,
    pred_cost: float = 0.0,
) -> CostLedger:
    """Cache-unit counts and amortized cost for a given depth and order.

    One cache unit is one feature-sized tensor.  Caching the cumulative
    feature takes 1 reused low-band unit plus ``order + 1`` high-band units;
    caching both residual streams of every layer instead takes
    ``2 * (order + 1) * layer_count`` units.  The amortized per-step cost
    with a full evaluation every N steps is full/N + (1 - 1/N) * pred, and
    the speedup is its ratio to the full cost, exactly N when pred = 0.
    """
    if layer_count < 1:
        raise ValueError(f"layer_count must be >= 1, got {layer_count}")
    if not 0 <= order <= MAX_ORDER:
        raise OrderTooHighError(f"order must be in [0, {MAX_ORDER}], got {order}")
    if interval < 1:
        raise InvalidIntervalError(f"interval must be >= 1, got {interval}")
    if full_cost <= 0 or pred_cost < 0:
        raise ValueError("full_cost must be positive and pred_cost non-negative")
    units = 1 + (order + 1)
    layerwise = 2 * (order + 1) * layer_count
    n = interval
    average = full_cost / n + (1.0 - 1.0 / n) * pred_cost
    if pred_cost == 0.0:
        speedup = float(n)
    else:
        speedup = n * full_cost / (full_cost + (n - 1) * pred_cost)
    return CostLedger(
        layer_count=layer_count,
        order=order,
        interval=interval,
        full_cost=full_cost,
        pred_cost=pred_cost,
        average_cost=average,
        speedup=speedup,
        cache_units=units,
        layerwise_cache_units=layerwise,
        unit_ratio=units / layerwise,
    )


def polynomial_predict_macs(order: int, size: int) -> int:
    """MACs to fit and evaluate one order-m forecast over an m+1 window.

    Counts: basis evaluation for the design and the query point, the normal
    equations (gram matrix and right-hand side), a Cholesky solve, and the
    final evaluation.  Order zero over a single-entry window is literal
    reuse and costs nothing.
    """
    if order == 0:
        return 0
    k = order + 1
    n = k  # interpolating window
    basis = (n + 1) * 2 * max(order - 1, 0)
    gram = n * k * k
    rhs = n * k * size
    solve = k * k * k // 3 + k * k * size
    evaluate = k * size
    return basis + gram + rhs + solve + evaluate


def split_macs(tokens: int, channels: int, kind: TransformKind) -> int:
    """MACs to band-split one feature tensor (forward plus two inverses)."""
    kind = TransformKind(kind)
    if kind is TransformKind.NONE:
        return 0
    if kind is TransformKind.DCT:
        return 3 * tokens * channels * channels
    per_fft = 4 * channels * max(1, math.ceil(math.log2(channels)))
    return 3 * tokens * per_fft


def reconstruct_macs(tokens: int, channels: int, low_order: int, high_order: int) -> int:
    """MACs for one cache reconstruction: two band forecasts plus the sum."""
    size = tokens * channels
    return (
        polynomial_predict_macs(low_order, size)
        + polynomial_predict_macs(high_order, size)
        + size
    )


def layerwise_predict_macs(tokens: int, channels: int, layers: int, order: int) -> int:
    """MACs to forecast every residual stream of every layer and sum them."""
    size = tokens * channels
    streams = 2 * layers
    return streams * polynomial_predict_macs(order, size) + streams * size
