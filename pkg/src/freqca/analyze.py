"""Band-resolved dynamics of a recorded output trajectory.

Answers the question the cache design rests on: across the steps of one
sampling run, how similar is each frequency band to itself some steps later?
High low-band similarity justifies reuse; smoothly decaying high-band
similarity justifies short polynomial forecasts.  A two-component projection
of the low-band trajectory is included as a compact picture of its drift.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateCovarianceError, InvalidIntervalError, ShapeMismatchError
from .frequency import TransformKind, split_bands
from .numerics import pca_project


@dataclass(frozen=True)
class FrequencyDynamicsReport:
    steps: int
    tokens: int
    channels: int
    cutoff: float
    transform: TransformKind
    intervals: tuple
    low_similarity: dict  # interval -> tuple of cosines, length steps - interval
    high_similarity: dict
    low_mean: dict  # interval -> float
    high_mean: dict
    low_pca: object  # (steps, 2) array, or None when the low band never moves


def _safe_cosine(a: np.ndarray, b: np.ndarray) -> float:
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0.0 and nb == 0.0:
        return 1.0
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.clip((a.ravel() @ b.ravel()) / (na * nb), -1.0, 1.0))


def frequency_dynamics(
    outputs: np.ndarray,
    intervals,
    cutoff: float = 0.25,
    transform: TransformKind = TransformKind.DCT,
) -> FrequencyDynamicsReport:
    """Split every step's output and correlate bands across step offsets.

    ``outputs`` is (steps, tokens, channels).  For each offset d in
    ``intervals`` the report holds cosine(band_k, band_{k+d}) for every
    valid k, per band, plus the per-offset means.
    """
    arr = np.asarray(outputs, dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeMismatchError(f"trajectory must be 3-D, got shape {arr.shape}")
    steps = arr.shape[0]
    if steps < 2:
        raise InvalidIntervalError("need at least two steps to correlate")
    offsets = tuple(int(d) for d in intervals)
    for d in offsets:
        if d < 1 or d >= steps:
            raise InvalidIntervalError(
                f"interval {d} outside [1, {steps - 1}] for a {steps}-step trajectory"
            )

    kind = TransformKind(transform)
    splits = [split_bands(arr[k], cutoff, kind) for k in range(steps)]
    lows = [s.low for s in splits]
    highs = [s.high for s in splits]

    low_sim, high_sim, low_mean, high_mean = {}, {}, {}, {}
    for d in offsets:
        ls = tuple(_safe_cosine(lows[k], lows[k + d]) for k in range(steps - d))
        hs = tuple(_safe_cosine(highs[k], highs[k + d]) for k in range(steps - d))
        low_sim[d], high_sim[d] = ls, hs
        low_mean[d] = float(np.mean(ls))
        high_mean[d] = float(np.mean(hs))

    try:
        coords = pca_project(lows, components=2)
    except DegenerateCovarianceError:
        coords = None

    return FrequencyDynamicsReport(
        steps=steps,
        tokens=int(arr.shape[1]),
        channels=int(arr.shape[2]),
        cutoff=float(cutoff),
        transform=kind,
        intervals=offsets,
        low_similarity=low_sim,
        high_similarity=high_sim,
        low_mean=low_mean,
        high_mean=high_mean,
        low_pca=coords,
    )
