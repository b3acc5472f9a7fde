"""Shared fixtures and independent oracles used across the test suite."""

import numpy as np
import pytest

from freqca import (
    TrajectoryHost,
    dct2_matrix,
    kernels,
    low_band_count,
)
from freqca.frequency import TransformKind


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    """Trigger JIT compilation once so timed tests measure math, not compilation."""
    x = np.eye(4)
    kernels.transform_rows(x, x)
    kernels.layernorm_rows(x, 1e-12)
    kernels.attention_core(x, x, x, 2)


def naive_dct2(x: np.ndarray) -> np.ndarray:
    """Direct-summation orthonormal type-II DCT of a vector, O(n^2) loops."""
    n = x.shape[0]
    out = np.zeros(n)
    for k in range(n):
        acc = 0.0
        for i in range(n):
            acc += x[i] * np.cos(np.pi * (2 * i + 1) * k / (2 * n))
        scale = np.sqrt(1.0 / n) if k == 0 else np.sqrt(2.0 / n)
        out[k] = scale * acc
    return out


class QuadraticBandTrajectory:
    """Synthetic trajectory: constant low band, per-entry quadratic high band.

    Built directly from DCT basis rows, so under the DCT split the low band
    never moves while the high band follows high(k) = P + Q k + R k^2.
    """

    def __init__(self, tokens=4, channels=32, steps=40, cutoff=0.25, seed=7):
        rng = np.random.default_rng(seed)
        mat = np.asarray(dct2_matrix(channels))
        kc = low_band_count(channels, cutoff, TransformKind.DCT)
        self.low = rng.standard_normal((tokens, kc)) @ mat[:kc]
        self.p = rng.standard_normal((tokens, channels - kc)) @ mat[kc:]
        self.q = 0.05 * (rng.standard_normal((tokens, channels - kc)) @ mat[kc:])
        self.r = 1e-3 * (rng.standard_normal((tokens, channels - kc)) @ mat[kc:])
        self.steps = steps
        self.cutoff = cutoff
        self.outputs = np.stack([self.low + self.high_at(k) for k in range(steps)])

    def high_at(self, k: int) -> np.ndarray:
        return self.p + self.q * k + self.r * (k * k)

    def host(self) -> TrajectoryHost:
        return TrajectoryHost(self.outputs)

    def drift_mse(self, step: int, recorded_step: int) -> float:
        """Mean squared error of freezing the whole feature at recorded_step."""
        delta = self.high_at(step) - self.high_at(recorded_step)
        return float(np.mean(delta**2))


@pytest.fixture(scope="session")
def quadratic_band_trajectory():
    return QuadraticBandTrajectory()
