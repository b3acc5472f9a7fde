"""Frequency transforms and low/high band splitting of feature tensors.

A feature tensor is (tokens, channels); every transform here acts along the
channel axis, independently per token.  The type-II DCT with orthonormal
scaling is built explicitly as a matrix,

    X_k = a_k * sum_n x_n cos(pi (2n + 1) k / (2 N)),
    a_0 = sqrt(1/N),  a_k = sqrt(2/N) for k > 0,

so its inverse is exactly the transpose (the type-III DCT).  The real FFT
path uses numpy's rfft/irfft with orthonormal scaling.  Both are unitary on
the retained coefficients, which makes band energies add up to the input
energy.
"""

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

from . import kernels
from .errors import InvalidCutoffError
from .numerics import as_matrix


class TransformKind(str, Enum):
    """Which transform defines the low/high split."""

    DCT = "dct"
    FFT = "fft"
    NONE = "none"


@dataclass(frozen=True)
class BandSplit:
    """A feature tensor decomposed into complementary bands.

    ``low + high`` reconstructs the original tensor up to round-off, and for
    the unitary transforms the band energies partition the input energy.
    """

    low: np.ndarray
    high: np.ndarray
    cutoff: float
    kind: TransformKind


@lru_cache(maxsize=32)
def dct2_matrix(n: int) -> np.ndarray:
    """Orthonormal type-II DCT matrix of size (n, n)."""
    if n < 1:
        raise ValueError("transform length must be positive")
    k = np.arange(n)[:, None]
    grid = np.arange(n)[None, :]
    mat = np.cos(np.pi * (2 * grid + 1) * k / (2 * n))
    mat[0] *= math.sqrt(1.0 / n)
    mat[1:] *= math.sqrt(2.0 / n)
    mat.flags.writeable = False
    return mat


def _apply(mat: np.ndarray, x: np.ndarray) -> np.ndarray:
    if x.ndim == 1:
        return kernels.transform_rows(x[None, :], mat)[0]
    return kernels.transform_rows(x, mat)


def dct2(x: np.ndarray) -> np.ndarray:
    """Orthonormal type-II DCT along the last axis of a 1-D or 2-D array."""
    x = np.asarray(x, dtype=np.float64)
    return _apply(dct2_matrix(x.shape[-1]), x)


def dct3(x: np.ndarray) -> np.ndarray:
    """Orthonormal type-III DCT (the inverse of :func:`dct2`)."""
    x = np.asarray(x, dtype=np.float64)
    return _apply(dct2_matrix(x.shape[-1]).T.copy(), x)


def _ceil_scaled(cutoff: float, n: int) -> int:
    # Nudge before ceil so that e.g. 0.1 * 30 = 3.0000000000000004 still
    # counts as exactly 3.
    return math.ceil(cutoff * n - 1e-9)


def low_band_count(channels: int, cutoff: float, kind: TransformKind) -> int:
    """Number of retained low-band coefficients for a given channel count.

    Raises InvalidCutoffError unless both bands end up non-empty.
    """
    kind = TransformKind(kind)
    if not 0.0 < cutoff < 1.0:
        raise InvalidCutoffError(f"cutoff must lie in (0, 1), got {cutoff}")
    if channels < 2:
        raise InvalidCutoffError(f"need at least 2 channels to split, got {channels}")
    if kind is TransformKind.NONE:
        return channels
    if kind is TransformKind.DCT:
        count, total = _ceil_scaled(cutoff, channels), channels
    else:
        count, total = _ceil_scaled(cutoff * 0.5, channels), channels // 2 + 1
    if not 1 <= count <= total - 1:
        raise InvalidCutoffError(
            f"cutoff {cutoff} keeps {count} of {total} {kind.value} coefficients; "
            "both bands must be non-empty"
        )
    return count


def split_bands(
    z: np.ndarray, cutoff: float = 0.25, kind: TransformKind = TransformKind.DCT
) -> BandSplit:
    """Split a (tokens, channels) tensor into low and high frequency bands.

    Coefficients with index below ``ceil(cutoff * channels)`` (DCT) or rfft
    bins below ``ceil(cutoff * channels / 2)`` (FFT) form the low band; each
    masked spectrum is transformed back so both bands live in feature space.
    With ``kind = NONE`` the low band is the tensor itself and the high band
    is zero.
    """
    kind = TransformKind(kind)
    z = as_matrix(z, "feature tensor")
    count = low_band_count(z.shape[1], cutoff, kind)
    if kind is TransformKind.NONE:
        return BandSplit(z.copy(), np.zeros_like(z), cutoff, kind)
    if kind is TransformKind.DCT:
        mat = dct2_matrix(z.shape[1])
        spectrum = kernels.transform_rows(z, mat)
        low_spec = spectrum.copy()
        low_spec[:, count:] = 0.0
        inv = mat.T.copy()
        low = kernels.transform_rows(low_spec, inv)
        high = kernels.transform_rows(spectrum - low_spec, inv)
        return BandSplit(low, high, cutoff, kind)
    spectrum = np.fft.rfft(z, axis=1, norm="ortho")
    low_spec = spectrum.copy()
    low_spec[:, count:] = 0.0
    low = np.fft.irfft(low_spec, n=z.shape[1], axis=1, norm="ortho")
    high = np.fft.irfft(spectrum - low_spec, n=z.shape[1], axis=1, norm="ortho")
    return BandSplit(low, high, cutoff, kind)


def recombine(split: BandSplit) -> np.ndarray:
    """Sum the two bands back into a single feature tensor."""
    if split.low.shape != split.high.shape:
        raise ValueError("band shapes diverged")
    return split.low + split.high
