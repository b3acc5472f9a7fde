"""Numeric kernels with two interchangeable implementations.

The hot inner loops (row-wise linear transforms, attention, layer norm) exist
twice: a plain numpy version and a numba ``@njit`` version.  Both compute the
same thing; which one runs is chosen once at import time:

* ``FREQCA_BACKEND=numpy``  force the pure numpy path
* ``FREQCA_BACKEND=numba``  force the compiled path (error if numba is absent)
* unset                     use numba when importable, numpy otherwise

``benchmarks/bench_kernels.py`` compares the two paths head to head.
"""

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(fn):
            return fn

        if args and callable(args[0]):
            return args[0]
        return wrap


def _resolve_backend() -> str:
    requested = os.environ.get("FREQCA_BACKEND", "").strip().lower()
    if requested == "":
        return "numba" if HAS_NUMBA else "numpy"
    if requested == "numpy":
        return "numpy"
    if requested == "numba":
        if not HAS_NUMBA:
            raise ImportError("FREQCA_BACKEND=numba but numba is not importable")
        return "numba"
    raise ValueError(f"FREQCA_BACKEND must be 'numba' or 'numpy', got {requested!r}")


_BACKEND = _resolve_backend()


def active_backend() -> str:
    """Name of the kernel path selected at import time."""
    return _BACKEND


# ---------------------------------------------------------------- numpy path


def transform_rows_np(x: np.ndarray, mat: np.ndarray) -> np.ndarray:
    """Apply ``mat`` to every row of ``x``: out[i] = mat @ x[i]."""
    return x @ mat.T


def layernorm_rows_np(x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Standardize every row to zero mean and unit variance."""
    mean = x.mean(axis=1, keepdims=True)
    var = x.var(axis=1, keepdims=True)
    return (x - mean) / np.sqrt(var + eps)


def attention_core_np(q: np.ndarray, k: np.ndarray, v: np.ndarray, heads: int) -> np.ndarray:
    """Multi-head scaled dot-product attention on projected q, k, v.

    Inputs are (tokens, channels); channels must split evenly into ``heads``.
    Returns the concatenated per-head contexts, before the output projection.
    """
    tokens, channels = q.shape
    d = channels // heads
    qh = q.reshape(tokens, heads, d).transpose(1, 0, 2)
    kh = k.reshape(tokens, heads, d).transpose(1, 0, 2)
    vh = v.reshape(tokens, heads, d).transpose(1, 0, 2)
    scores = qh @ kh.transpose(0, 2, 1) / np.sqrt(d)
    scores -= scores.max(axis=2, keepdims=True)
    weights = np.exp(scores)
    weights /= weights.sum(axis=2, keepdims=True)
    ctx = weights @ vh
    return ctx.transpose(1, 0, 2).reshape(tokens, channels)


# ---------------------------------------------------------------- numba path


@njit(cache=True)
def transform_rows_nb(x, mat):  # pragma: no cover - numerically identical to numpy path
    rows, n = x.shape
    m = mat.shape[0]
    out = np.empty((rows, m))
    for i in range(rows):
        for j in range(m):
            acc = 0.0
            for c in range(n):
                acc += mat[j, c] * x[i, c]
            out[i, j] = acc
    return out


@njit(cache=True)
def layernorm_rows_nb(x, eps):  # pragma: no cover
    rows, n = x.shape
    out = np.empty((rows, n))
    for i in range(rows):
        mean = 0.0
        for c in range(n):
            mean += x[i, c]
        mean /= n
        var = 0.0
        for c in range(n):
            dev = x[i, c] - mean
            var += dev * dev
        var /= n
        scale = 1.0 / np.sqrt(var + eps)
        for c in range(n):
            out[i, c] = (x[i, c] - mean) * scale
    return out


@njit(cache=True)
def attention_core_nb(q, k, v, heads):  # pragma: no cover
    tokens, channels = q.shape
    d = channels // heads
    inv = 1.0 / np.sqrt(d)
    out = np.empty((tokens, channels))
    scores = np.empty((tokens, tokens))
    for h in range(heads):
        base = h * d
        for i in range(tokens):
            for j in range(tokens):
                acc = 0.0
                for c in range(d):
                    acc += q[i, base + c] * k[j, base + c]
                scores[i, j] = acc * inv
        for i in range(tokens):
            hi = scores[i, 0]
            for j in range(1, tokens):
                if scores[i, j] > hi:
                    hi = scores[i, j]
            total = 0.0
            for j in range(tokens):
                scores[i, j] = np.exp(scores[i, j] - hi)
                total += scores[i, j]
            for j in range(tokens):
                scores[i, j] /= total
        for i in range(tokens):
            for c in range(d):
                acc = 0.0
                for j in range(tokens):
                    acc += scores[i, j] * v[j, base + c]
                out[i, base + c] = acc
    return out


# ------------------------------------------------------------------ dispatch


def transform_rows(x: np.ndarray, mat: np.ndarray) -> np.ndarray:
    if _BACKEND == "numba":
        return transform_rows_nb(np.ascontiguousarray(x), np.ascontiguousarray(mat))
    return transform_rows_np(x, mat)


def layernorm_rows(x: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    if _BACKEND == "numba":
        return layernorm_rows_nb(np.ascontiguousarray(x), eps)
    return layernorm_rows_np(x, eps)


def attention_core(q: np.ndarray, k: np.ndarray, v: np.ndarray, heads: int) -> np.ndarray:
    if _BACKEND == "numba":
        return attention_core_nb(
            np.ascontiguousarray(q), np.ascontiguousarray(k), np.ascontiguousarray(v), heads
        )
    return attention_core_np(q, k, v, heads)
