"""Polynomial forecasting of cached feature tensors.

A fit takes the last few recorded states of a tensor, maps their step
indices affinely onto [-1, 1], and least-squares fits each tensor entry with
a probabilists' Hermite polynomial expansion

    He_0 = 1,  He_1 = s,  He_{k+1} = s He_k - k He_{k-1}.

Over a short window this basis is as expressive as the monomials but keeps
the design matrix well scaled.  Prediction evaluates the fitted expansion at
a later step, i.e. at s > 1.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (
    BackwardPredictionError,
    InsufficientHistoryError,
    NonMonotoneStepError,
    OrderTooHighError,
    ShapeMismatchError,
)
from .numerics import solve_least_squares

# Highest supported expansion order.  Third order already spans a four-step
# window; anything beyond that extrapolates too wildly to be useful here.
MAX_ORDER = 3


def hermite_basis(s: float, order: int) -> np.ndarray:
    """Values [He_0(s), ..., He_order(s)] via the three-term recurrence."""
    if order < 0:
        raise ValueError("order must be non-negative")
    if order > MAX_ORDER:
        raise OrderTooHighError(f"order {order} exceeds cap {MAX_ORDER}")
    out = np.empty(order + 1)
    out[0] = 1.0
    if order >= 1:
        out[1] = s
    for k in range(1, order):
        out[k + 1] = s * out[k] - k * out[k - 1]
    return out


@dataclass(frozen=True)
class HermiteFit:
    """Fitted expansion coefficients plus the step-to-s affine map."""

    order: int
    coefficients: np.ndarray  # (order + 1, flattened tensor size)
    shape: tuple
    steps: tuple
    step_lo: int
    step_hi: int

    def normalize(self, step: int) -> float:
        """Map a step index onto the fit's s axis."""
        if self.step_hi == self.step_lo:
            return 0.0
        return -1.0 + 2.0 * (step - self.step_lo) / (self.step_hi - self.step_lo)


def fit_hermite(history, order: int) -> HermiteFit:
    """Fit one expansion per tensor entry over a window of recorded states.

    ``history`` is a sequence of (step, tensor) pairs with strictly
    increasing steps and identical tensor shapes.  An order-m fit needs at
    least m + 1 states; with exactly m + 1 the fit interpolates.
    """
    if order < 0:
        raise ValueError("order must be non-negative")
    if order > MAX_ORDER:
        raise OrderTooHighError(f"order {order} exceeds cap {MAX_ORDER}")
    pairs = list(history)
    if len(pairs) < order + 1:
        raise InsufficientHistoryError(
            f"order {order} needs {order + 1} states, got {len(pairs)}"
        )
    steps = [int(s) for s, _ in pairs]
    for prev, nxt in zip(steps, steps[1:]):
        if nxt < prev:
            raise NonMonotoneStepError(f"steps decrease: {prev} then {nxt}")
    tensors = [np.asarray(t, dtype=np.float64) for _, t in pairs]
    shape = tensors[0].shape
    for t in tensors[1:]:
        if t.shape != shape:
            raise ShapeMismatchError("history tensors have differing shapes")

    lo, hi = steps[0], steps[-1]
    fit = HermiteFit(order, np.empty(0), shape, tuple(steps), lo, hi)
    design = np.stack([hermite_basis(fit.normalize(s), order) for s in steps])
    targets = np.stack([t.ravel() for t in tensors])
    coeffs = solve_least_squares(design, targets)
    return HermiteFit(order, coeffs, shape, tuple(steps), lo, hi)


def predict(fit: HermiteFit, step: int) -> np.ndarray:
    """Evaluate a fit at a step at or past the end of its window."""
    if step < fit.step_hi:
        raise BackwardPredictionError(
            f"step {step} precedes newest fitted step {fit.step_hi}"
        )
    basis = hermite_basis(fit.normalize(step), fit.order)
    return (basis @ fit.coefficients).reshape(fit.shape)
