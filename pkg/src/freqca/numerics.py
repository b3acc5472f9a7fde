"""Small dense linear-algebra helpers.

Everything here operates on float64 numpy arrays and is deterministic:
repeated calls with identical inputs produce bit-identical outputs.
"""

import numpy as np
import scipy.linalg

from .errors import (
    DegenerateCovarianceError,
    RankDeficientError,
    ShapeMismatchError,
    ZeroVectorError,
)

# Relative singular-value threshold below which a design is treated as rank
# deficient.  Relative to the largest singular value, so the check is
# insensitive to uniform scaling of the design.
RANK_RTOL = 1e-10

_PCA_SEED = 0x5EED


def as_matrix(x, name: str = "array") -> np.ndarray:
    """Coerce to a 2-D float64 array, rejecting non-finite entries."""
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 2:
        raise ShapeMismatchError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.isfinite(arr).all():
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def solve_least_squares(design: np.ndarray, targets: np.ndarray) -> np.ndarray:
    """Minimum-residual solution of ``design @ coeffs = targets``.

    ``design`` is (n, k) with n >= k; ``targets`` may be a vector or a matrix
    whose rows align with the design rows, in which case each column is solved
    independently.  The solve goes through the normal equations with a
    Cholesky factorization; if that factorization fails the computation falls
    back to a column-pivoted orthogonal factorization.  A design whose
    numerical rank (relative singular-value threshold 1e-10) is below its
    column count raises RankDeficientError before any solve is attempted.
    """
    a = np.asarray(design, dtype=np.float64)
    b = np.asarray(targets, dtype=np.float64)
    if a.ndim != 2:
        raise ShapeMismatchError(f"design must be 2-D, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ShapeMismatchError(
            f"targets rows {b.shape[0]} do not match design rows {a.shape[0]}"
        )
    if not np.isfinite(a).all() or not np.isfinite(b).all():
        raise ValueError("least-squares operands contain non-finite entries")

    singular = np.linalg.svd(a, compute_uv=False)
    largest = singular[0] if singular.size else 0.0
    rank = int(np.sum(singular > RANK_RTOL * largest)) if largest > 0.0 else 0
    if rank < a.shape[1]:
        raise RankDeficientError(
            f"design rank {rank} below column count {a.shape[1]}"
        )

    flat = b.ndim == 1
    rhs = b[:, None] if flat else b
    gram = a.T @ a
    try:
        factor = scipy.linalg.cho_factor(gram, check_finite=False)
        coeffs = scipy.linalg.cho_solve(factor, a.T @ rhs, check_finite=False)
    except scipy.linalg.LinAlgError:
        coeffs = scipy.linalg.lstsq(a, rhs, lapack_driver="gelsy", check_finite=False)[0]
    return coeffs[:, 0] if flat else coeffs


def cosine_similarity(a: np.ndarray, b: np.ndarray) -> float:
    """Cosine of the angle between two tensors, flattened.

    Returns a value in [-1, 1].  If exactly one operand is the zero tensor
    the similarity is 0.0; if both are zero there is no defined angle and
    ZeroVectorError is raised.
    """
    x = np.asarray(a, dtype=np.float64).ravel()
    y = np.asarray(b, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ShapeMismatchError(f"operand sizes differ: {x.shape} vs {y.shape}")
    nx = float(np.linalg.norm(x))
    ny = float(np.linalg.norm(y))
    if nx == 0.0 and ny == 0.0:
        raise ZeroVectorError("cosine similarity of two zero tensors is undefined")
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.clip(x @ y / (nx * ny), -1.0, 1.0))


def pca_project(
    states,
    components: int = 2,
    tol: float = 1e-8,
    max_iter: int = 1000,
) -> np.ndarray:
    """Project a sequence of tensors onto its leading principal components.

    Each state is flattened; the stack is mean-centered and the top
    ``components`` eigenvectors of the sample covariance are found by power
    iteration with deflation (the covariance matrix itself is never formed).
    Returns the (n_states, components) coordinate array.

    The component sign is fixed so that the first loading whose magnitude is
    non-negligible is positive.  A trajectory with no variance at all raises
    DegenerateCovarianceError; trailing components beyond the data's rank
    come back with near-zero coordinates rather than failing, since "no
    further spread" is itself an informative answer.
    """
    if components < 1:
        raise ValueError("components must be >= 1")
    rows = [np.asarray(s, dtype=np.float64).ravel() for s in states]
    if len(rows) < 2:
        raise ValueError("need at least two states to measure spread")
    dim = rows[0].size
    for r in rows:
        if r.size != dim:
            raise ShapeMismatchError("states have inconsistent sizes")
    x = np.stack(rows)
    if not np.isfinite(x).all():
        raise ValueError("states contain non-finite entries")
    n = x.shape[0]
    xc = x - x.mean(axis=0)
    denom = n - 1

    rng = np.random.default_rng(_PCA_SEED)

    def deflate(w):
        # Two passes: a single Gram-Schmidt sweep can leave an O(1) residue
        # after normalization when the remainder sits at the noise floor.
        for _ in range(2):
            for b in basis:
                w -= (b @ w) * b
        return w

    basis = []
    lead_variance = None
    for comp in range(components):
        v = deflate(rng.standard_normal(dim))
        norm = np.linalg.norm(v)
        v = v / norm if norm > 0 else np.zeros(dim)
        # Iterates whose image under the covariance is negligible relative
        # to the leading eigenvalue mark an exhausted subspace; keep the
        # current (already deflated) direction, its projections are ~0.
        floor = 1e-300 if lead_variance is None else 1e-13 * lead_variance
        for _ in range(max_iter):
            w = deflate(xc.T @ (xc @ v) / denom)
            norm = float(np.linalg.norm(w))
            if norm <= floor:
                break
            w /= norm
            if np.linalg.norm(w - v) <= tol:
                v = w
                break
            v = w
        variance = float(v @ (xc.T @ (xc @ v))) / denom
        if comp == 0:
            if variance <= 1e-12:
                raise DegenerateCovarianceError(
                    f"leading component variance {variance:.3e} is negligible"
                )
            lead_variance = variance
        peak = np.max(np.abs(v))
        if peak > 0.0:
            lead = np.flatnonzero(np.abs(v) > 1e-6 * peak)
            if lead.size and v[lead[0]] < 0:
                v = -v
        basis.append(v)
    return xc @ np.column_stack(basis)
