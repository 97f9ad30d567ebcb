"""Kernel dynamic mode decomposition.

Approximates the Koopman operator of a nonlinear one-step map without ever
materializing an observable dictionary: all inner products between implicit
feature vectors are evaluated through a kernel function on state space
(polynomial ``(1 + y^T x)^alpha`` or Gaussian ``exp(-||x-y||^2 / sigma^2)``).

The fit eigendecomposes the symmetric Gram matrix ``G00`` (kernel inner
products of the snapshots with themselves), truncates by the energy criterion
on its singular values, forms the reduced operator
``K = S_r^{-1} Q_r^T G10 Q_r S_r^{-1}``, and extracts Koopman eigenvalues,
eigenfunctions, and modes from its right/left eigenpairs.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
import scipy.linalg

from . import linalg
from .dmd import SnapshotPair, select_rank

logger = logging.getLogger(__name__)

#: Gram eigenvalues at or below this fraction of the largest are treated as
#: numerical noise (roundoff can make them slightly negative) and discarded.
GRAM_EIGENVALUE_CUTOFF = 1e-12


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice: ``polynomial`` with integer degree ``alpha >= 1`` or
    ``gaussian`` with width ``sigma > 0``. ``sigma=None`` selects
    ``sigma_scale`` times the median pairwise snapshot distance at fit time."""

    kind: str = "gaussian"
    alpha: int = 2
    sigma: float | None = None
    sigma_scale: float = 1.0

    def __post_init__(self):
        if self.kind not in ("polynomial", "gaussian"):
            raise ValueError("kernel kind must be 'polynomial' or 'gaussian'")
        if self.kind == "polynomial":
            if int(self.alpha) != self.alpha or self.alpha < 1:
                raise ValueError("polynomial degree alpha must be an integer >= 1")
        else:
            if self.sigma is not None and self.sigma <= 0:
                raise ValueError("gaussian width sigma must be positive")
            if self.sigma_scale <= 0:
                raise ValueError("sigma_scale must be positive")


def _cross_sqdist(a_cols, b_cols):
    """Pairwise squared distances between columns via one BLAS product.

    ||a - b||^2 = ||a||^2 + ||b||^2 - 2 a.b; roundoff negatives are clipped.
    """
    a2 = np.einsum("ij,ij->j", a_cols, a_cols)
    b2 = np.einsum("ij,ij->j", b_cols, b_cols)
    sq = a2[:, None] + b2[None, :] - 2.0 * (a_cols.T @ b_cols)
    np.maximum(sq, 0.0, out=sq)
    return sq


def kernel_cross(spec, a_cols, b_cols):
    """Matrix ``K[i, j] = f(a_i, b_j)`` over the columns of two state matrices."""
    if spec.kind == "polynomial":
        with np.errstate(over="ignore"):
            k = (1.0 + a_cols.T @ b_cols) ** spec.alpha
    else:
        if spec.sigma is None:
            raise ValueError("gaussian kernel width is unresolved; fit first")
        k = np.exp(-_cross_sqdist(a_cols, b_cols) / spec.sigma**2)
    if not np.all(np.isfinite(k)):
        raise ValueError("kernel evaluation produced non-finite values")
    return k


def median_pairwise_distance(states):
    """Median heuristic for the Gaussian width; 1.0 for degenerate data."""
    m = states.shape[1]
    if m < 2:
        return 1.0
    sq = _cross_sqdist(states, states)
    upper = sq[np.triu_indices(m, k=1)]
    med = float(np.sqrt(np.median(upper)))
    return med if med > 0 else 1.0


def resolve_kernel(spec, pair):
    """Fill in data-dependent defaults (Gaussian sigma) for a snapshot pair."""
    if spec.kind == "gaussian" and spec.sigma is None:
        sigma = spec.sigma_scale * median_pairwise_distance(pair.x0)
        return replace(spec, sigma=sigma)
    return spec


def gram_matrices(pair, kernel):
    """Gram matrices ``G00[i,j] = f(u_i, u_j)`` and ``G10[i,j] = f(u_{i+1}, u_j)``.

    G00 is symmetrized exactly after construction.
    """
    kernel = resolve_kernel(kernel, pair)
    g00 = kernel_cross(kernel, pair.x0, pair.x0)
    g00 = 0.5 * (g00 + g00.T)
    g10 = kernel_cross(kernel, pair.x1, pair.x0)
    return g00, g10


@dataclass(frozen=True)
class KdmdModel:
    """Fitted kernel DMD model.

    ``gram_vectors``/``gram_values`` are the retained eigenpairs of G00
    (values are the Gram singular values, i.e. square roots of the G00
    eigenvalues). ``left_vectors`` are normalized so that
    ``xi_k^H w_k = 1``. ``reference_snapshots`` keeps x0 for kernel
    evaluations against the training data.
    """

    kernel: KernelSpec
    rank: int
    gram_vectors: np.ndarray
    gram_values: np.ndarray
    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray
    koopman_modes: np.ndarray
    reference_snapshots: np.ndarray
    dt: float = 1.0
    t0: float = 0.0

    @property
    def _lift(self):
        # Q_r S_r^{-1}, the (m, r) map from Gram space to reduced coordinates.
        return self.gram_vectors / self.gram_values


def fit_kernel_dmd(pair, kernel=KernelSpec(), eta=0.0, max_rank=None):
    """Fit kernel DMD to a snapshot pair.

    The energy criterion ``eta`` is applied to the Gram singular values; the
    retained rank can additionally be capped by ``max_rank``. Raises a
    validation error when every Gram eigenvalue sits at roundoff level
    (degenerate data).
    """
    kernel = resolve_kernel(kernel, pair)
    g00, g10 = gram_matrices(pair, kernel)

    evals, q = np.linalg.eigh(g00)
    evals, q = evals[::-1], q[:, ::-1]
    top = evals[0] if evals.size else 0.0
    if top <= 0.0:
        raise ValueError("degenerate data: Gram matrix has no positive eigenvalues")
    keep = evals > GRAM_EIGENVALUE_CUTOFF * top
    if not np.any(keep):
        raise ValueError("degenerate data: all Gram eigenvalues below cutoff")
    gram_values = np.sqrt(evals[keep])
    q = q[:, keep]

    r = select_rank(gram_values, eta)
    if max_rank is not None:
        if max_rank < 1:
            raise ValueError("max_rank must be >= 1")
        r = min(r, max_rank)
    q_r = q[:, :r]
    s_r = gram_values[:r]

    lift = q_r / s_r                      # Q_r S_r^{-1}
    k_hat = lift.T @ g10 @ lift

    pairs = linalg.eig_general(k_hat, want_left=True)
    lam, w, xi = pairs.eigenvalues, pairs.right_vectors, pairs.left_vectors

    # Normalize left eigenvectors so xi_k^H w_k = 1.
    inner = np.einsum("ij,ij->j", xi.conj(), w)
    if np.any(np.abs(inner) < 1e-14):
        raise scipy.linalg.LinAlgError(
            "reduced Koopman operator is numerically defective: left/right "
            "eigenvector pairing is singular"
        )
    xi = xi / inner.conj()

    koopman_modes = pair.x0.astype(complex) @ lift @ xi.conj()

    return KdmdModel(
        kernel=kernel,
        rank=r,
        gram_vectors=q_r,
        gram_values=s_r,
        eigenvalues=lam,
        right_vectors=w,
        left_vectors=xi,
        koopman_modes=koopman_modes,
        reference_snapshots=pair.x0,
        dt=pair.dt,
        t0=pair.t0,
    )


def eigenfunction_values(model, state):
    """Koopman eigenfunction values ``phi_k(u)`` at one state vector.

    ``phi_k(u) = (psi(u) Psi_0^T)(Q_r S_r^{-1} w_k)`` where the row
    ``psi(u) Psi_0^T`` is the kernel evaluated against every reference
    snapshot.
    """
    state = np.asarray(state, dtype=float)
    if state.shape != (model.reference_snapshots.shape[0],):
        raise ValueError(
            f"state has shape {state.shape}, expected "
            f"({model.reference_snapshots.shape[0]},)"
        )
    krow = kernel_cross(model.kernel, state[:, None], model.reference_snapshots)
    return (krow @ model._lift @ model.right_vectors).ravel()


def kdmd_predict(model, u0, steps, iterated=False):
    """Predict states at the given step indices from the anchor state ``u0``.

    Default: ``u_i = Re( sum_k lambda_k^i v_k phi_k(u0) )``. With
    ``iterated=True`` the eigenfunctions are re-evaluated at each predicted
    state and a single eigenvalue power is applied per step (error compounds
    nonlinearly; off by default).
    """
    steps = np.asarray(steps)
    if steps.size and (np.any(steps < 0) or not np.issubdtype(steps.dtype, np.integer)):
        raise ValueError("step indices must be non-negative integers")

    if not iterated:
        phi0 = eigenfunction_values(model, u0)
        powers = model.eigenvalues[:, None] ** steps[None, :]
        states = model.koopman_modes @ (phi0[:, None] * powers)
        imag_max = float(np.max(np.abs(states.imag), initial=0.0))
        logger.debug("kdmd_predict: max imaginary residual %.3e", imag_max)
        return states.real

    horizon = int(steps.max()) if steps.size else 0
    current = np.asarray(u0, dtype=float)
    cache = {0: current}
    for i in range(1, horizon + 1):
        phi = eigenfunction_values(model, current)
        current = (model.koopman_modes @ (model.eigenvalues * phi)).real
        cache[i] = current
    return np.column_stack([cache[int(i)] for i in steps]) if steps.size else np.empty(
        (model.koopman_modes.shape[0], 0)
    )
