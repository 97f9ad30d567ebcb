"""Exact and projected dynamic mode decomposition.

Given a pair of snapshot matrices ``X0 = [u_0 ... u_{m-1}]`` and
``X1 = [u_1 ... u_m]`` sampled on a uniform time grid, the fit finds the
eigenpairs of the best-fit linear one-step operator ``A = X1 pinv(X0)``
without ever forming A: a compact SVD ``X0 = U S V^T`` is truncated by the
energy criterion, the small projected operator ``U_r^T X1 V_r S_r^{-1}`` is
eigendecomposed, and the spatial modes are lifted back to state space either
through ``X1`` (exact modes, eigenvectors of A) or through ``U_r``
(projected modes). Reconstruction at step i is ``sum_k phi_k b_k lambda_k^i``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from . import linalg

logger = logging.getLogger(__name__)

#: Eigenvalues with |lambda| below this fraction of max|lambda| get their
#: exact mode replaced by the projected mode (the 1/lambda lift is singular).
SMALL_EIGENVALUE_FRACTION = 1e-12


@dataclass(frozen=True)
class SnapshotPair:
    """Aligned snapshot matrices ``x0`` (steps 0..m-1) and ``x1`` (steps 1..m).

    ``dt`` is the uniform step between consecutive columns, ``t0`` the time
    of ``x0``'s first column.
    """

    x0: np.ndarray
    x1: np.ndarray
    dt: float = 1.0
    t0: float = 0.0

    def __post_init__(self):
        x0 = np.asarray(self.x0, dtype=float)
        x1 = np.asarray(self.x1, dtype=float)
        if x0.ndim != 2 or x0.shape != x1.shape:
            raise ValueError("x0 and x1 must be 2-D with identical shapes")
        if not (np.all(np.isfinite(x0)) and np.all(np.isfinite(x1))):
            raise ValueError("snapshot matrices must be finite")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "x1", x1)

    @classmethod
    def from_trajectory(cls, states, dt=1.0, t0=0.0):
        """Build the pair from one trajectory matrix of shape (n, m+1)."""
        states = np.asarray(states, dtype=float)
        if states.ndim != 2 or states.shape[1] < 2:
            raise ValueError("trajectory needs at least 2 columns")
        return cls(states[:, :-1], states[:, 1:], dt=dt, t0=t0)

    @property
    def n(self):
        return self.x0.shape[0]

    @property
    def m(self):
        return self.x0.shape[1]


def select_rank(singular_values, eta):
    """Smallest r whose discarded tail mass fraction is at most ``eta``.

    ``sum(s[r:]) / sum(s) <= eta`` with s descending and positive;
    ``eta = 0`` keeps everything.
    """
    s = np.asarray(singular_values, dtype=float)
    if s.size == 0:
        raise ValueError("singular value vector is empty")
    if np.any(s <= 0) or np.any(np.diff(s) > 0):
        raise ValueError("singular values must be positive and descending")
    if not 0.0 <= eta < 1.0:
        raise ValueError("eta must lie in [0, 1)")
    total = s.sum()
    tails = total - np.cumsum(s)
    return int(np.argmax(tails <= eta * total)) + 1


@dataclass(frozen=True)
class DmdModel:
    """Fitted DMD operator spectrum.

    ``modes`` columns have unit 2-norm (scale absorbed into ``amplitudes``).
    ``singular_values`` keeps the full numerical-rank spectrum of x0 for
    diagnostics; ``rank`` is the retained truncation rank.
    ``projected_fallback`` lists mode indices where a near-zero eigenvalue
    forced the projected form of an otherwise exact mode.
    """

    rank: int
    eigenvalues: np.ndarray
    modes: np.ndarray
    amplitudes: np.ndarray
    mode_kind: str
    singular_values: np.ndarray
    dt: float = 1.0
    t0: float = 0.0
    projected_fallback: tuple = field(default=())

    def continuous_frequencies(self):
        """Diagnostic continuous-time exponents ``log(lambda)/dt``."""
        return np.log(self.eigenvalues.astype(complex)) / self.dt


def _unit_columns(matrix):
    norms = np.linalg.norm(matrix, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    return matrix / safe


def _amplitudes_first(modes, u0):
    return linalg.least_squares_solve(modes, u0.astype(complex))


def _amplitudes_all(modes, eigenvalues, x0):
    # Normal equations of min_b sum_i ||Phi diag(lambda^i) b - u_i||^2,
    # an r x r system independent of n and m.
    m = x0.shape[1]
    vander = np.vander(eigenvalues, m, increasing=True)  # (r, m)
    p = (modes.conj().T @ modes) * (vander @ vander.conj().T).conj()
    q = np.conj(np.diag(vander @ x0.T @ modes))
    return linalg.least_squares_solve(p, q)


def fit_exact_dmd(pair, eta=0.0, max_rank=None, mode_kind="exact", amplitudes="first"):
    """Fit a DMD model to a snapshot pair.

    Parameters
    ----------
    pair : SnapshotPair
    eta : float
        Energy-criterion truncation tolerance in [0, 1) applied to the
        singular values of x0.
    max_rank : int or None
        Optional hard cap applied after the energy criterion.
    mode_kind : "exact" or "projected"
        Exact modes live in the image of x1 and are eigenvectors of the
        one-step operator; projected modes are lifted from the left singular
        vectors of x0.
    amplitudes : "first" or "all"
        Fit the coefficient vector b against u_0 only (default) or against
        every snapshot column by least squares.
    """
    if mode_kind not in ("exact", "projected"):
        raise ValueError("mode_kind must be 'exact' or 'projected'")
    if amplitudes not in ("first", "all"):
        raise ValueError("amplitudes must be 'first' or 'all'")
    if np.linalg.norm(pair.x0) == 0.0 or np.linalg.norm(pair.x1) == 0.0:
        raise ValueError("zero snapshot matrix")

    svd = linalg.compact_svd(pair.x0)
    if svd.numerical_rank == 0:
        raise ValueError("snapshot matrix has numerical rank 0")
    r = select_rank(svd.singular_values, eta)
    if max_rank is not None:
        if max_rank < 1:
            raise ValueError("max_rank must be >= 1")
        r = min(r, max_rank)

    u_r = svd.left_vectors[:, :r]
    s_r = svd.singular_values[:r]
    v_r = svd.right_vectors[:, :r]

    lift = (pair.x1 @ v_r) / s_r          # X1 V_r S_r^{-1}, shape (n, r)
    a_hat = u_r.T @ lift                  # U_r^T X1 V_r S_r^{-1}
    pairs = linalg.eig_general(a_hat)
    lam, w = pairs.eigenvalues, pairs.right_vectors

    fallback = ()
    if mode_kind == "exact":
        modes = lift.astype(complex) @ w
        lam_max = np.max(np.abs(lam))
        small = np.abs(lam) < SMALL_EIGENVALUE_FRACTION * lam_max
        if np.any(small):
            fallback = tuple(int(i) for i in np.flatnonzero(small))
            projected = u_r.astype(complex) @ w
            modes[:, small] = projected[:, small]
            logger.warning(
                "exact DMD: %d near-zero eigenvalue(s); projected modes "
                "substituted at indices %s", len(fallback), fallback,
            )
        nonsmall = ~small
        modes[:, nonsmall] = modes[:, nonsmall] / lam[nonsmall]
    else:
        modes = u_r.astype(complex) @ w

    modes = _unit_columns(modes)
    if amplitudes == "first":
        b = _amplitudes_first(modes, pair.x0[:, 0])
    else:
        b = _amplitudes_all(modes, lam, pair.x0)

    return DmdModel(
        rank=r,
        eigenvalues=lam,
        modes=modes,
        amplitudes=b,
        mode_kind=mode_kind,
        singular_values=svd.singular_values,
        dt=pair.dt,
        t0=pair.t0,
        projected_fallback=fallback,
    )


def refit_amplitudes(model, state):
    """New model with the coefficient vector b refit against ``state``.

    Used to re-anchor reconstruction at the end of the training window:
    with ``b' = pinv(Phi) u_m``, step i of the returned model approximates
    ``u_{m+i}``. The paper anchors at u_0; this variant trades its global
    fit for lower extrapolation error right after the window.
    """
    state = np.asarray(state)
    if state.shape != (model.modes.shape[0],):
        raise ValueError("anchor state dimension does not match the modes")
    b = _amplitudes_first(model.modes, state)
    return DmdModel(
        rank=model.rank,
        eigenvalues=model.eigenvalues,
        modes=model.modes,
        amplitudes=b,
        mode_kind=model.mode_kind,
        singular_values=model.singular_values,
        dt=model.dt,
        t0=model.t0,
        projected_fallback=model.projected_fallback,
    )


def reconstruct(model, step_index):
    """State at step ``step_index``: real part of ``Phi (b * lambda^i)``."""
    if step_index < 0 or int(step_index) != step_index:
        raise ValueError("step index must be a non-negative integer")
    coeff = model.amplitudes * model.eigenvalues ** int(step_index)
    state = model.modes @ coeff
    imag_max = float(np.max(np.abs(state.imag), initial=0.0))
    logger.debug("reconstruct step %d: max imaginary residual %.3e", step_index, imag_max)
    return state.real


def predict_series(model, steps):
    """Columnwise reconstruction at each step index in ``steps``."""
    steps = np.asarray(steps)
    if steps.size == 0:
        return np.empty((model.modes.shape[0], 0))
    if np.any(steps < 0) or not np.issubdtype(steps.dtype, np.integer):
        raise ValueError("step indices must be non-negative integers")
    powers = model.eigenvalues[:, None] ** steps[None, :]
    states = model.modes @ (model.amplitudes[:, None] * powers)
    imag_max = float(np.max(np.abs(states.imag), initial=0.0))
    logger.debug("predict_series: max imaginary residual %.3e", imag_max)
    return states.real
