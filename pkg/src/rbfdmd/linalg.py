"""Dense decomposition primitives with explicit numerical contracts.

Thin wrappers around LAPACK (via numpy/scipy) that pin down validation,
ordering, and fallback behavior for the rest of the package:

* ``compact_svd``: compact SVD truncated at a relative numerical-rank cutoff.
* ``eig_general``: full eigendecomposition, optionally with left eigenvectors,
  deterministically ordered.
* ``least_squares_solve``: minimum-norm least-squares solve.
* ``spd_solve``: Cholesky solve with ridge shift and a flagged least-squares
  fallback for matrices that are not numerically positive definite.

All functions are pure and safe to call concurrently.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg


class NumericsWarning(UserWarning):
    """A numerical fallback or degraded-accuracy path was taken."""


#: Relative cutoff for the numerical rank: sigma_i > RANK_TOLERANCE * sigma_1.
RANK_TOLERANCE = 1e-12


def _require_finite(a, name):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite entries")


@dataclass(frozen=True)
class CompactSvd:
    """Compact SVD ``M = U diag(s) V^T`` truncated at the numerical rank.

    left_vectors: (n, d) with orthonormal columns.
    singular_values: (d,) descending, strictly positive.
    right_vectors: (m, d) with orthonormal columns.
    """

    left_vectors: np.ndarray
    singular_values: np.ndarray
    right_vectors: np.ndarray

    @property
    def numerical_rank(self):
        return self.singular_values.shape[0]


@dataclass(frozen=True)
class EigenPairs:
    """Eigenvalues and right (and optionally left) eigenvectors.

    Eigenvalues are sorted by descending modulus, ties broken by descending
    imaginary part, so conjugate pairs appear with the +i member first.
    Left eigenvectors satisfy ``xi_k^H A = lambda_k xi_k^H`` and share the
    ordering of the eigenvalues.
    """

    eigenvalues: np.ndarray
    right_vectors: np.ndarray
    left_vectors: np.ndarray | None = None


def _eig_order(eigenvalues):
    # lexsort uses the last key as primary.
    return np.lexsort((-eigenvalues.imag, -np.abs(eigenvalues)))


def compact_svd(matrix, rank_tolerance=RANK_TOLERANCE):
    """Compact SVD of a real matrix, truncated at the numerical rank.

    Singular values below ``rank_tolerance * sigma_1`` are discarded.
    A zero matrix yields numerical rank 0 (empty factors).
    """
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2:
        raise ValueError("compact_svd expects a 2-D matrix")
    _require_finite(matrix, "matrix")
    if rank_tolerance < 0:
        raise ValueError("rank_tolerance must be >= 0")

    u, s, vt = np.linalg.svd(matrix, full_matrices=False)
    if s.size == 0 or s[0] <= 0.0:
        d = 0
    else:
        d = int(np.count_nonzero(s > rank_tolerance * s[0]))
    return CompactSvd(u[:, :d], s[:d], vt[:d, :].T)


def eig_general(matrix, want_left=False):
    """All eigenpairs of a real (or complex) square matrix.

    Non-convergence of the QR iteration raises ``scipy.linalg.LinAlgError``;
    a NaN result is never returned silently.
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError("eig_general expects a square matrix")
    _require_finite(matrix, "matrix")

    if want_left:
        w, vl, vr = scipy.linalg.eig(matrix, left=True, right=True)
    else:
        w, vr = scipy.linalg.eig(matrix, left=False, right=True)
        vl = None
    if not np.all(np.isfinite(w)):
        raise scipy.linalg.LinAlgError("eigendecomposition produced non-finite eigenvalues")

    order = _eig_order(w)
    return EigenPairs(
        eigenvalues=w[order],
        right_vectors=vr[:, order],
        left_vectors=None if vl is None else vl[:, order],
    )


def least_squares_solve(a, b):
    """Minimum-norm least-squares solution ``X = pinv(A) B``.

    ``b`` may be a vector or a matrix, real or complex.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2:
        raise ValueError("least_squares_solve expects a 2-D coefficient matrix")
    if b.shape[0] != a.shape[0]:
        raise ValueError(
            f"row count mismatch: A has {a.shape[0]} rows, B has {b.shape[0]}"
        )
    _require_finite(a, "A")
    _require_finite(b, "B")
    x, _, _, _ = np.linalg.lstsq(a, b, rcond=None)
    return x


def spd_solve(gram, b, ridge=0.0, block_size=8192):
    """Solve ``(G + ridge I) X = B`` for symmetric G via Cholesky.

    One factorization serves every column of ``B``; columns are processed in
    blocks of ``block_size`` to bound temporaries. If the shifted matrix is
    not numerically positive definite the solve falls back to
    :func:`least_squares_solve` and a :class:`NumericsWarning` is emitted.
    """
    gram = np.asarray(gram, dtype=float)
    b = np.asarray(b, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
        raise ValueError("spd_solve expects a square matrix")
    if b.shape[0] != gram.shape[0]:
        raise ValueError("right-hand side row count does not match the matrix")
    if np.max(np.abs(gram - gram.T), initial=0.0) > 1e-12:
        raise ValueError("matrix is not symmetric within 1e-12")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")
    _require_finite(gram, "G")
    _require_finite(b, "B")

    shifted = gram if ridge == 0.0 else gram + ridge * np.eye(gram.shape[0])
    try:
        factor = scipy.linalg.cho_factor(shifted, lower=True)
    except scipy.linalg.LinAlgError:
        warnings.warn(
            "Cholesky factorization failed (matrix not numerically positive "
            "definite); falling back to least squares",
            NumericsWarning,
            stacklevel=2,
        )
        return least_squares_solve(shifted, b)

    if b.ndim == 1:
        return scipy.linalg.cho_solve(factor, b)
    out = np.empty_like(b)
    for start in range(0, b.shape[1], block_size):
        stop = min(start + block_size, b.shape[1])
        out[:, start:stop] = scipy.linalg.cho_solve(factor, b[:, start:stop])
    return out
