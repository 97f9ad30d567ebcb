"""Radial basis function interpolation over the parameter domain.

An interpolant ``f(x) ~ sum_i w_i kappa(||T(x) - T(x_i)||)`` is fit by
solving one symmetric Gram system ``(G + ridge I) W = targets``; a single
factorization serves every target column, so the same machinery interpolates
one scalar function or every entry of a stacked snapshot matrix at once.

``T`` is an optional per-dimension parameter transform (identity, log10, or
affine) applied before distances are taken.

Numerics: Gaussian/IMQ Gram matrices are positive definite for distinct
centers and go through Cholesky. Kernels that are only conditionally positive
definite (splines, multiquadric), or positive-definite kernels driven into
the flat regime by a small shape factor, fail the factorization; the solve
then falls back to least squares and, if the interpolation property is still
violated on a small system, to an extended-precision solve (the weights of a
nearly flat kernel are astronomically large and cancel at evaluation time,
which float64 cannot represent). All fallbacks emit a NumericsWarning.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import mpmath
import numpy as np
from scipy.spatial.distance import cdist, pdist, squareform

from . import linalg
from .linalg import NumericsWarning

#: Paper default: inverse multiquadric with shape factor 1/30.
DEFAULT_SHAPE_FACTOR = 1.0 / 30.0

#: Relative residual at centers above which a ridge-free fit is considered to
#: have lost the interpolation property.
INTERPOLATION_RTOL = 1e-8

#: Extended-precision rescue is attempted only below these sizes.
EXACT_SOLVE_MAX_CENTERS = 256
EXACT_SOLVE_MAX_TARGETS = 64

KERNEL_KINDS = (
    "linear_spline",
    "cubic_spline",
    "thin_plate",
    "multiquadric",
    "inverse_multiquadric",
    "gaussian",
)


@dataclass(frozen=True)
class RbfKernel:
    """One radial kernel: ``kind`` plus shape factor ``eps`` where applicable
    and even exponent ``k`` for thin-plate splines."""

    kind: str = "inverse_multiquadric"
    eps: float = DEFAULT_SHAPE_FACTOR
    k: int = 2

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind in ("multiquadric", "inverse_multiquadric", "gaussian"):
            if self.eps <= 0:
                raise ValueError("shape factor eps must be positive")
        if self.kind == "thin_plate":
            if self.k < 2 or self.k % 2 != 0:
                raise ValueError("thin-plate exponent k must be an even integer >= 2")


def kernel_value(kernel, r):
    """Evaluate the kernel at radius ``r`` (scalar or array, r >= 0).

    Thin-plate returns its limit value 0 at r = 0.
    """
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be non-negative")
    kind = kernel.kind
    if kind == "linear_spline":
        out = r
    elif kind == "cubic_spline":
        out = r**3
    elif kind == "thin_plate":
        safe = np.where(r > 0, r, 1.0)
        out = np.where(r > 0, safe**kernel.k * np.log(safe), 0.0)
    elif kind == "multiquadric":
        out = np.sqrt(1.0 + (kernel.eps * r) ** 2)
    elif kind == "inverse_multiquadric":
        out = 1.0 / np.sqrt(1.0 + (kernel.eps * r) ** 2)
    else:  # gaussian
        out = np.exp(-((kernel.eps * r) ** 2))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ParamTransform:
    """Coordinate map applied to parameters before distances are computed.

    ``identity``, ``log10`` (strictly positive coordinates required), or
    ``affine`` with per-dimension ``scale`` and ``shift``:
    ``T(x) = x * scale + shift``.
    """

    kind: str = "identity"
    scale: tuple = ()
    shift: tuple = ()

    def __post_init__(self):
        if self.kind not in ("identity", "log10", "affine"):
            raise ValueError(f"unknown transform kind {self.kind!r}")

    def apply(self, points):
        points = np.asarray(points, dtype=float)
        if self.kind == "identity":
            return points
        if self.kind == "log10":
            if np.any(points <= 0):
                raise ValueError("log10 transform requires strictly positive coordinates")
            return np.log10(points)
        scale = np.asarray(self.scale, dtype=float)
        shift = np.asarray(self.shift, dtype=float)
        return points * scale + shift

    @classmethod
    def to_unit_interval(cls, lo, hi):
        """Affine map sending [lo, hi] to [0, 1] per dimension."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        span = hi - lo
        if np.any(span <= 0):
            raise ValueError("upper bounds must exceed lower bounds")
        return cls(kind="affine", scale=tuple(1.0 / span), shift=tuple(-lo / span))


@dataclass(frozen=True)
class RbfInterpolant:
    """Fitted interpolation network.

    ``weights`` has one column per interpolated scalar target; dtype is
    float64 on the fast path or object (mpmath numbers) when the
    extended-precision fallback was taken. ``gram`` is kept for diagnostics
    and for the transform-invariance contract.
    """

    centers: np.ndarray
    transformed_centers: np.ndarray
    kernel: RbfKernel
    transform: ParamTransform
    weights: np.ndarray
    ridge: float
    gram: np.ndarray

    @property
    def n_centers(self):
        return self.centers.shape[0]

    @property
    def n_targets(self):
        return self.weights.shape[1]

    def __call__(self, x):
        return evaluate(self, x)


def gram_matrix(kernel, points):
    """Symmetric Gram matrix of kernel values between transformed points."""
    return kernel_value(kernel, squareform(pdist(points)))


def _as_centers(centers):
    centers = np.asarray(centers, dtype=float)
    if centers.ndim == 1:
        centers = centers[:, None]
    if centers.ndim != 2:
        raise ValueError("centers must be a 1-D or 2-D array")
    return centers


_MP_KERNELS = {
    "linear_spline": lambda r, k: r,
    "cubic_spline": lambda r, k: r**3,
    "thin_plate": lambda r, k: r**k.k * mpmath.log(r) if r > 0 else mpmath.mpf(0),
    "multiquadric": lambda r, k: mpmath.sqrt(1 + (k.eps * r) ** 2),
    "inverse_multiquadric": lambda r, k: 1 / mpmath.sqrt(1 + (k.eps * r) ** 2),
    "gaussian": lambda r, k: mpmath.exp(-((k.eps * r) ** 2)),
}


def _mp_distance(a, b):
    return mpmath.sqrt(mpmath.fsum((mpmath.mpf(x) - mpmath.mpf(y)) ** 2 for x, y in zip(a, b)))


def _mp_kernel_matrix(kernel, points_a, points_b):
    fn = _MP_KERNELS[kernel.kind]
    return mpmath.matrix(
        [[fn(_mp_distance(a, b), kernel) for b in points_b] for a in points_a]
    )


def _exact_solve(kernel, tpoints, targets, ridge):
    """Solve the Gram system in extended precision; returns an object array."""
    n_p = tpoints.shape[0]
    out = np.empty((n_p, targets.shape[1]), dtype=object)
    with mpmath.workdps(max(60, 20 + 4 * n_p)):
        g = _mp_kernel_matrix(kernel, tpoints, tpoints)
        if ridge:
            for i in range(n_p):
                g[i, i] += mpmath.mpf(ridge)
        for j in range(targets.shape[1]):
            sol = mpmath.lu_solve(g, mpmath.matrix(targets[:, j].tolist()))
            for i in range(n_p):
                out[i, j] = sol[i]
    return out


def fit(centers, targets, kernel=RbfKernel(), transform=ParamTransform(), ridge=0.0,
        block_size=8192):
    """Fit RBF weights for every target column with one shared factorization.

    ``centers``: (n_p, p) parameter samples (1-D accepted for p=1);
    ``targets``: (n_p, N) values, one column per interpolated scalar.
    Centers must be pairwise distinct after the transform.
    """
    centers = _as_centers(centers)
    targets = np.asarray(targets, dtype=float)
    if targets.ndim == 1:
        targets = targets[:, None]
    if targets.shape[0] != centers.shape[0]:
        raise ValueError("targets must have one row per center")
    if not np.all(np.isfinite(targets)):
        raise ValueError("targets must be finite")
    if ridge < 0:
        raise ValueError("ridge must be >= 0")

    tcenters = transform.apply(centers)
    if centers.shape[0] > 1 and np.min(pdist(tcenters)) <= 0.0:
        raise ValueError("duplicate centers after transform")

    gram = gram_matrix(kernel, tcenters)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", NumericsWarning)
        weights = linalg.spd_solve(gram, targets, ridge=ridge, block_size=block_size)
        fell_back = any(issubclass(w.category, NumericsWarning) for w in caught)
    for w in caught:
        warnings.warn_explicit(w.message, w.category, w.filename, w.lineno)

    if fell_back and ridge == 0.0:
        scale = np.max(np.abs(targets), initial=0.0)
        residual = np.max(np.abs(gram @ weights - targets), initial=0.0)
        if scale > 0 and residual > INTERPOLATION_RTOL * scale:
            if (centers.shape[0] <= EXACT_SOLVE_MAX_CENTERS
                    and targets.shape[1] <= EXACT_SOLVE_MAX_TARGETS):
                warnings.warn(
                    "least-squares weights violate the interpolation property "
                    f"(relative residual {residual / scale:.2e}); re-solving the "
                    "Gram system in extended precision",
                    NumericsWarning,
                    stacklevel=2,
                )
                weights = _exact_solve(kernel, tcenters, targets, ridge)
            else:
                warnings.warn(
                    "Gram system is too ill-conditioned for float64 and too large "
                    "for the extended-precision fallback; interpolation property "
                    f"not met (relative residual {residual / scale:.2e})",
                    NumericsWarning,
                    stacklevel=2,
                )

    return RbfInterpolant(
        centers=centers,
        transformed_centers=tcenters,
        kernel=kernel,
        transform=transform,
        weights=weights,
        ridge=ridge,
        gram=gram,
    )


def _evaluate_exact(interp, tx):
    n_q = tx.shape[0]
    n_t = interp.weights.shape[1]
    out = np.empty((n_q, n_t), dtype=float)
    with mpmath.workdps(max(60, 20 + 4 * interp.n_centers)):
        k = _mp_kernel_matrix(interp.kernel, tx, interp.transformed_centers)
        for i in range(n_q):
            for j in range(n_t):
                acc = mpmath.fsum(
                    k[i, c] * interp.weights[c, j] for c in range(interp.n_centers)
                )
                out[i, j] = float(acc)
    return out


def evaluate(interp, x):
    """Evaluate the interpolant: ``sum_i w_i kappa(||T(x) - T(x_i)||)``.

    ``x`` of shape (p,) returns an (N,) vector; (q, p) returns (q, N).
    """
    x = np.asarray(x, dtype=float)
    single = x.ndim <= 1
    pts = np.atleast_2d(x)
    if pts.shape[1] != interp.centers.shape[1]:
        raise ValueError(
            f"query has {pts.shape[1]} coordinates, centers have "
            f"{interp.centers.shape[1]}"
        )
    if not np.all(np.isfinite(pts)):
        raise ValueError("query point must be finite")
    tx = interp.transform.apply(pts)

    if interp.weights.dtype == object:
        values = _evaluate_exact(interp, tx)
    else:
        k = kernel_value(interp.kernel, cdist(tx, interp.transformed_centers))
        values = k @ interp.weights
    return values[0] if single else values
