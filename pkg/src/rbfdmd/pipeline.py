"""Offline/online parametric surrogate pipeline.

Offline (:func:`train`): snapshot matrices at the training parameter samples
are flattened column-major into one row each and an RBF network is fit over
all n*(m+1) entries simultaneously. Online (:func:`predict`): the network
predicts the snapshot matrix at a new parameter value, the matrix is split
into an aligned pair, a DMD variant is fit on it, and the trajectory is
extrapolated beyond the training time window. The DMD is refit for every
query; nothing is cached across parameter values.

:func:`error_report` implements the relative and time-average relative error
metrics used to judge the surrogate against a reference simulation.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import rbf
from .dmd import SnapshotPair, fit_exact_dmd, predict_series, refit_amplitudes
from .kdmd import KernelSpec, fit_kernel_dmd, kdmd_predict


class ExtrapolationWarning(UserWarning):
    """A query parameter lies outside the training sample range."""


@dataclass(frozen=True)
class TrainingSet:
    """Training parameters and their snapshot matrices.

    params: (n_p, p) sample matrix, rows distinct.
    snapshots: list of n_p state trajectories, each (n, m+1), sharing the
        uniform time grid t0, t0+dt, ..., t_snap_end.
    """

    params: np.ndarray
    snapshots: list
    dt: float
    t0: float = 0.0
    t_snap_end: float | None = None

    def __post_init__(self):
        params = np.asarray(self.params, dtype=float)
        if params.ndim == 1:
            params = params[:, None]
        if params.ndim != 2 or params.shape[0] == 0:
            raise ValueError("params must be a non-empty (n_p, p) array")
        if len(self.snapshots) != params.shape[0]:
            raise ValueError("one snapshot matrix per parameter sample required")
        snaps = [np.asarray(s, dtype=float) for s in self.snapshots]
        shape = snaps[0].shape
        if len(shape) != 2 or shape[1] < 2:
            raise ValueError("snapshot matrices must be (n, m+1) with m >= 1")
        for idx, s in enumerate(snaps):
            if s.shape != shape:
                raise ValueError(
                    f"snapshot matrix {idx} has shape {s.shape}, expected {shape}")
            if not np.all(np.isfinite(s)):
                raise ValueError(f"snapshot matrix {idx} contains non-finite entries")
        if params.shape[0] > 1:
            from scipy.spatial.distance import pdist
            if np.min(pdist(params)) <= 0:
                raise ValueError("parameter samples must be distinct")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        end = self.t0 + (shape[1] - 1) * self.dt
        t_end = end if self.t_snap_end is None else self.t_snap_end
        if abs(t_end - end) > 1e-9 * max(1.0, abs(end)):
            raise ValueError(
                f"t_snap_end={t_end} inconsistent with t0 + m*dt = {end}")
        object.__setattr__(self, "params", params)
        object.__setattr__(self, "snapshots", snaps)
        object.__setattr__(self, "t_snap_end", t_end)

    @property
    def n_samples(self):
        return self.params.shape[0]

    @property
    def shape(self):
        return self.snapshots[0].shape


@dataclass(frozen=True)
class DmdConfig:
    """Which DMD to run online and how to truncate it.

    ``anchor`` selects where the extrapolation coefficients are fit: at the
    first predicted snapshot (the paper's reconstruction) or refit at the
    last one, which reduces the phase error right after the training window.
    """

    variant: str = "exact"          # "exact" | "kernel"
    eta: float = 0.0
    max_rank: int | None = None
    mode_kind: str = "exact"        # exact-DMD mode flavor
    kernel: KernelSpec | None = None  # kernel-DMD kernel (None -> gaussian/median)
    anchor: str = "first"           # "first" | "last"

    def __post_init__(self):
        if self.variant not in ("exact", "kernel"):
            raise ValueError("dmd variant must be 'exact' or 'kernel'")
        if not 0.0 <= self.eta < 1.0:
            raise ValueError("eta must lie in [0, 1)")
        if self.anchor not in ("first", "last"):
            raise ValueError("anchor must be 'first' or 'last'")


@dataclass(frozen=True)
class ParametricRom:
    """Trained surrogate: an RBF interpolant over stacked snapshot entries
    plus the DMD configuration applied online."""

    interpolant: rbf.RbfInterpolant
    dmd_config: DmdConfig
    shape: tuple
    dt: float
    t0: float = 0.0

    @property
    def n_params(self):
        return self.interpolant.centers.shape[1]


@dataclass(frozen=True)
class ErrorReport:
    """Relative errors of predicted outputs against a reference.

    per_output_per_time[i, j] = |y_i(t_j) - yhat_i(t_j)| / max_j |y_i(t_j)|;
    time_average is its row mean.
    """

    per_output_per_time: np.ndarray
    time_average: np.ndarray
    denominators: np.ndarray

    @property
    def n_times(self):
        return self.per_output_per_time.shape[1]


def train(training_set, rbf_kernel=None, transform=None, ridge=0.0,
          dmd_config=DmdConfig()):
    """Fit the snapshot-matrix map over the parameter domain.

    Each training snapshot matrix is flattened column-major into one row of
    the RBF target block, so a single shared Gram factorization serves all
    n*(m+1) entries.
    """
    rbf_kernel = rbf_kernel if rbf_kernel is not None else rbf.RbfKernel()
    transform = transform if transform is not None else rbf.ParamTransform()
    targets = np.vstack([s.ravel(order="F") for s in training_set.snapshots])
    interpolant = rbf.fit(training_set.params, targets, kernel=rbf_kernel,
                          transform=transform, ridge=ridge)
    return ParametricRom(
        interpolant=interpolant,
        dmd_config=dmd_config,
        shape=training_set.shape,
        dt=training_set.dt,
        t0=training_set.t0,
    )


def predict_snapshots(rom, mu_star):
    """Evaluate the snapshot-matrix map at a new parameter value.

    Queries outside the training range are permitted but flagged with an
    ExtrapolationWarning.
    """
    mu = np.atleast_1d(np.asarray(mu_star, dtype=float))
    centers = rom.interpolant.centers
    if np.any(mu < centers.min(axis=0)) or np.any(mu > centers.max(axis=0)):
        warnings.warn(
            f"parameter {mu.tolist()} lies outside the training range; "
            "prediction is an extrapolation",
            ExtrapolationWarning,
            stacklevel=2,
        )
    flat = rbf.evaluate(rom.interpolant, mu)
    return np.asarray(flat, dtype=float).reshape(rom.shape, order="F")


def split(x_hat, dt=1.0, t0=0.0):
    """Split a predicted trajectory matrix into the aligned snapshot pair."""
    x_hat = np.asarray(x_hat, dtype=float)
    if x_hat.ndim != 2 or x_hat.shape[1] < 2:
        raise ValueError("snapshot matrix needs at least 2 columns")
    return SnapshotPair(x_hat[:, :-1], x_hat[:, 1:], dt=dt, t0=t0)


def fit_online_dmd(rom, x_hat):
    """Fit the configured DMD variant on a predicted snapshot matrix."""
    pair = split(x_hat, dt=rom.dt, t0=rom.t0)
    cfg = rom.dmd_config
    if cfg.variant == "exact":
        return fit_exact_dmd(pair, eta=cfg.eta, max_rank=cfg.max_rank,
                             mode_kind=cfg.mode_kind)
    kernel = cfg.kernel if cfg.kernel is not None else KernelSpec(kind="gaussian")
    return fit_kernel_dmd(pair, kernel=kernel, eta=cfg.eta, max_rank=cfg.max_rank)


def extend_with_dmd(rom, x_hat, horizon_steps):
    """Append ``horizon_steps`` DMD-extrapolated columns to a predicted matrix."""
    if horizon_steps < 0:
        raise ValueError("horizon_steps must be >= 0")
    x_hat = np.asarray(x_hat, dtype=float)
    if horizon_steps == 0:
        return x_hat
    model = fit_online_dmd(rom, x_hat)
    cfg = rom.dmd_config
    if cfg.anchor == "last":
        steps = np.arange(1, horizon_steps + 1)
        anchor_state = x_hat[:, -1]
    else:
        m_plus_1 = x_hat.shape[1]
        steps = np.arange(m_plus_1, m_plus_1 + horizon_steps)
        anchor_state = x_hat[:, 0]
    if cfg.variant == "exact":
        if cfg.anchor == "last":
            model = refit_amplitudes(model, anchor_state)
        extension = predict_series(model, steps)
    else:
        extension = kdmd_predict(model, anchor_state, steps)
    return np.concatenate([x_hat, extension], axis=1)


def predict(rom, mu_star, horizon_steps=0):
    """Full online query: RBF snapshot prediction over the training window,
    then DMD extrapolation ``horizon_steps`` further."""
    x_hat = predict_snapshots(rom, mu_star)
    return extend_with_dmd(rom, x_hat, horizon_steps)


def error_report(reference, predicted):
    """Relative error per output and time plus its time average.

    The denominator for output i is ``max_j |reference[i, j]|``; an all-zero
    reference row is rejected.
    """
    reference = np.asarray(reference, dtype=float)
    predicted = np.asarray(predicted, dtype=float)
    if reference.ndim == 1:
        reference = reference[None, :]
    if predicted.ndim == 1:
        predicted = predicted[None, :]
    if reference.shape != predicted.shape:
        raise ValueError(
            f"shape mismatch: reference {reference.shape}, predicted {predicted.shape}")
    denominators = np.max(np.abs(reference), axis=1)
    if np.any(denominators == 0.0):
        rows = np.flatnonzero(denominators == 0.0).tolist()
        raise ValueError(f"reference rows {rows} are identically zero")
    eps = np.abs(reference - predicted) / denominators[:, None]
    return ErrorReport(
        per_output_per_time=eps,
        time_average=eps.mean(axis=1),
        denominators=denominators,
    )
