"""TOML run configuration: parsing, validation, and factory helpers.

One config file drives the whole experiment: which benchmark model, how the
parameter domain is sampled, the time grids, the RBF network settings, the
online DMD settings, and the test parameters for evaluation. All values are
echoed into run manifests for provenance; the canonical-JSON digest of the
parsed config ties snapshot files to the run that produced them.
"""

from __future__ import annotations

import hashlib
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .kdmd import KernelSpec
from .models import EwaveConfig, FerroConfig, FhnConfig, ferro_build, fhn_build
from .pipeline import DmdConfig
from .rbf import DEFAULT_SHAPE_FACTOR, ParamTransform, RbfKernel
from .snapio import canonical_json

MODELS = ("fhn", "ferro", "external-snapshots")
SPACINGS = ("equidistant", "log10", "explicit")

_FERRO_WAVE_KEYS = ("E_dc", "E_ac", "frequency")


@dataclass(frozen=True)
class SamplingConfig:
    count: int
    spacing: str
    range: tuple = ()
    values: tuple = ()


@dataclass(frozen=True)
class TimeConfig:
    t_end: float
    snapshot_end: float
    dt_out: float


@dataclass(frozen=True)
class RunConfig:
    model: str
    sampling: SamplingConfig
    time: TimeConfig
    rbf: dict
    dmd: dict
    model_config: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)
    test_params: tuple = ()
    output_rows: tuple = (0,)
    raw: dict = field(default_factory=dict)


def _divides(small, big):
    ratio = big / small
    return abs(ratio - round(ratio)) <= 1e-9 * max(1.0, ratio)


def load_config(path):
    """Parse and validate a TOML run configuration."""
    path = Path(path)
    with open(path, "rb") as handle:
        raw = tomllib.load(handle)
    return parse_config(raw)


def parse_config(raw):
    run = raw.get("run", {})
    model = run.get("model")
    if model not in MODELS:
        raise ValueError(f"run.model must be one of {MODELS}, got {model!r}")

    samp_raw = raw.get("sampling", {})
    spacing = samp_raw.get("spacing", "equidistant")
    if spacing not in SPACINGS:
        raise ValueError(f"sampling.spacing must be one of {SPACINGS}")
    values = tuple(samp_raw.get("values", ()))
    rng_ = tuple(samp_raw.get("range", ()))
    if spacing == "explicit":
        if not values:
            raise ValueError("sampling.values must be non-empty for explicit spacing")
        count = len(values)
    else:
        count = int(samp_raw.get("count", 0))
        if count < 1:
            raise ValueError("sampling.count must be >= 1")
        if len(rng_) != 2 or rng_[0] >= rng_[1]:
            raise ValueError("sampling.range must be [lo, hi] with lo < hi")
        if spacing == "log10" and rng_[0] <= 0:
            raise ValueError("log10 spacing requires a positive range")
    sampling = SamplingConfig(count=count, spacing=spacing, range=rng_, values=values)

    time_raw = raw.get("time", {})
    try:
        time_cfg = TimeConfig(t_end=float(time_raw["t_end"]),
                              snapshot_end=float(time_raw["snapshot_end"]),
                              dt_out=float(time_raw["dt_out"]))
    except KeyError as missing:
        raise ValueError(f"time section is missing {missing}") from None
    if time_cfg.snapshot_end > time_cfg.t_end:
        raise ValueError("time.snapshot_end must not exceed time.t_end")
    if time_cfg.dt_out <= 0:
        raise ValueError("time.dt_out must be positive")
    for name, value in (("snapshot_end", time_cfg.snapshot_end),
                        ("t_end", time_cfg.t_end)):
        if not _divides(time_cfg.dt_out, value):
            raise ValueError(f"time.dt_out must divide time.{name}")

    return RunConfig(
        model=model,
        sampling=sampling,
        time=time_cfg,
        rbf=dict(raw.get("rbf", {})),
        dmd=dict(raw.get("dmd", {})),
        model_config=dict(raw.get("model_config", {})),
        tolerances=dict(raw.get("tolerances", {})),
        test_params=tuple(raw.get("evaluate", {}).get("test_params", ())),
        output_rows=tuple(raw.get("outputs", {}).get("state_rows", (0,))),
        raw=raw,
    )


def config_digest(config):
    return hashlib.sha256(canonical_json(config.raw).encode("utf-8")).hexdigest()


def sample_params(config):
    """Training parameter samples per the sampling section, shape (n_p,)."""
    s = config.sampling
    if s.spacing == "explicit":
        return np.asarray(s.values, dtype=float)
    if s.spacing == "equidistant":
        return np.linspace(s.range[0], s.range[1], s.count)
    return np.logspace(np.log10(s.range[0]), np.log10(s.range[1]), s.count)


def integrator_tolerances(config):
    tol = config.tolerances
    return float(tol.get("rel_tol", 1e-8)), float(tol.get("abs_tol", 1e-10))


def build_system(config, mu):
    """Instantiate the benchmark FOM at one parameter value."""
    mc = dict(config.model_config)
    if config.model == "fhn":
        return fhn_build(FhnConfig(epsilon=float(mu), **mc))
    if config.model == "ferro":
        wave_kwargs = {k: mc.pop(k) for k in _FERRO_WAVE_KEYS if k in mc}
        if wave_kwargs:
            mc["e_wave"] = EwaveConfig(**wave_kwargs)
        return ferro_build(FerroConfig(w_d=float(mu), **mc))
    raise ValueError(
        "model 'external-snapshots' has no built-in simulator; supply "
        "snapshot and reference files instead")


def rbf_kernel_from(config):
    r = config.rbf
    return RbfKernel(kind=r.get("kernel", "inverse_multiquadric"),
                     eps=float(r.get("eps", DEFAULT_SHAPE_FACTOR)),
                     k=int(r.get("thin_plate_k", 2)))


def transform_from(config):
    r = config.rbf
    kind = r.get("transform", "identity")
    if kind == "identity":
        return ParamTransform()
    if kind == "log10":
        return ParamTransform(kind="log10")
    if kind == "affine":
        return ParamTransform(kind="affine",
                              scale=tuple(r["affine_scale"]),
                              shift=tuple(r["affine_shift"]))
    if kind == "unit":
        # Sugar: affine map sending the sampled parameter range to [0, 1].
        params = sample_params(config)
        return ParamTransform.to_unit_interval(params.min(), params.max())
    raise ValueError(f"unknown rbf.transform {kind!r}")


def dmd_config_from(config):
    d = config.dmd
    variant = d.get("variant", "exact")
    kernel = None
    if variant == "kernel":
        kind = d.get("kernel", "gaussian")
        sigma = float(d.get("sigma", 0.0)) or None
        kernel = KernelSpec(kind=kind, alpha=int(d.get("alpha", 2)), sigma=sigma,
                            sigma_scale=float(d.get("sigma_scale", 1.0)))
    max_rank = int(d.get("max_rank", 0)) or None
    return DmdConfig(variant=variant,
                     eta=float(d.get("eta", 0.0)),
                     max_rank=max_rank,
                     mode_kind=d.get("mode_kind", "exact"),
                     kernel=kernel,
                     anchor=d.get("anchor", "first"))


def horizon_steps(config):
    """DMD extrapolation steps from the training window end to t_end."""
    span = config.time.t_end - config.time.snapshot_end
    return int(round(span / config.time.dt_out))


def snapshot_columns(config):
    """Number of columns (m+1) in one training snapshot matrix."""
    return int(round(config.time.snapshot_end / config.time.dt_out)) + 1
