"""Persistent formats: snapshot files, the ROM archive, and CSV reports.

Snapshot file (binary, extension ``.pdmd``):
    magic ``PDMD`` | u32 format version | u64 rows | u64 cols |
    rows*cols little-endian float64, column-major.
A JSON sidecar (same stem, ``.json``) carries the parameter vector, time
metadata, model id, and the configuration hash.

ROM archive (binary, extension ``.rom``):
    magic ``PROM`` | u32 format version | u64 JSON length | canonical JSON
    config | u32 array count | per array: u16 name length, name, u64 rows,
    u64 cols, payload in the snapshot numeric layout.

Both formats round-trip bit-exactly and contain no timestamps, so identical
inputs rebuild identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .kdmd import KernelSpec
from .pipeline import DmdConfig, ParametricRom
from .rbf import ParamTransform, RbfInterpolant, RbfKernel, gram_matrix

SNAPSHOT_MAGIC = b"PDMD"
ROM_MAGIC = b"PROM"
FORMAT_VERSION = 1


def canonical_json(obj):
    """Deterministic JSON encoding (sorted keys, fixed separators)."""
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def _write_array_payload(handle, x):
    x = np.asarray(x, dtype="<f8")
    handle.write(struct.pack("<QQ", x.shape[0], x.shape[1]))
    handle.write(x.ravel(order="F").tobytes())


def _read_array_payload(handle, context):
    header = handle.read(16)
    if len(header) != 16:
        raise ValueError(f"{context}: truncated array header")
    rows, cols = struct.unpack("<QQ", header)
    payload = handle.read(rows * cols * 8)
    if len(payload) != rows * cols * 8:
        raise ValueError(f"{context}: truncated payload "
                         f"(expected {rows * cols * 8} bytes)")
    flat = np.frombuffer(payload, dtype="<f8")
    return flat.reshape((rows, cols), order="F").copy()


def write_matrix(path, x):
    """Write one real matrix in the snapshot binary layout."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 2:
        raise ValueError("snapshot payload must be a 2-D matrix")
    path = Path(path)
    with open(path, "wb") as handle:
        handle.write(SNAPSHOT_MAGIC)
        handle.write(struct.pack("<I", FORMAT_VERSION))
        _write_array_payload(handle, x)
    return path


def read_matrix(path):
    path = Path(path)
    with open(path, "rb") as handle:
        magic = handle.read(4)
        if magic != SNAPSHOT_MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}, expected PDMD")
        (version,) = struct.unpack("<I", handle.read(4))
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        x = _read_array_payload(handle, str(path))
        if handle.read(1):
            raise ValueError(f"{path}: trailing bytes after payload")
    return x


def sidecar_path(path):
    return Path(path).with_suffix(".json")


def write_snapshot(path, x, meta):
    """Write the matrix and its JSON sidecar; returns the data path."""
    path = write_matrix(path, x)
    sidecar_path(path).write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    return path


def read_snapshot(path):
    """Read matrix and sidecar; a missing sidecar is a validation error."""
    path = Path(path)
    side = sidecar_path(path)
    if not side.exists():
        raise ValueError(f"missing sidecar for snapshot file: {side}")
    x = read_matrix(path)
    meta = json.loads(side.read_text())
    return x, meta


def _kernel_spec_dict(spec):
    if spec is None:
        return None
    return {"kind": spec.kind, "alpha": spec.alpha, "sigma": spec.sigma,
            "sigma_scale": spec.sigma_scale}


def _kernel_spec_from(d):
    if d is None:
        return None
    return KernelSpec(kind=d["kind"], alpha=d["alpha"], sigma=d["sigma"],
                      sigma_scale=d.get("sigma_scale", 1.0))


def save_rom(path, rom, model_info=None):
    """Persist a trained ParametricRom (weights must be float64)."""
    interp = rom.interpolant
    if interp.weights.dtype == object:
        raise ValueError(
            "extended-precision interpolants cannot be archived; refit with a "
            "better-conditioned kernel/transform")
    config = {
        "format_version": FORMAT_VERSION,
        "rbf": {
            "kernel": {"kind": interp.kernel.kind, "eps": interp.kernel.eps,
                       "k": interp.kernel.k},
            "transform": {"kind": interp.transform.kind,
                          "scale": list(interp.transform.scale),
                          "shift": list(interp.transform.shift)},
            "ridge": interp.ridge,
        },
        "dmd": {
            "variant": rom.dmd_config.variant,
            "eta": rom.dmd_config.eta,
            "max_rank": rom.dmd_config.max_rank,
            "mode_kind": rom.dmd_config.mode_kind,
            "kernel": _kernel_spec_dict(rom.dmd_config.kernel),
            "anchor": rom.dmd_config.anchor,
        },
        "shape": list(rom.shape),
        "dt": rom.dt,
        "t0": rom.t0,
        "model": model_info or {},
    }
    blob = canonical_json(config).encode("utf-8")
    arrays = [("centers", interp.centers), ("weights", interp.weights)]
    path = Path(path)
    with open(path, "wb") as handle:
        handle.write(ROM_MAGIC)
        handle.write(struct.pack("<I", FORMAT_VERSION))
        handle.write(struct.pack("<Q", len(blob)))
        handle.write(blob)
        handle.write(struct.pack("<I", len(arrays)))
        for name, arr in arrays:
            encoded = name.encode("utf-8")
            handle.write(struct.pack("<H", len(encoded)))
            handle.write(encoded)
            _write_array_payload(handle, arr)
    return path


def load_rom(path):
    """Load a ROM archive; returns (ParametricRom, model_info dict)."""
    path = Path(path)
    with open(path, "rb") as handle:
        if handle.read(4) != ROM_MAGIC:
            raise ValueError(f"{path}: bad magic, expected PROM")
        (version,) = struct.unpack("<I", handle.read(4))
        if version != FORMAT_VERSION:
            raise ValueError(f"{path}: unsupported format version {version}")
        (json_len,) = struct.unpack("<Q", handle.read(8))
        config = json.loads(handle.read(json_len).decode("utf-8"))
        (n_arrays,) = struct.unpack("<I", handle.read(4))
        arrays = {}
        for _ in range(n_arrays):
            (name_len,) = struct.unpack("<H", handle.read(2))
            name = handle.read(name_len).decode("utf-8")
            arrays[name] = _read_array_payload(handle, f"{path}:{name}")

    rbf_cfg = config["rbf"]
    kernel = RbfKernel(kind=rbf_cfg["kernel"]["kind"], eps=rbf_cfg["kernel"]["eps"],
                       k=rbf_cfg["kernel"]["k"])
    transform = ParamTransform(kind=rbf_cfg["transform"]["kind"],
                               scale=tuple(rbf_cfg["transform"]["scale"]),
                               shift=tuple(rbf_cfg["transform"]["shift"]))
    centers = arrays["centers"]
    tcenters = transform.apply(centers)
    interpolant = RbfInterpolant(
        centers=centers,
        transformed_centers=tcenters,
        kernel=kernel,
        transform=transform,
        weights=arrays["weights"],
        ridge=rbf_cfg["ridge"],
        gram=gram_matrix(kernel, tcenters),
    )
    dmd_cfg = config["dmd"]
    rom = ParametricRom(
        interpolant=interpolant,
        dmd_config=DmdConfig(
            variant=dmd_cfg["variant"],
            eta=dmd_cfg["eta"],
            max_rank=dmd_cfg["max_rank"],
            mode_kind=dmd_cfg["mode_kind"],
            kernel=_kernel_spec_from(dmd_cfg["kernel"]),
            anchor=dmd_cfg.get("anchor", "first"),
        ),
        shape=tuple(config["shape"]),
        dt=config["dt"],
        t0=config["t0"],
    )
    return rom, config.get("model", {})


def format_float(value):
    """Shortest exact decimal representation; '.' separator always."""
    return repr(float(value))


def write_csv(path, header, rows):
    """RFC-4180 CSV (CRLF line endings, '.' decimal separator)."""
    import csv

    path = Path(path)
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow([format_float(v) if isinstance(v, float) else v
                             for v in row])
    return path
