"""Command-line driver: simulate, train, predict, evaluate.

    rbfdmd simulate --config run.toml --out snapshots/ [--workers N] [--seed N]
    rbfdmd train    --config run.toml --snapshots snapshots/ --out model/
    rbfdmd predict  --rom model/rom.rom --mu VALUE [--mu ...] --horizon H --out pred/
    rbfdmd evaluate --config run.toml --rom model/rom.rom --out report/
                    [--mu ...] [--references DIR]

Data artifacts (snapshot files, the ROM archive, prediction and error CSVs)
are byte-deterministic for a fixed config and seed; wall-clock timings live
only in run manifests and the timing table.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import pipeline, snapio
from .models import IntegrationError, integrate, output_times
from .pipeline import TrainingSet

ERROR_EXIT_CODES = {
    "VALIDATION": 2,
    "NOT_FOUND": 3,
    "INTEGRATION": 4,
    "INTERNAL": 5,
}


class CliError(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _fail(code, message):
    raise CliError(code, message)


def _write_manifest(path, payload):
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def _sample_name(index):
    return f"sample_{index:04d}"


def _simulate_one(config, mu, rel_tol, abs_tol):
    system = cfgmod.build_system(config, mu)
    t0 = time.perf_counter()
    states = integrate(system, config.time.snapshot_end, config.time.dt_out,
                       rel_tol=rel_tol, abs_tol=abs_tol)
    return states, time.perf_counter() - t0


def cmd_simulate(args):
    config = cfgmod.load_config(args.config)
    if config.model == "external-snapshots":
        _fail("VALIDATION", "cannot simulate with model 'external-snapshots'")
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    params = cfgmod.sample_params(config)
    rel_tol, abs_tol = cfgmod.integrator_tolerances(config)
    digest = cfgmod.config_digest(config)

    records = []
    wall_start = time.perf_counter()
    results = {}
    if args.workers > 1:
        with ProcessPoolExecutor(max_workers=args.workers) as pool:
            futures = {
                i: pool.submit(_simulate_one, config, float(mu), rel_tol, abs_tol)
                for i, mu in enumerate(params)
            }
            for i, future in futures.items():
                try:
                    results[i] = future.result()
                except (IntegrationError, ValueError) as exc:
                    results[i] = exc
    else:
        for i, mu in enumerate(params):
            try:
                results[i] = _simulate_one(config, float(mu), rel_tol, abs_tol)
            except (IntegrationError, ValueError) as exc:
                results[i] = exc

    n_ok = 0
    for i, mu in enumerate(params):
        outcome = results[i]
        name = _sample_name(i)
        if isinstance(outcome, Exception):
            print(f"[rbfdmd] sample {i} (mu={mu}) failed: {outcome}", file=sys.stderr)
            records.append({"param": [float(mu)], "file": None,
                            "error": str(outcome)})
            continue
        states, seconds = outcome
        meta = {
            "param": [float(mu)],
            "dt": config.time.dt_out,
            "t0": 0.0,
            "model": config.model,
            "config_hash": digest,
        }
        snapio.write_snapshot(out_dir / f"{name}.pdmd", states, meta)
        records.append({"param": [float(mu)], "file": f"{name}.pdmd",
                        "seconds": seconds})
        n_ok += 1
    wall = time.perf_counter() - wall_start

    _write_manifest(out_dir / "simulate_manifest.json", {
        "command": "simulate",
        "config": config.raw,
        "config_hash": digest,
        "seed": args.seed,
        "samples": records,
        "timing": {"snapshot_generation": wall},
    })
    if n_ok == 0:
        _fail("INTEGRATION", "every sample simulation failed")
    print(f"[rbfdmd] simulate: {n_ok}/{len(params)} snapshot files in {out_dir}")
    return 0


def _load_snapshot_dir(snap_dir):
    snap_dir = Path(snap_dir)
    files = sorted(snap_dir.glob("*.pdmd"))
    if not files:
        _fail("NOT_FOUND", f"no .pdmd snapshot files in {snap_dir}")
    params, snaps = [], []
    meta0 = None
    shape = None
    for f in files:
        x, meta = snapio.read_snapshot(f)
        if shape is None:
            shape, meta0 = x.shape, meta
        elif x.shape != shape:
            _fail("VALIDATION",
                  f"snapshot shape mismatch in {f.name}: {x.shape} != {shape}")
        params.append(meta["param"])
        snaps.append(x)
    return np.asarray(params, dtype=float), snaps, meta0


def cmd_train(args):
    config = cfgmod.load_config(args.config)
    params, snaps, meta0 = _load_snapshot_dir(args.snapshots)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    ts = TrainingSet(params=params, snapshots=snaps, dt=meta0["dt"], t0=meta0["t0"])
    t_start = time.perf_counter()
    rom = pipeline.train(
        ts,
        rbf_kernel=cfgmod.rbf_kernel_from(config),
        transform=cfgmod.transform_from(config),
        ridge=float(config.rbf.get("ridge", 0.0)),
        dmd_config=cfgmod.dmd_config_from(config),
    )
    train_seconds = time.perf_counter() - t_start

    model_info = {
        "model": config.model,
        "model_config": config.model_config,
        "output_rows": list(config.output_rows),
        "config_hash": cfgmod.config_digest(config),
    }
    rom_path = out_dir / "rom.rom"
    snapio.save_rom(rom_path, rom, model_info)

    timing = {"rbf_training": train_seconds}
    sim_manifest = Path(args.snapshots) / "simulate_manifest.json"
    if sim_manifest.exists():
        sim_timing = json.loads(sim_manifest.read_text()).get("timing", {})
        timing["snapshot_generation"] = sim_timing.get("snapshot_generation")
    _write_manifest(out_dir / "train_manifest.json", {
        "command": "train",
        "config": config.raw,
        "config_hash": model_info["config_hash"],
        "snapshots": str(Path(args.snapshots)),
        "n_samples": int(params.shape[0]),
        "timing": timing,
    })
    print(f"[rbfdmd] train: ROM archive written to {rom_path}")
    return 0


def _output_extractor(model_info):
    """Columnwise output map from the model id stored in the ROM archive."""
    model = model_info.get("model", "external-snapshots")
    if model == "external-snapshots":
        rows = list(model_info.get("output_rows", [0]))

        def outputs(states, times, _rows=rows):
            return np.asarray(states)[_rows, :]

        return outputs

    raw = {"run": {"model": model},
           "model_config": dict(model_info.get("model_config", {})),
           "sampling": {"spacing": "explicit", "values": [1.0]},
           "time": {"t_end": 1.0, "snapshot_end": 1.0, "dt_out": 1.0}}
    base = cfgmod.parse_config(raw)
    # The output map of both benchmark models is parameter-independent, so
    # one representative system serves every query.
    system = cfgmod.build_system(base, 0.025 if model == "fhn" else 1000.0)
    return system.outputs_of


def _mu_list(args, config=None):
    if args.mu:
        return [float(v) for v in args.mu]
    if config is not None and config.test_params:
        return [float(v) for v in config.test_params]
    _fail("VALIDATION", "no test parameters: pass --mu or set evaluate.test_params")


def _mu_tag(index, mu):
    return f"{index:03d}_mu_{mu:.10g}"


def cmd_predict(args):
    rom, model_info = snapio.load_rom(args.rom)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    outputs_fn = _output_extractor(model_info)
    m_plus_1 = rom.shape[1]

    for i, mu in enumerate(_mu_list(args)):
        tag = _mu_tag(i, mu)
        trajectory = pipeline.predict(rom, [mu], horizon_steps=args.horizon)
        times = rom.t0 + rom.dt * np.arange(m_plus_1 + args.horizon)
        meta = {
            "param": [mu],
            "dt": rom.dt,
            "t0": rom.t0,
            "model": model_info.get("model", "external-snapshots"),
            "config_hash": model_info.get("config_hash", ""),
        }
        snapio.write_snapshot(out_dir / f"trajectory_{tag}.pdmd", trajectory, meta)
        outputs = outputs_fn(trajectory, times)
        header = ["time"] + [f"output_{k + 1}" for k in range(outputs.shape[0])]
        rows = [[float(t)] + [float(v) for v in outputs[:, j]]
                for j, t in enumerate(times)]
        snapio.write_csv(out_dir / f"outputs_{tag}.csv", header, rows)
    print(f"[rbfdmd] predict: trajectories and output CSVs in {out_dir}")
    return 0


def _find_reference(ref_dir, mu):
    for f in sorted(Path(ref_dir).glob("*.pdmd")):
        _, meta = snapio.read_snapshot(f)
        param = meta.get("param", [])
        if len(param) == 1 and np.isclose(param[0], mu, rtol=1e-9, atol=0.0):
            return snapio.read_matrix(f)
    return None


def cmd_evaluate(args):
    config = cfgmod.load_config(args.config)
    rom, model_info = snapio.load_rom(args.rom)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    mus = _mu_list(args, config)
    outputs_fn = _output_extractor(model_info)
    rel_tol, abs_tol = cfgmod.integrator_tolerances(config)
    horizon = cfgmod.horizon_steps(config)
    times = output_times(config.time.t_end, config.time.dt_out)
    if rom.shape[1] + horizon != times.size:
        _fail("VALIDATION",
              f"ROM window ({rom.shape[1]} columns) plus horizon {horizon} does "
              f"not match the evaluation grid ({times.size} points)")

    rbf_seconds, dmd_seconds, fom_seconds = [], [], []
    summary_rows = []
    failures = []
    for i, mu in enumerate(mus):
        tag = _mu_tag(i, mu)
        try:
            if args.references:
                reference = _find_reference(args.references, mu)
                if reference is None:
                    raise FileNotFoundError(
                        f"no reference snapshot for mu={mu} in {args.references}")
                ref_time = None
            else:
                system = cfgmod.build_system(config, mu)
                t0 = time.perf_counter()
                reference = integrate(system, config.time.t_end, config.time.dt_out,
                                      rel_tol=rel_tol, abs_tol=abs_tol)
                ref_time = time.perf_counter() - t0

            t0 = time.perf_counter()
            x_hat = pipeline.predict_snapshots(rom, [mu])
            t1 = time.perf_counter()
            full = pipeline.extend_with_dmd(rom, x_hat, horizon)
            t2 = time.perf_counter()

            y_ref = outputs_fn(reference, times)
            y_hat = outputs_fn(full, times)
            report = pipeline.error_report(y_ref, y_hat)
        except (ValueError, FileNotFoundError, IntegrationError) as exc:
            print(f"[rbfdmd] evaluate: mu={mu} skipped: {exc}", file=sys.stderr)
            failures.append({"mu": mu, "error": str(exc)})
            continue

        rbf_seconds.append(t1 - t0)
        dmd_seconds.append(t2 - t1)
        if ref_time is not None:
            fom_seconds.append(ref_time)

        n_o = report.per_output_per_time.shape[0]
        header = ["time"] + [f"error_output_{k + 1}" for k in range(n_o)]
        rows = [[float(t)] + [float(v) for v in report.per_output_per_time[:, j]]
                for j, t in enumerate(times)]
        snapio.write_csv(out_dir / f"errors_{tag}.csv", header, rows)
        for k in range(n_o):
            summary_rows.append([mu, k + 1, float(report.time_average[k])])

    if not summary_rows:
        _fail("VALIDATION", "evaluation produced no results "
                            f"({len(failures)} failures)")

    snapio.write_csv(out_dir / "summary.csv",
                     ["mu", "output", "time_average_relative_error"], summary_rows)

    offline = {"snapshot_generation": float("nan"), "rbf_training": float("nan")}
    train_manifest = Path(args.rom).parent / "train_manifest.json"
    if train_manifest.exists():
        timing = json.loads(train_manifest.read_text()).get("timing", {})
        for key in offline:
            if timing.get(key) is not None:
                offline[key] = float(timing[key])

    timing_row = [
        offline["snapshot_generation"],
        offline["rbf_training"],
        float(np.mean(rbf_seconds)),
        float(np.mean(dmd_seconds)),
        float(np.mean(fom_seconds)) if fom_seconds else float("nan"),
    ]
    snapio.write_csv(out_dir / "timing.csv",
                     ["snapshot_generation", "rbf_training", "rbf_prediction",
                      "dmd_prediction", "fom_simulation"],
                     [timing_row])

    _write_manifest(out_dir / "evaluate_manifest.json", {
        "command": "evaluate",
        "config": config.raw,
        "config_hash": cfgmod.config_digest(config),
        "seed": args.seed,
        "test_params": mus,
        "failures": failures,
        "timing": {
            "snapshot_generation": timing_row[0],
            "rbf_training": timing_row[1],
            "rbf_prediction": timing_row[2],
            "dmd_prediction": timing_row[3],
            "fom_simulation": timing_row[4],
        },
    })
    print(f"[rbfdmd] evaluate: reports in {out_dir}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rbfdmd",
        description="Parametric ROM: RBF snapshot interpolation + DMD time "
                    "extrapolation.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=1, help="parallel workers")
        p.add_argument("--seed", type=int, default=0, help="seed recorded in manifests")

    p_sim = sub.add_parser("simulate", help="generate training snapshot files")
    p_sim.add_argument("--config", required=True)
    add_common(p_sim)
    p_sim.set_defaults(func=cmd_simulate)

    p_train = sub.add_parser("train", help="train and archive the parametric ROM")
    p_train.add_argument("--config", required=True)
    p_train.add_argument("--snapshots", required=True, help="snapshot directory")
    add_common(p_train)
    p_train.set_defaults(func=cmd_train)

    p_pred = sub.add_parser("predict", help="predict trajectories at new parameters")
    p_pred.add_argument("--rom", required=True, help="ROM archive path")
    p_pred.add_argument("--mu", action="append", default=[],
                        help="parameter value (repeatable)")
    p_pred.add_argument("--horizon", type=int, default=0,
                        help="DMD extrapolation steps beyond the training window")
    add_common(p_pred)
    p_pred.set_defaults(func=cmd_predict)

    p_eval = sub.add_parser("evaluate", help="error and timing report")
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--rom", required=True)
    p_eval.add_argument("--mu", action="append", default=[])
    p_eval.add_argument("--references", default=None,
                        help="directory of reference snapshot files "
                             "(default: simulate the FOM)")
    add_common(p_eval)
    p_eval.set_defaults(func=cmd_evaluate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f'rbfdmd-error code={exc.code} message="{exc}"', file=sys.stderr)
        return ERROR_EXIT_CODES.get(exc.code, 5)
    except (ValueError, json.JSONDecodeError) as exc:
        print(f'rbfdmd-error code=VALIDATION message="{exc}"', file=sys.stderr)
        return ERROR_EXIT_CODES["VALIDATION"]
    except FileNotFoundError as exc:
        print(f'rbfdmd-error code=NOT_FOUND message="{exc}"', file=sys.stderr)
        return ERROR_EXIT_CODES["NOT_FOUND"]
    except IntegrationError as exc:
        print(f'rbfdmd-error code=INTEGRATION message="{exc}"', file=sys.stderr)
        return ERROR_EXIT_CODES["INTEGRATION"]
    except Exception as exc:  # pragma: no cover - last resort
        print(f'rbfdmd-error code=INTERNAL message="{exc}"', file=sys.stderr)
        return ERROR_EXIT_CODES["INTERNAL"]


if __name__ == "__main__":
    sys.exit(main())
