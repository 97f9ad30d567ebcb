"""Acceptance suite: one test per criterion, one PASS/FAIL line each.

Criteria 5-7 run the two desk-scale benchmark pipelines end to end (the
FitzHugh-Nagumo one through the CLI, the ferrocyanide one through the
library API) against freshly simulated full-order references.
"""

import json
import time
import warnings

import numpy as np
import pytest

from rbfdmd import linalg, snapio
from rbfdmd.cli import main
from rbfdmd.dmd import SnapshotPair, fit_exact_dmd, predict_series
from rbfdmd.kdmd import KernelSpec, eigenfunction_values, fit_kernel_dmd
from rbfdmd.models import FerroConfig, ferro_build, integrate
from rbfdmd.pipeline import (DmdConfig, TrainingSet, error_report,
                             extend_with_dmd, predict_snapshots, split, train)
from rbfdmd.rbf import ParamTransform, RbfKernel, evaluate, fit


def report(number, name, passed, detail=""):
    status = "PASS" if passed else "FAIL"
    suffix = f" ({detail})" if detail else ""
    print(f"ACCEPTANCE {number} {name}: {status}{suffix}")
    assert passed, f"criterion {number} {name}: {detail}"


def random_stable_system(rng, n):
    a = rng.standard_normal((n, n))
    a *= rng.uniform(0.5, 0.95) / max(np.abs(np.linalg.eigvals(a)))
    return a


def linear_instances(count, max_n, m, seed=2024):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(2, max_n + 1))
        a = random_stable_system(rng, n)
        u0 = rng.standard_normal(n)
        cols = [u0]
        for _ in range(m):
            cols.append(a @ cols[-1])
        out.append((a, np.column_stack(cols)))
    return out


class TestCriterion1And2:
    def test_linear_oracle_equivalence_and_mode_residuals(self):
        start = time.perf_counter()
        m = 40
        eig_ok, traj_ok, mode_ok = True, True, True
        worst_eig, worst_traj, worst_mode = 0.0, 0.0, 0.0
        for a, x in linear_instances(20, 8, m):
            pair = SnapshotPair.from_trajectory(x)
            model = fit_exact_dmd(pair, eta=0.0)
            a_oracle = pair.x1 @ np.linalg.pinv(pair.x0)

            lam_oracle = np.linalg.eigvals(a_oracle)
            lam_oracle = lam_oracle[np.abs(lam_oracle) > 1e-10]
            diff = np.max(np.abs(np.sort_complex(model.eigenvalues)
                                 - np.sort_complex(lam_oracle)))
            worst_eig = max(worst_eig, diff)
            eig_ok &= diff <= 1e-8

            steps = np.arange(2 * m)
            predicted = predict_series(model, steps)
            u0 = pair.x0[:, 0]
            cols = [u0]
            for _ in range(2 * m - 1):
                cols.append(a_oracle @ cols[-1])
            oracle_traj = np.column_stack(cols)
            rel = (np.linalg.norm(predicted - oracle_traj)
                   / np.linalg.norm(oracle_traj))
            worst_traj = max(worst_traj, rel)
            traj_ok &= rel <= 1e-6

            # Criterion 2: exact modes are eigenvectors of the oracle operator.
            norm_a = np.linalg.norm(a_oracle)
            for lam, phi in zip(model.eigenvalues, model.modes.T):
                res = np.linalg.norm(a_oracle @ phi - lam * phi)
                worst_mode = max(worst_mode, res / norm_a)
                mode_ok &= res <= 1e-8 * norm_a
        elapsed = time.perf_counter() - start
        report(1, "linear oracle equivalence", eig_ok and traj_ok and elapsed < 5.0,
               f"eig {worst_eig:.2e}, traj {worst_traj:.2e}, {elapsed:.2f}s")
        report(2, "exact-mode eigenvector residual", mode_ok,
               f"worst {worst_mode:.2e} of 1e-8")


class TestCriterion3:
    def test_kernel_dmd_degree_one_equivalence(self):
        rng = np.random.default_rng(7)
        eig_ok, rec_ok = True, True
        worst_eig, worst_rec = 0.0, 0.0
        for _ in range(10):
            n = int(rng.integers(2, 5))
            m = int(rng.integers(n + 2, 11))
            a = random_stable_system(rng, n)
            cols = [rng.standard_normal(n)]
            for _ in range(m):
                cols.append(a @ cols[-1])
            pair = SnapshotPair.from_trajectory(np.column_stack(cols))
            model = fit_kernel_dmd(pair, KernelSpec("polynomial", alpha=1))

            psi0 = np.column_stack([np.ones(pair.m), pair.x0.T])
            psi1 = np.column_stack([np.ones(pair.m), pair.x1.T])
            lam_oracle = np.linalg.eigvals(np.linalg.pinv(psi0) @ psi1)
            diff = np.max(np.abs(np.sort_complex(model.eigenvalues)
                                 - np.sort_complex(lam_oracle)))
            worst_eig = max(worst_eig, diff)
            eig_ok &= diff <= 1e-8

            for i in range(pair.m):
                phi = eigenfunction_values(model, pair.x0[:, i])
                one_step = (model.koopman_modes @ (model.eigenvalues * phi)).real
                rel = (np.linalg.norm(one_step - pair.x1[:, i])
                       / max(np.linalg.norm(pair.x1[:, i]), 1e-30))
                worst_rec = max(worst_rec, rel)
                rec_ok &= rel <= 1e-6
        report(3, "kernel DMD degree-1 equivalence", eig_ok and rec_ok,
               f"eig {worst_eig:.2e}, one-step {worst_rec:.2e}")


class TestCriterion4:
    def test_rbf_exactness_and_accuracy(self):
        start = time.perf_counter()
        rng = np.random.default_rng(11)
        centers = rng.uniform(0.0, 30.0, size=(25, 2))
        targets = rng.standard_normal((25, 3))
        interp = fit(centers, targets)
        residual = np.max(np.abs(evaluate(interp, centers) - targets))
        exact_ok = residual <= 1e-8 * np.max(np.abs(targets))

        sin_centers = np.linspace(0.0, 1.0, 20)
        sin_targets = np.sin(2 * np.pi * sin_centers)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", linalg.NumericsWarning)
            sin_interp = fit(sin_centers, sin_targets,
                             RbfKernel("inverse_multiquadric", eps=1.0 / 30.0))
        xt = np.linspace(0.0, 1.0, 200)
        sin_err = np.max(np.abs(evaluate(sin_interp, xt[:, None])[:, 0]
                                - np.sin(2 * np.pi * xt)))
        center_res = np.max(np.abs(evaluate(sin_interp, sin_centers[:, None])[:, 0]
                                   - sin_targets))
        elapsed = time.perf_counter() - start
        report(4, "RBF exactness and accuracy",
               exact_ok and sin_err < 1e-3 and center_res <= 1e-8 and elapsed < 1.0,
               f"centers {residual:.2e}, sin {sin_err:.2e}, {elapsed:.2f}s")


FHN_CONFIG = """
[run]
model = "fhn"

[sampling]
count = 15
spacing = "equidistant"
range = [0.02, 0.03]

[time]
t_end = 10.0
snapshot_end = 8.0
dt_out = 0.01

[tolerances]
rel_tol = 1e-8
abs_tol = 1e-10

[model_config]
n_x = 256

[rbf]
kernel = "inverse_multiquadric"
eps = 8.0
transform = "unit"

[dmd]
variant = "kernel"
kernel = "gaussian"
sigma_scale = 0.15
eta = 0.005
anchor = "last"

[evaluate]
test_params = [0.0225, 0.0275]
"""


@pytest.fixture(scope="module")
def fhn_run(tmp_path_factory):
    """Full CLI flow on the FitzHugh-Nagumo desk-scale configuration."""
    root = tmp_path_factory.mktemp("fhn_acceptance")
    cfg = root / "run.toml"
    cfg.write_text(FHN_CONFIG)
    snaps, model, report_dir = root / "snaps", root / "model", root / "report"
    start = time.perf_counter()
    assert main(["simulate", "--config", str(cfg), "--out", str(snaps)]) == 0
    assert main(["train", "--config", str(cfg), "--snapshots", str(snaps),
                 "--out", str(model)]) == 0
    assert main(["evaluate", "--config", str(cfg), "--rom", str(model / "rom.rom"),
                 "--out", str(report_dir)]) == 0
    elapsed = time.perf_counter() - start
    return {"report": report_dir, "elapsed": elapsed}


class TestCriterion5:
    def test_fhn_desk_scale_pipeline(self, fhn_run):
        summary = (fhn_run["report"] / "summary.csv").read_text().splitlines()[1:]
        averages = [float(line.split(",")[2]) for line in summary]
        avg_ok = all(v < 0.02 for v in averages)

        pointwise_ok = True
        worst_point = 0.0
        for tag in ("000_mu_0.0225", "001_mu_0.0275"):
            rows = (fhn_run["report"] / f"errors_{tag}.csv").read_text().splitlines()[1:]
            for row in rows:
                values = [float(v) for v in row.split(",")[1:]]
                worst_point = max(worst_point, *values)
                pointwise_ok &= all(v < 0.05 for v in values)
        runtime_ok = fhn_run["elapsed"] < 900.0
        report(5, "FHN desk-scale pipeline",
               avg_ok and pointwise_ok and runtime_ok,
               f"avg {max(averages):.4f} of 0.02, pointwise {worst_point:.4f} "
               f"of 0.05, {fhn_run['elapsed']:.0f}s of 900s")


class TestCriterion6:
    def test_ferro_desk_scale_pipeline(self):
        start = time.perf_counter()
        wd_train = np.linspace(500.0, 5000.0, 20)
        snaps = []
        for wd in wd_train:
            system = ferro_build(FerroConfig(w_d=wd, n_z=201))
            snaps.append(integrate(system, 8.0, 0.01, rel_tol=1e-8, abs_tol=1e-10))
        ts = TrainingSet(params=wd_train, snapshots=snaps, dt=0.01)
        rom = train(
            ts,
            rbf_kernel=RbfKernel("inverse_multiquadric", eps=2.0),
            transform=ParamTransform.to_unit_interval(500.0, 5000.0),
            dmd_config=DmdConfig(variant="kernel", eta=0.005, anchor="last",
                                 kernel=KernelSpec("gaussian", sigma_scale=0.05)),
        )
        times = np.linspace(0.0, 10.0, 1001)
        out_system = ferro_build(FerroConfig(w_d=1000.0, n_z=201))
        worst = 0.0
        for wd in (1000.0, 4800.0):
            system = ferro_build(FerroConfig(w_d=wd, n_z=201))
            reference = integrate(system, 10.0, 0.01, rel_tol=1e-8, abs_tol=1e-10)
            full = extend_with_dmd(rom, predict_snapshots(rom, [wd]), 200)
            rep = error_report(out_system.outputs_of(reference, times),
                               out_system.outputs_of(full, times))
            worst = max(worst, rep.time_average.max())
        elapsed = time.perf_counter() - start
        report(6, "ferrocyanide desk-scale pipeline",
               worst < 0.02 and elapsed < 900.0,
               f"avg {worst:.4f} of 0.02, {elapsed:.0f}s of 900s")


class TestCriterion7:
    def test_timing_table_and_online_speedup(self, fhn_run):
        lines = (fhn_run["report"] / "timing.csv").read_text().splitlines()
        header_ok = lines[0] == ("snapshot_generation,rbf_training,rbf_prediction,"
                                 "dmd_prediction,fom_simulation")
        values = dict(zip(lines[0].split(","), map(float, lines[1].split(","))))
        online = values["rbf_prediction"] + values["dmd_prediction"]
        speedup = values["fom_simulation"] / online
        report(7, "timing table and online speedup",
               header_ok and online < values["fom_simulation"],
               f"online {online:.2f}s vs FOM {values['fom_simulation']:.2f}s, "
               f"speedup {speedup:.1f}x")


class TestCriterion8:
    def test_metric_properties_randomized(self):
        rng = np.random.default_rng(123)
        ok = True
        for _ in range(1000):
            n_o = int(rng.integers(1, 5))
            n_t = int(rng.integers(2, 30))
            y = rng.standard_normal((n_o, n_t)) * 10.0 ** rng.integers(-3, 4)
            zero_rep = error_report(y, y.copy())
            ok &= np.all(zero_rep.per_output_per_time == 0.0)
            ok &= np.all(zero_rep.time_average == 0.0)

            yhat = y + rng.standard_normal((n_o, n_t)) * np.abs(y).max() * 0.1
            base = error_report(y, yhat)
            alpha = float(rng.uniform(0.1, 100.0)) * rng.choice([-1.0, 1.0])
            scaled = error_report(alpha * y, alpha * yhat)
            ok &= np.allclose(scaled.per_output_per_time,
                              base.per_output_per_time, rtol=1e-12, atol=1e-15)
        report(8, "error-metric properties (1000 cases)", ok)


class TestCriterion9:
    def test_format_round_trips_and_determinism(self, tmp_path):
        rng = np.random.default_rng(5)
        big = rng.standard_normal((2500, 4000))  # 1e7 entries
        path = snapio.write_matrix(tmp_path / "big.pdmd", big)
        round_ok = snapio.read_matrix(path).tobytes() == big.tobytes()

        params = np.linspace(1.0, 2.0, 4)
        snaps = [rng.standard_normal((6, 9)) + mu for mu in params]
        ts = TrainingSet(params=params, snapshots=snaps, dt=0.1)
        rom = train(ts, rbf_kernel=RbfKernel("inverse_multiquadric", eps=1.0),
                    transform=ParamTransform.to_unit_interval(1.0, 2.0))
        a = snapio.save_rom(tmp_path / "a.rom", rom, {"model": "x"})
        b = snapio.save_rom(tmp_path / "b.rom", rom, {"model": "x"})
        rom2, _ = snapio.load_rom(a)
        rom_ok = (a.read_bytes() == b.read_bytes()
                  and np.array_equal(rom2.interpolant.weights,
                                     rom.interpolant.weights)
                  and np.array_equal(rom2.interpolant.centers,
                                     rom.interpolant.centers))

        # Deterministic rebuild through the CLI on a miniature configuration.
        cfg = tmp_path / "mini.toml"
        cfg.write_text("""
[run]
model = "fhn"
[sampling]
count = 3
spacing = "equidistant"
range = [0.02, 0.03]
[time]
t_end = 0.2
snapshot_end = 0.2
dt_out = 0.05
[model_config]
n_x = 16
[rbf]
kernel = "inverse_multiquadric"
eps = 1.0
transform = "unit"
[dmd]
variant = "exact"
""")
        outs = []
        for run in ("r1", "r2"):
            snap_dir = tmp_path / f"snaps_{run}"
            model_dir = tmp_path / f"model_{run}"
            assert main(["simulate", "--config", str(cfg),
                         "--out", str(snap_dir), "--seed", "7"]) == 0
            assert main(["train", "--config", str(cfg), "--snapshots",
                         str(snap_dir), "--out", str(model_dir)]) == 0
            blobs = [f.read_bytes() for f in sorted(snap_dir.glob("*.pdmd"))]
            blobs.append((model_dir / "rom.rom").read_bytes())
            outs.append(blobs)
        rebuild_ok = outs[0] == outs[1]
        report(9, "format round trips and deterministic rebuild",
               round_ok and rom_ok and rebuild_ok,
               "snapshot 1e7 entries, ROM archive, CLI rebuild")
