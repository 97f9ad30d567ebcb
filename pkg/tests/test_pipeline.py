"""Offline/online pipeline: training, snapshot prediction, split, DMD
extension, and the error metrics."""

import numpy as np
import pytest

from rbfdmd import pipeline
from rbfdmd.kdmd import KernelSpec
from rbfdmd.pipeline import (DmdConfig, ExtrapolationWarning, TrainingSet,
                             error_report, predict, predict_snapshots, split,
                             train)
from rbfdmd.rbf import ParamTransform, RbfKernel
from test_dmd import rotation, trajectory


def make_training_set(params, matrix_fn, u0, m, dt=1.0):
    """Simulate u_{k+1} = A(mu) u_k for each sample; the direct oracle."""
    snaps = [trajectory(matrix_fn(mu), u0, m) for mu in params]
    return TrainingSet(params=np.asarray(params), snapshots=snaps, dt=dt)


class TestTrainingSet:
    def test_validation(self):
        with pytest.raises(ValueError, match="distinct"):
            TrainingSet(params=[1.0, 1.0], snapshots=[np.ones((2, 3))] * 2, dt=1.0)
        with pytest.raises(ValueError, match="shape"):
            TrainingSet(params=[1.0, 2.0],
                        snapshots=[np.ones((2, 3)), np.ones((2, 4))], dt=1.0)
        with pytest.raises(ValueError, match="t_snap_end"):
            TrainingSet(params=[1.0], snapshots=[np.ones((2, 5))], dt=0.5,
                        t_snap_end=7.0)

    def test_time_metadata(self):
        ts = TrainingSet(params=[1.0], snapshots=[np.ones((2, 5))], dt=0.5)
        assert ts.t_snap_end == 2.0


class TestTrainAndPredictSnapshots:
    def test_single_sample_identity(self):
        x = np.arange(12.0).reshape(3, 4)
        ts = TrainingSet(params=[2.0], snapshots=[x], dt=1.0)
        rom = train(ts, rbf_kernel=RbfKernel("gaussian", eps=1.0))
        np.testing.assert_allclose(predict_snapshots(rom, [2.0]), x, atol=1e-12)

    def test_center_reproduction(self):
        params = np.linspace(1.0, 3.0, 5)
        ts = make_training_set(params, lambda mu: rotation(0.1 * mu), [1.0, 0.0], 10)
        rom = train(ts, rbf_kernel=RbfKernel("inverse_multiquadric", eps=2.0))
        for mu, snap in zip(params, ts.snapshots):
            got = predict_snapshots(rom, [mu])
            assert np.max(np.abs(got - snap)) <= 1e-8 * np.max(np.abs(snap))

    def test_constant_in_parameter(self):
        x = np.arange(8.0).reshape(2, 4) + 1.0
        params = np.linspace(0.0, 4.0, 5)
        ts = TrainingSet(params=params, snapshots=[x.copy() for _ in params], dt=1.0)
        rom = train(ts, rbf_kernel=RbfKernel("inverse_multiquadric", eps=0.3))
        for mu in params:
            np.testing.assert_allclose(predict_snapshots(rom, [mu]), x, atol=1e-8)
        # off-center constancy holds only approximately (no polynomial tail);
        # empirical bound for this kernel shape
        np.testing.assert_allclose(predict_snapshots(rom, [1.7]), x, rtol=1e-3)

    def test_linear_in_parameter_midpoint(self):
        base = np.arange(6.0).reshape(2, 3) + 1.0
        params = np.linspace(1.0, 2.0, 5)
        ts = TrainingSet(params=params, snapshots=[mu * base for mu in params], dt=1.0)
        rom = train(ts, rbf_kernel=RbfKernel("inverse_multiquadric", eps=0.5),
                    transform=ParamTransform.to_unit_interval(1.0, 2.0))
        mid = 0.5 * (params[1] + params[2])
        got = predict_snapshots(rom, [mid])
        assert np.max(np.abs(got - mid * base)) <= 1e-3 * np.max(np.abs(mid * base))

    def test_extrapolation_flagged(self):
        params = np.linspace(1.0, 2.0, 4)
        ts = make_training_set(params, lambda mu: mu * 0.3 * np.eye(2), [1.0, 1.0], 5)
        rom = train(ts, rbf_kernel=RbfKernel("gaussian", eps=1.0))
        with pytest.warns(ExtrapolationWarning):
            predict_snapshots(rom, [2.5])


class TestSplit:
    def test_two_columns(self):
        pair = split(np.array([[1.0, 2.0], [3.0, 4.0]]))
        assert pair.x0.shape == (2, 1) and pair.x1.shape == (2, 1)

    def test_three_columns(self):
        x = np.array([[1.0, 2.0, 3.0]])
        pair = split(x)
        np.testing.assert_array_equal(pair.x0, [[1.0, 2.0]])
        np.testing.assert_array_equal(pair.x1, [[2.0, 3.0]])

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal((4, 7))
        pair = split(x)
        rebuilt = np.concatenate([pair.x0, pair.x1[:, -1:]], axis=1)
        np.testing.assert_array_equal(rebuilt, x)

    def test_single_column_rejected(self):
        with pytest.raises(ValueError):
            split(np.ones((3, 1)))


class TestPredict:
    def test_horizon_zero(self):
        params = np.linspace(1.0, 2.0, 4)
        ts = make_training_set(params, lambda mu: rotation(0.2 * mu), [1.0, 0.0], 8)
        rom = train(ts, rbf_kernel=RbfKernel("inverse_multiquadric", eps=2.0))
        np.testing.assert_array_equal(predict(rom, [1.5], 0),
                                      predict_snapshots(rom, [1.5]))

    def test_constant_in_time_extends_constant(self):
        params = np.linspace(0.0, 1.0, 3)
        snaps = [np.full((2, 6), 1.0 + mu) for mu in params]
        ts = TrainingSet(params=params, snapshots=snaps, dt=1.0)
        rom = train(ts, rbf_kernel=RbfKernel("inverse_multiquadric", eps=2.0),
                    dmd_config=DmdConfig(variant="exact"))
        full = predict(rom, [0.5], 4)
        assert full.shape == (2, 10)
        np.testing.assert_allclose(full, np.broadcast_to(full[:, :1], full.shape),
                                   atol=1e-6)

    @pytest.mark.parametrize("config", [
        DmdConfig(variant="exact", eta=0.0),
        DmdConfig(variant="kernel", kernel=KernelSpec(kind="polynomial", alpha=1)),
    ])
    def test_parametric_linear_system_double_horizon(self, config):
        # u_{k+1} = R(mu * theta) u_k; direct matrix-power oracle at held-out mu.
        theta = 0.15
        params = np.linspace(1.0, 2.0, 9)
        m = 12
        u0 = [1.0, 0.0]
        ts = make_training_set(params, lambda mu: rotation(theta * mu), u0, m)
        rom = train(ts, rbf_kernel=RbfKernel("inverse_multiquadric", eps=1.0),
                    transform=ParamTransform.to_unit_interval(1.0, 2.0),
                    dmd_config=config)
        mu_star = 1.45
        full = predict(rom, [mu_star], horizon_steps=m)
        a = rotation(theta * mu_star)
        oracle = trajectory(a, u0, 2 * m)
        err = np.linalg.norm(full - oracle) / np.linalg.norm(oracle)
        assert err < 1e-3

    def test_negative_horizon_rejected(self):
        ts = make_training_set([1.0, 2.0], lambda mu: np.eye(2), [1.0, 1.0], 4)
        rom = train(ts, rbf_kernel=RbfKernel("gaussian", eps=1.0))
        with pytest.raises(ValueError):
            predict(rom, [1.5], -1)


class TestErrorReport:
    def test_exact_prediction_gives_zero(self):
        y = np.array([[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        report = error_report(y, y.copy())
        np.testing.assert_array_equal(report.per_output_per_time, np.zeros((2, 3)))
        np.testing.assert_array_equal(report.time_average, np.zeros(2))

    def test_direct_arithmetic(self):
        report = error_report(np.array([[1.0, 2.0]]), np.array([[1.1, 2.0]]))
        np.testing.assert_allclose(report.per_output_per_time, [[0.05, 0.0]])
        np.testing.assert_allclose(report.time_average, [0.025])

    def test_scale_invariance(self):
        rng = np.random.default_rng(42)
        for _ in range(20):
            y = rng.standard_normal((3, 8))
            yhat = y + 0.1 * rng.standard_normal((3, 8))
            base = error_report(y, yhat)
            for alpha in (2.0, -3.5, 1e-6):
                scaled = error_report(alpha * y, alpha * yhat)
                np.testing.assert_allclose(scaled.per_output_per_time,
                                           base.per_output_per_time, atol=1e-12)

    def test_time_average_is_row_mean(self):
        rng = np.random.default_rng(1)
        y = rng.standard_normal((4, 10))
        yhat = y + rng.standard_normal((4, 10)) * 0.01
        report = error_report(y, yhat)
        np.testing.assert_allclose(report.time_average,
                                   report.per_output_per_time.mean(axis=1))

    def test_zero_reference_row_rejected(self):
        with pytest.raises(ValueError, match="zero"):
            error_report(np.array([[0.0, 0.0]]), np.array([[1.0, 1.0]]))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            error_report(np.ones((2, 3)), np.ones((2, 4)))

    def test_degenerate_single_sample_pipeline(self):
        x = np.arange(10.0).reshape(2, 5) + 1.0
        ts = TrainingSet(params=[1.0], snapshots=[x], dt=1.0)
        rom = train(ts, rbf_kernel=RbfKernel("gaussian", eps=1.0))
        np.testing.assert_allclose(predict(rom, [1.0], 0), x, atol=1e-10)
