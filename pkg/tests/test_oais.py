import numpy as np
import pytest

from adaoais.config.settings import config_manager
from adaoais.core.proposals import GaussianFamily
from adaoais.core.targets import REAL_SUPPORT, Target, make_experiment_target
from adaoais.exceptions.errors import ConfigurationError
from adaoais.features.experiment import ExperimentSetup
from adaoais.features.monitor import RunMonitor
from adaoais.features.oais import reduce_mse, replay_iteration, run_many, run_mse, run_oais, run_setup
from adaoais.models.records import MseCurve, RunStatus, RunTrace, TraceRecord
from adaoais.services.montecarlo import build_batch, estimate_R_from_log, indicator, snis_estimate
from adaoais.services.optimizers import OptimizerSpec, Schedule, ScheduleKind
from adaoais.utils.seeding import derive_rng

PHI_2D = indicator([-1.0, -1.0], [1.0, 1.0])
ADAM = OptimizerSpec("adam", Schedule(ScheduleKind.CONSTANT, 0.01))


def _small_setup(preset="exp1-adam", **changes):
    config = config_manager.get_preset(preset)
    defaults = dict(n_particles=200, iterations=20, runs=3)
    defaults.update(changes)
    return ExperimentSetup.from_config(config.with_overrides(**defaults))


def test_zero_iterations_is_plain_snis(gaussian_2d):
    target = make_experiment_target("gaussian")
    theta0 = gaussian_2d.pack(target.spec)
    trace = run_oais(target, gaussian_2d, theta0, PHI_2D, ADAM, n_particles=500, iterations=0, seed=7)
    assert trace.completed
    assert len(trace.records) == 1
    points = gaussian_2d.sample(theta0, derive_rng(7, 0), 500)
    batch = build_batch(target, gaussian_2d, theta0, points, PHI_2D)
    assert trace.records[0].estimate == snis_estimate(batch)
    assert trace.records[0].r_hat == estimate_R_from_log(batch.log_weights)


def test_completed_run_has_all_records():
    setup = _small_setup(iterations=15)
    trace = run_setup(setup, master_seed=11, run_index=0)
    assert trace.status == RunStatus.COMPLETED
    assert [r.k for r in trace.records] == list(range(16))
    assert np.all((trace.estimates >= 0.0) & (trace.estimates <= 1.0))
    assert trace.thetas.shape == (16, setup.family.n_params)
    np.testing.assert_array_equal(trace.records[0].theta, setup.theta0)


def test_started_at_optimum_stays_near_one(gaussian_2d):
    target = make_experiment_target("gaussian")
    theta0 = gaussian_2d.pack(target.spec)
    trace = run_oais(target, gaussian_2d, theta0, PHI_2D, ADAM, n_particles=1000, iterations=50, seed=3)
    assert trace.completed
    assert trace.records[0].r_hat == pytest.approx(1.0, rel=1e-10)
    assert trace.records[0].grad_norm < 0.5
    assert np.all(np.abs(trace.r_hats - 1.0) < 0.25)


def test_same_seed_same_trace():
    setup = _small_setup()
    first = run_setup(setup, 99, 1)
    second = run_setup(setup, 99, 1)
    np.testing.assert_array_equal(first.estimates, second.estimates)
    np.testing.assert_array_equal(first.thetas, second.thetas)
    other = run_setup(setup, 99, 2)
    assert not np.array_equal(first.estimates, other.estimates)


def test_results_do_not_depend_on_jobs():
    setup = _small_setup(runs=4)
    serial = run_many(setup, 4, master_seed=5, jobs=1)
    threaded = run_many(setup, 4, master_seed=5, jobs=3)
    assert [t.run_index for t in threaded] == [0, 1, 2, 3]
    for a, b in zip(serial, threaded):
        np.testing.assert_array_equal(a.estimates, b.estimates)
        np.testing.assert_array_equal(a.thetas, b.thetas)
        assert a.seed == b.seed


def test_adding_runs_keeps_existing_runs():
    setup = _small_setup()
    two = run_many(setup, 2, master_seed=8)
    three = run_many(setup, 3, master_seed=8)
    for a, b in zip(two, three):
        np.testing.assert_array_equal(a.estimates, b.estimates)


def test_replay_from_snapshot():
    setup = _small_setup()
    trace = run_setup(setup, 42, 2)
    snapshot = trace.records[10]
    replayed = replay_iteration(setup.target, setup.family, snapshot.theta, setup.phi, setup.n_particles,
                                42, 10, stream=(2,))
    assert replayed.estimate == snapshot.estimate
    assert replayed.r_hat == snapshot.r_hat
    assert replayed.grad_norm == snapshot.grad_norm


def test_weight_overflow_marks_divergence():
    family = GaussianFamily(1, fixed_chol=np.array([[1.0]]))
    heavy = Target(name="heavy", dim=1, log_density_fn=lambda p: np.full(p.shape[0], 400.0),
                   support=REAL_SUPPORT)
    trace = run_oais(heavy, family, np.zeros(1), indicator([-1.0], [1.0]), ADAM, 50, 10, seed=1)
    assert trace.status == RunStatus.DIVERGED
    assert trace.diverged_at == 0
    assert trace.reason == "weight_overflow"
    assert len(trace.records) == 1 and trace.records[0].weight_overflow
    assert trace.records[0].r_hat == np.inf
    assert trace.status_label() == "diverged(0:weight_overflow)"


class _NanScoreFamily(GaussianFamily):
    def score(self, theta, x):
        points = np.atleast_2d(x)
        return np.full((points.shape[0], self.n_params), np.nan)


def test_non_finite_gradient_marks_divergence(std_normal_1d):
    family = _NanScoreFamily(1, fixed_chol=np.array([[1.0]]))
    trace = run_oais(std_normal_1d, family, np.array([0.5]), indicator([-1.0], [1.0]), ADAM, 50, 10, seed=1)
    assert not trace.completed
    assert trace.reason == "non_finite_gradient"
    assert len(trace.records) == 1


def test_invalid_arguments_fail_before_sampling(gaussian_2d):
    target = make_experiment_target("gaussian")
    theta0 = gaussian_2d.pack(target.spec)
    with pytest.raises(ConfigurationError):
        run_oais(target, gaussian_2d, theta0, PHI_2D, ADAM, n_particles=0, iterations=5, seed=1)
    with pytest.raises(ConfigurationError):
        run_oais(target, gaussian_2d, theta0, PHI_2D, ADAM, n_particles=10, iterations=-1, seed=1)
    with pytest.raises(ConfigurationError):
        run_oais(target, gaussian_2d, np.full(5, np.nan), PHI_2D, ADAM, n_particles=10, iterations=5, seed=1)


def _trace(run_index, estimates, diverged=False):
    trace = RunTrace(iterations=len(estimates) - 1, run_index=run_index)
    for k, value in enumerate(estimates):
        trace.records.append(TraceRecord(k=k, theta=np.zeros(2), estimate=value, r_hat=1.0, grad_norm=0.0))
    if diverged:
        trace.mark_diverged(len(estimates) - 1, "weight_overflow")
    return trace


def test_reduce_mse_definition():
    traces = [_trace(1, [0.2, 0.6, 0.5]), _trace(0, [0.4, 0.5, 0.5]), _trace(2, [0.9, 0.9], diverged=True)]
    curve = reduce_mse(traces, truth=0.5, n_particles=100)
    np.testing.assert_allclose(curve.mse, [(0.01 + 0.09) / 2, 0.01 / 2, 0.0], atol=1e-15)
    assert curve.runs_used == 2
    assert curve.diverged_runs == 1
    assert curve.run_count == 3
    assert curve.run_indices == (0, 1)
    np.testing.assert_allclose(curve.recompute(), curve.mse, rtol=0.0, atol=1e-15)


def test_exact_estimates_give_zero_mse():
    curve = MseCurve.from_estimates(0.25, [[0.25] * 5, [0.25] * 5], n_particles=10)
    np.testing.assert_array_equal(curve.mse, np.zeros(5))


def test_all_diverged_gives_nan_curve():
    curve = reduce_mse([_trace(0, [0.1, 0.2], diverged=True)], truth=0.5, n_particles=10)
    assert curve.runs_used == 0
    assert np.all(np.isnan(curve.mse))
    with pytest.raises(ConfigurationError):
        reduce_mse([], truth=float("nan"), n_particles=10)


def test_run_mse_and_monitor():
    setup = _small_setup("exp3-adagrad", n_particles=100, iterations=10, runs=2)
    monitor = RunMonitor()
    curve, traces = run_mse(setup, 3, truth=0.72815, master_seed=4, monitor=monitor)
    assert curve.mse.shape == (11,)
    assert curve.runs_used == 3
    metrics = monitor.get_metrics()
    assert metrics.run_count == 3 and metrics.completed == 3
    assert "3 runs" in monitor.generate_report()
    with pytest.raises(ConfigurationError):
        run_mse(setup, 1, truth=0.5, master_seed=4)
    with pytest.raises(ConfigurationError):
        run_many(setup, 0, master_seed=4)
