"""
桌面规模实验，默认跳过；运行方式：pytest -m slow
"""

import numpy as np
import pytest

from adaoais.config.settings import config_manager
from adaoais.features.experiment import ExperimentSetup
from adaoais.features.fixtures import compute_truth
from adaoais.features.oais import run_many, run_mse

pytestmark = pytest.mark.slow


def _setup(preset):
    config = config_manager.get_preset(preset)
    return config, ExperimentSetup.from_config(config)


@pytest.mark.parametrize("preset", ["exp2-adam-fast", "exp2-adagrad-fast"])
def test_mixture_mse_below_inverse_n(preset):
    config, setup = _setup(preset)
    truth = compute_truth("exp2").truth
    curve, _ = run_mse(setup, config.runs, truth, config.master_seed, jobs=4)
    assert curve.runs_used > 0
    assert curve.mse[-1] < 1.0 / config.n_particles


@pytest.mark.parametrize("preset", ["exp1-adam-fast", "exp1-adagrad-fast"])
def test_gaussian_parameters_converge(preset):
    config, setup = _setup(preset)
    traces = run_many(setup, config.runs, config.master_seed, jobs=4)
    assert all(t.completed for t in traces)
    spec = setup.target.spec
    for trace in traces:
        params = setup.family.unpack(trace.final.theta)
        np.testing.assert_allclose(params.mean, spec.mean, atol=0.3)
        np.testing.assert_allclose(params.covariance, spec.covariance, atol=0.5)


def test_plain_sgd_fails_on_gaussian():
    config, setup = _setup("exp1-sgd-fast")
    traces = run_many(setup, config.runs, config.master_seed, jobs=4)
    dim = setup.family.dim
    # 打包向量的前 dim 个分量即均值
    failed = [t for t in traces if not t.completed or np.max(np.abs(t.thetas[:, :dim])) > 1e3]
    assert failed


def _final_means(preset):
    config, setup = _setup(preset)
    traces = [t for t in run_many(setup, config.runs, config.master_seed, jobs=4) if t.completed]
    assert traces
    return np.mean([t.final.estimate for t in traces]), np.mean([t.final.r_hat for t in traces])


def test_logitnormal_interval_estimate():
    adam_estimate, adam_r = _final_means("exp3-adam-fast")
    adagrad_estimate, adagrad_r = _final_means("exp3-adagrad-fast")
    assert abs(adam_estimate - 0.72815) < 0.01
    assert abs(adagrad_estimate - 0.72815) < 0.01
    assert adam_r <= adagrad_r or abs(adam_r - adagrad_r) <= 0.05 * adagrad_r
