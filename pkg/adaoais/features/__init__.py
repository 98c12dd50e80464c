"""
功能模块 - OAIS 运行与真值基准
提供 OAIS 主循环、多次运行与 MSE 约简、真值基准与夹具、梯度检验与运行监控
"""

from .experiment import ExperimentSetup
from .oais import run_oais, run_many, run_mse, reduce_mse, replay_iteration
from .oracle import (
    QuadratureGrid,
    QuadratureScheme,
    rho_gaussian,
    rho_gaussian_mean_gradient,
    rect_prob,
    logitnormal_interval_prob,
    fd_gradient,
    pl_check,
)
from .fixtures import compute_truths, load_fixtures, write_fixtures, lookup_truth
from .monitor import RunMonitor, RunMetrics

__all__ = [
    'ExperimentSetup',
    'run_oais',
    'run_many',
    'run_mse',
    'reduce_mse',
    'replay_iteration',
    'QuadratureGrid',
    'QuadratureScheme',
    'rho_gaussian',
    'rho_gaussian_mean_gradient',
    'rect_prob',
    'logitnormal_interval_prob',
    'fd_gradient',
    'pl_check',
    'compute_truths',
    'load_fixtures',
    'write_fixtures',
    'lookup_truth',
    'RunMonitor',
    'RunMetrics',
]
