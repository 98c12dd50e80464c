"""
服务模块 - 重要性采样与优化器
提供重要性权重、SNIS 估计、R 与其梯度的估计，以及 SGD/Adam/AdaGrad 更新
"""

from .montecarlo import (
    TestFunction,
    WeightedBatch,
    indicator,
    importance_weights,
    build_batch,
    snis_estimate,
    estimate_R,
    estimate_R_from_log,
    estimate_grad_R,
    weighted_estimate,
)
from .optimizers import (
    OptimizerSpec,
    Schedule,
    ScheduleKind,
    sgd_step,
    adam_step,
    adagrad_step,
)

__all__ = [
    'TestFunction',
    'WeightedBatch',
    'indicator',
    'importance_weights',
    'build_batch',
    'snis_estimate',
    'estimate_R',
    'estimate_R_from_log',
    'estimate_grad_R',
    'weighted_estimate',
    'OptimizerSpec',
    'Schedule',
    'ScheduleKind',
    'sgd_step',
    'adam_step',
    'adagrad_step',
]
