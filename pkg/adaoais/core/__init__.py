"""
核心模块 - 目标分布与提议分布族
提供未归一化目标密度、高斯/Beta 提议族的参数化、采样、对数密度与评分函数
"""

from .targets import (
    Target,
    Support,
    SupportKind,
    GaussianSpec,
    MixtureSpec,
    LogitNormalSpec,
    log_unnorm_density,
    gaussian_target,
    mixture_target,
    logitnormal_target,
    make_experiment_target,
)
from .proposals import (
    ProposalFamily,
    GaussianFamily,
    BetaFamily,
    GaussianProposalParams,
    BetaProposalParams,
    make_family,
)
from .special import digamma

__all__ = [
    'Target',
    'Support',
    'SupportKind',
    'GaussianSpec',
    'MixtureSpec',
    'LogitNormalSpec',
    'log_unnorm_density',
    'gaussian_target',
    'mixture_target',
    'logitnormal_target',
    'make_experiment_target',
    'ProposalFamily',
    'GaussianFamily',
    'BetaFamily',
    'GaussianProposalParams',
    'BetaProposalParams',
    'make_family',
    'digamma',
]
