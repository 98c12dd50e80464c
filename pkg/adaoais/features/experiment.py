"""由配置构造可运行的实验：目标、提议族、θ₀、测试函数与优化器"""

from dataclasses import dataclass

import numpy as np

from ..config.settings import ExperimentConfig, validate_config
from ..core.proposals import BetaProposalParams, ParamVector, ProposalFamily, make_family
from ..core.targets import GaussianSpec, Target, make_experiment_target
from ..services.montecarlo import TestFunction, indicator
from ..services.optimizers import OptimizerSpec


@dataclass(frozen=True, eq=False)
class ExperimentSetup:
    """一次实验所需的全部对象"""
    name: str
    target: Target
    family: ProposalFamily
    theta0: ParamVector
    phi: TestFunction
    optimizer: OptimizerSpec
    n_particles: int
    iterations: int
    rect: tuple

    @classmethod
    def from_config(cls, config: ExperimentConfig) -> 'ExperimentSetup':
        validate_config(config)
        target = make_experiment_target(config.target)
        family = make_family(config.proposal.family, target.dim)
        if config.proposal.family == "gaussian":
            spec = GaussianSpec(mean=np.array(config.proposal.mean),
                                covariance=np.array(config.proposal.covariance))
            theta0 = family.pack(spec)
        else:
            theta0 = family.pack(BetaProposalParams.from_shape(config.proposal.alpha, config.proposal.beta))
        return cls(
            name=config.name,
            target=target,
            family=family,
            theta0=theta0,
            phi=indicator(config.phi.lower, config.phi.upper),
            optimizer=config.optimizer.to_spec(),
            n_particles=config.n_particles,
            iterations=config.iterations,
            rect=(tuple(config.phi.lower), tuple(config.phi.upper)),
        )
