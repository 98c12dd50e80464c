"""
参数更新映射 T(θ_k)
SGD、Adam OAIS、AdaGrad OAIS 均实现为纯状态转移函数：状态输入、状态输出
ε 加在平方根外：√v̂ + ε、√acc + ε
"""

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Tuple, Union

import numpy as np
import numpy.typing as npt

from ..exceptions.errors import ConfigurationError, DivergenceError, ShapeError

logger = logging.getLogger(__name__)

ADAM_EPS = 1e-8
ADAGRAD_EPS = 1e-8


class ScheduleKind(Enum):
    """步长策略"""
    CONSTANT = "constant"
    INV_SQRT = "inv_sqrt"


@dataclass(frozen=True)
class Schedule:
    """步长 t_k：constant 为 base，inv_sqrt 为 base/√(k+1)"""
    kind: ScheduleKind
    base: float

    def __post_init__(self):
        if not (self.base > 0.0 and math.isfinite(self.base)):
            raise ConfigurationError(f"learning rate must be positive and finite, got {self.base}", key="rate")

    def rate(self, k: int) -> float:
        if self.kind == ScheduleKind.CONSTANT:
            return self.base
        return self.base / math.sqrt(k + 1)


@dataclass(frozen=True)
class SGDState:
    """SGD 只需要迭代计数"""
    k: int = 0


@dataclass(frozen=True, eq=False)
class AdamState:
    """Adam 状态 (m_k, v_k, k)"""
    m: np.ndarray
    v: np.ndarray
    k: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = ADAM_EPS

    def __post_init__(self):
        if not (0.0 <= self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ConfigurationError(f"Adam needs beta1 in [0,1) and beta2 in (0,1), got "
                                     f"({self.beta1}, {self.beta2})", key="beta1")
        if self.eps < 0.0:
            raise ConfigurationError(f"eps must be non-negative, got {self.eps}", key="eps")

    @classmethod
    def initial(cls, n_params: int, beta1: float = 0.9, beta2: float = 0.999,
                eps: float = ADAM_EPS) -> 'AdamState':
        return cls(m=np.zeros(n_params), v=np.zeros(n_params), k=0, beta1=beta1, beta2=beta2, eps=eps)


@dataclass(frozen=True, eq=False)
class AdaGradState:
    """对角 AdaGrad 状态，acc 为逐坐标梯度平方累积"""
    acc: np.ndarray
    k: int = 0
    eps: float = ADAGRAD_EPS

    def __post_init__(self):
        if self.eps < 0.0:
            raise ConfigurationError(f"eps must be non-negative, got {self.eps}", key="eps")

    @classmethod
    def initial(cls, n_params: int, eps: float = ADAGRAD_EPS) -> 'AdaGradState':
        return cls(acc=np.zeros(n_params), k=0, eps=eps)


OptimizerState = Union[SGDState, AdamState, AdaGradState]


def _as_vectors(theta: npt.ArrayLike, g: npt.ArrayLike) -> Tuple[np.ndarray, np.ndarray]:
    theta_vec = np.asarray(theta, dtype=np.float64)
    g_vec = np.asarray(g, dtype=np.float64)
    if theta_vec.shape != g_vec.shape:
        raise ShapeError(f"parameter shape {theta_vec.shape} and gradient shape {g_vec.shape} differ")
    if not np.all(np.isfinite(g_vec)):
        raise DivergenceError(f"non-finite gradient {g_vec.tolist()}", reason="non_finite_gradient")
    if not np.all(np.isfinite(theta_vec)):
        raise DivergenceError(f"non-finite parameters {theta_vec.tolist()}", reason="non_finite_parameter")
    return theta_vec, g_vec


def _checked(theta: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(theta)):
        raise DivergenceError(f"update produced non-finite parameters {theta.tolist()}",
                              reason="non_finite_parameter")
    return theta


def sgd_step(theta: npt.ArrayLike, g: npt.ArrayLike, schedule: Schedule, k: int) -> np.ndarray:
    """θ − t_k g"""
    theta_vec, g_vec = _as_vectors(theta, g)
    return _checked(theta_vec - schedule.rate(k) * g_vec)


def _scaled(numerator: np.ndarray, denominator: np.ndarray) -> np.ndarray:
    """逐坐标相除；分母为零的坐标（ε = 0 且从未有过非零梯度）不移动"""
    return np.divide(numerator, denominator, out=np.zeros_like(numerator), where=denominator > 0.0)


def adam_step(state: AdamState, theta: npt.ArrayLike, g: npt.ArrayLike,
              schedule: Schedule) -> Tuple[AdamState, np.ndarray]:
    """
    Adam 更新

    m_{k+1} = β₁m_k + (1−β₁)g_k
    v_{k+1} = β₂v_k + (1−β₂)g_k²
    θ_{k+1} = θ_k − t_k · m̂_{k+1} / (√v̂_{k+1} + ε)
    """
    theta_vec, g_vec = _as_vectors(theta, g)
    k = state.k
    m = state.beta1 * state.m + (1.0 - state.beta1) * g_vec
    v = state.beta2 * state.v + (1.0 - state.beta2) * g_vec * g_vec
    m_hat = m / (1.0 - state.beta1 ** (k + 1))
    v_hat = v / (1.0 - state.beta2 ** (k + 1))
    new_theta = theta_vec - schedule.rate(k) * _scaled(m_hat, np.sqrt(v_hat) + state.eps)
    return replace(state, m=m, v=v, k=k + 1), _checked(new_theta)


def adagrad_step(state: AdaGradState, theta: npt.ArrayLike, g: npt.ArrayLike,
                 schedule: Schedule) -> Tuple[AdaGradState, np.ndarray]:
    """
    对角 AdaGrad 更新

    acc_{k+1} = acc_k + g_k ⊙ g_k
    θ_{k+1} = θ_k − t_k · g_k / (√acc_{k+1} + ε)
    """
    theta_vec, g_vec = _as_vectors(theta, g)
    acc = state.acc + g_vec * g_vec
    new_theta = theta_vec - schedule.rate(state.k) * _scaled(g_vec, np.sqrt(acc) + state.eps)
    return replace(state, acc=acc, k=state.k + 1), _checked(new_theta)


OPTIMIZER_NAMES = ("sgd", "adam", "adagrad")


@dataclass(frozen=True)
class OptimizerSpec:
    """优化器名称与超参数"""
    name: str
    schedule: Schedule = field(default_factory=lambda: Schedule(ScheduleKind.CONSTANT, 0.01))
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = ADAM_EPS

    def __post_init__(self):
        if self.name not in OPTIMIZER_NAMES:
            raise ConfigurationError(f"unknown optimizer '{self.name}', expected one of {OPTIMIZER_NAMES}",
                                     key="name")
        if self.name == "adam" and not (0.0 < self.beta1 < self.beta2 < 1.0):
            raise ConfigurationError(
                f"Adam requires 0 < beta1 < beta2 < 1, got beta1={self.beta1}, beta2={self.beta2}", key="beta1")
        if not self.eps > 0.0:
            raise ConfigurationError(f"eps must be positive, got {self.eps}", key="eps")

    def init_state(self, n_params: int) -> OptimizerState:
        if self.name == "adam":
            return AdamState.initial(n_params, self.beta1, self.beta2, self.eps)
        if self.name == "adagrad":
            return AdaGradState.initial(n_params, self.eps)
        return SGDState()

    def step(self, state: OptimizerState, theta: npt.ArrayLike,
             g: npt.ArrayLike) -> Tuple[OptimizerState, np.ndarray]:
        """按优化器类型分派一次更新"""
        if isinstance(state, AdamState):
            return adam_step(state, theta, g, self.schedule)
        if isinstance(state, AdaGradState):
            return adagrad_step(state, theta, g, self.schedule)
        return SGDState(k=state.k + 1), sgd_step(theta, g, self.schedule, state.k)
