"""
蒙特卡洛估计服务
重要性权重、自归一化重要性采样 (SNIS) 估计量，以及 R(θ) 与 ∇R(θ) 的无偏估计
所有权重运算在对数空间完成
"""

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
import numpy.typing as npt
from scipy.special import logsumexp

from ..core.proposals import ProposalFamily
from ..core.targets import Target, log_unnorm_density
from ..exceptions.errors import DegenerateBatchError, DomainError, ShapeError, WeightOverflowError

logger = logging.getLogger(__name__)

# ln W 超过该值视为溢出
LOG_WEIGHT_OVERFLOW = 300.0


@dataclass(frozen=True)
class TestFunction:
    """有界测试函数 φ，每次求值都检查 |φ| ≤ sup_norm"""
    eval: Callable[[np.ndarray], np.ndarray]
    sup_norm: float
    name: str = "phi"

    __test__ = False

    def __post_init__(self):
        if not self.sup_norm > 0.0:
            raise DomainError(f"sup_norm must be positive, got {self.sup_norm}")

    def __call__(self, points: np.ndarray) -> np.ndarray:
        values = np.asarray(self.eval(points), dtype=np.float64)
        if not np.all(np.abs(values) <= self.sup_norm):
            raise DomainError(f"test function '{self.name}' exceeded its sup norm {self.sup_norm}")
        return values


def indicator(lower: Sequence[float], upper: Sequence[float]) -> TestFunction:
    """超矩形 [lower, upper] 的示性函数，‖φ‖_∞ = 1"""
    lo = np.asarray(lower, dtype=np.float64)
    hi = np.asarray(upper, dtype=np.float64)
    if lo.shape != hi.shape or np.any(lo >= hi):
        raise DomainError(f"invalid rectangle bounds {lo.tolist()} / {hi.tolist()}")

    def _eval(points: np.ndarray) -> np.ndarray:
        return np.all((points >= lo) & (points <= hi), axis=1).astype(np.float64)

    return TestFunction(eval=_eval, sup_norm=1.0, name=f"1[{lo.tolist()}, {hi.tolist()}]")


@dataclass(frozen=True, eq=False)
class WeightedBatch:
    """
    加权样本批

    Attributes:
        points: 样本 (N, d)
        log_weights: ln W_θ(x_i)
        unnorm_weights: W_θ(x_i)
        norm_weights: 归一化权重，和为 1
        phi_values: φ(x_i)
        sup_norm: ‖φ‖_∞
    """
    points: np.ndarray
    log_weights: np.ndarray
    unnorm_weights: np.ndarray
    norm_weights: np.ndarray
    phi_values: np.ndarray
    sup_norm: float

    @property
    def size(self) -> int:
        return int(self.points.shape[0])

    @property
    def overflow(self) -> bool:
        return bool(np.any(self.log_weights > LOG_WEIGHT_OVERFLOW))


def log_importance_weights(target: Target, family: ProposalFamily, theta: npt.ArrayLike,
                           points: np.ndarray) -> np.ndarray:
    """ln W_θ(x_i) = ln Π(x_i) − ln q_θ(x_i)"""
    log_target = np.atleast_1d(log_unnorm_density(target, points))
    log_proposal = np.atleast_1d(family.log_density(theta, points))
    return log_target - log_proposal


def importance_weights(target: Target, family: ProposalFamily, theta: npt.ArrayLike,
                       points: np.ndarray) -> np.ndarray:
    """
    W_θ(x_i) = Π(x_i) / q_θ(x_i)

    Raises:
        WeightOverflowError: 存在 ln W > LOG_WEIGHT_OVERFLOW 或非有限权重
    """
    log_w = log_importance_weights(target, family, theta, points)
    _check_overflow(log_w)
    return np.exp(log_w)


def _check_overflow(log_w: np.ndarray) -> None:
    if np.any(np.isnan(log_w)) or np.any(log_w > LOG_WEIGHT_OVERFLOW):
        raise WeightOverflowError(f"log importance weight {np.nanmax(log_w):.4g} exceeds {LOG_WEIGHT_OVERFLOW}")


def build_batch(target: Target, family: ProposalFamily, theta: npt.ArrayLike,
                points: np.ndarray, phi: TestFunction) -> WeightedBatch:
    """
    由一批样本构造加权样本批

    溢出的对数权重不会在此抛错，由调用方根据 batch.overflow 处理

    Raises:
        DegenerateBatchError: 所有权重为零
    """
    log_w = log_importance_weights(target, family, theta, points)
    if np.any(np.isnan(log_w)):
        raise WeightOverflowError("NaN log importance weight")
    log_total = logsumexp(log_w)
    if not np.isfinite(log_total):
        if log_total == -np.inf:
            raise DegenerateBatchError("all importance weights are zero")
        raise WeightOverflowError("importance weight sum is not finite")
    with np.errstate(over='ignore'):
        unnorm = np.exp(log_w)
    norm_weights = np.exp(log_w - log_total)
    return WeightedBatch(points=points, log_weights=log_w, unnorm_weights=unnorm,
                         norm_weights=norm_weights, phi_values=phi(points), sup_norm=phi.sup_norm)


def snis_estimate(batch: WeightedBatch) -> float:
    """
    自归一化估计 (φ, π_θ^N) = Σ_i w_i φ(x_i)

    Raises:
        DegenerateBatchError: 权重之和为零
    """
    if not np.any(np.isfinite(batch.log_weights)):
        raise DegenerateBatchError("all importance weights are zero")
    estimate = weighted_estimate(batch.norm_weights, batch.phi_values)
    # 归一化权重之和的舍入误差不能让估计越过 ‖φ‖_∞
    return float(np.clip(estimate, -batch.sup_norm, batch.sup_norm))


def weighted_estimate(unnorm_weights: npt.ArrayLike, phi_values: npt.ArrayLike) -> float:
    """直接由未归一化权重和 φ 值计算 SNIS 估计"""
    weights = np.asarray(unnorm_weights, dtype=np.float64)
    values = np.asarray(phi_values, dtype=np.float64)
    if weights.shape != values.shape:
        raise ShapeError(f"weights {weights.shape} and phi values {values.shape} differ in shape")
    total = weights.sum()
    if not total > 0.0:
        raise DegenerateBatchError("all importance weights are zero")
    return float(np.dot(weights / total, values))


def estimate_R(unnorm_weights: npt.ArrayLike) -> float:
    """R̂ = (1/N) Σ_i W_i²，q_θ 下对 R(θ) 无偏"""
    weights = np.atleast_1d(np.asarray(unnorm_weights, dtype=np.float64))
    return float(np.mean(weights * weights))


def estimate_R_from_log(log_weights: npt.ArrayLike) -> float:
    """
    以对数权重计算 R̂，W² 取 exp(2 ln W)

    溢出时返回 inf 而不抛错，溢出由 WeightedBatch.overflow 标记
    """
    log_w = np.atleast_1d(np.asarray(log_weights, dtype=np.float64))
    with np.errstate(over='ignore'):
        return float(np.mean(np.exp(2.0 * log_w)))


def grad_R_terms(unnorm_weights: npt.ArrayLike, scores: npt.ArrayLike) -> np.ndarray:
    """逐样本梯度项 −W_i² ∇_θ ln q_θ(x_i)，返回 (N, p)"""
    weights = np.atleast_1d(np.asarray(unnorm_weights, dtype=np.float64))
    score_matrix = np.atleast_2d(np.asarray(scores, dtype=np.float64))
    if score_matrix.shape[0] != weights.shape[0]:
        raise ShapeError(f"{weights.shape[0]} weights but {score_matrix.shape[0]} score vectors")
    return -(weights * weights)[:, None] * score_matrix


def estimate_grad_R(unnorm_weights: npt.ArrayLike, scores: npt.ArrayLike) -> np.ndarray:
    """g(θ) = −(1/N) Σ_i W_i² ∇_θ ln q_θ(x_i)，对 ∇R(θ) 无偏"""
    return grad_R_terms(unnorm_weights, scores).mean(axis=0)
