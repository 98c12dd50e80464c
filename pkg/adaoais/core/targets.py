"""
目标分布模块
定义未归一化目标密度 Π(x) 以及三个实验预设目标
内置目标均使用已归一化密度（Z = 1）
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional, Tuple, Union

import numpy as np
import numpy.typing as npt
from scipy import linalg
from scipy.special import logit, logsumexp
from scipy.stats import norm

from ..exceptions.errors import ConfigurationError, DomainError, ShapeError

logger = logging.getLogger(__name__)

_LOG_2PI = math.log(2.0 * math.pi)


class SupportKind(Enum):
    """支撑集类型"""
    REAL = "real"
    UNIT_INTERVAL = "unit_interval"
    BOX = "box"


@dataclass(frozen=True)
class Support:
    """支撑集：R^d、(0,1) 或超矩形"""
    kind: SupportKind
    lower: Optional[Tuple[float, ...]] = None
    upper: Optional[Tuple[float, ...]] = None

    def contains(self, points: np.ndarray) -> np.ndarray:
        """逐点判断 points (n, d) 是否位于支撑集内"""
        if self.kind == SupportKind.REAL:
            return np.all(np.isfinite(points), axis=1)
        if self.kind == SupportKind.UNIT_INTERVAL:
            return np.all((points > 0.0) & (points < 1.0), axis=1)
        lower = np.asarray(self.lower)
        upper = np.asarray(self.upper)
        return np.all((points >= lower) & (points <= upper), axis=1)

    def check(self, points: np.ndarray) -> None:
        """存在支撑集外的点时抛出 DomainError"""
        inside = self.contains(points)
        if not np.all(inside):
            bad = points[~inside][0]
            raise DomainError(f"point {bad.tolist()} lies outside the {self.kind.value} support")


REAL_SUPPORT = Support(SupportKind.REAL)
UNIT_INTERVAL_SUPPORT = Support(SupportKind.UNIT_INTERVAL)


def as_points(x: npt.ArrayLike, dim: int) -> np.ndarray:
    """把单点 (d,) 或点集 (n, d) 统一为 (n, d) 数组"""
    points = np.asarray(x, dtype=np.float64)
    if points.ndim == 0 and dim == 1:
        points = points.reshape(1, 1)
    elif points.ndim == 1:
        points = points.reshape(1, -1) if points.shape[0] == dim else points.reshape(-1, 1)
    if points.ndim != 2 or points.shape[1] != dim:
        raise ShapeError(f"expected points of dimension {dim}, got shape {np.shape(x)}")
    return points


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    """高斯分布参数 (均值, 协方差)"""
    mean: np.ndarray
    covariance: np.ndarray
    chol: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        mean = np.atleast_1d(np.asarray(self.mean, dtype=np.float64))
        cov = np.atleast_2d(np.asarray(self.covariance, dtype=np.float64))
        if cov.shape != (mean.shape[0], mean.shape[0]):
            raise ShapeError(f"covariance shape {cov.shape} does not match mean length {mean.shape[0]}")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise ConfigurationError("covariance must be symmetric", key="covariance")
        try:
            chol = np.linalg.cholesky(cov)
        except np.linalg.LinAlgError as e:
            raise ConfigurationError("covariance must be positive definite", key="covariance",
                                     original_error=e)
        object.__setattr__(self, 'mean', mean)
        object.__setattr__(self, 'covariance', cov)
        object.__setattr__(self, 'chol', chol)

    @property
    def dim(self) -> int:
        return int(self.mean.shape[0])

    def log_pdf(self, points: np.ndarray) -> np.ndarray:
        """点集 (n, d) 上的对数密度"""
        return gaussian_log_pdf(points, self.mean, self.chol)


def gaussian_log_pdf(points: np.ndarray, mean: np.ndarray, chol: np.ndarray) -> np.ndarray:
    """以 Cholesky 因子参数化的多元正态对数密度"""
    z = linalg.solve_triangular(chol, (points - mean).T, lower=True)
    half_log_det = np.sum(np.log(np.diag(chol)))
    return -0.5 * np.sum(z * z, axis=0) - half_log_det - 0.5 * mean.shape[0] * _LOG_2PI


@dataclass(frozen=True, eq=False)
class MixtureSpec:
    """高斯混合参数，components 为 (权重, GaussianSpec) 列表"""
    components: Tuple[Tuple[float, GaussianSpec], ...]

    def __post_init__(self):
        components = tuple((float(w), spec) for w, spec in self.components)
        if not components:
            raise ConfigurationError("mixture needs at least one component", key="components")
        weights = np.array([w for w, _ in components])
        if np.any(weights <= 0.0) or np.any(weights > 1.0):
            raise ConfigurationError("mixture weights must lie in (0, 1]", key="components")
        if abs(weights.sum() - 1.0) > 1e-12:
            raise ConfigurationError(f"mixture weights sum to {weights.sum()}, not 1", key="components")
        if len({spec.dim for _, spec in components}) != 1:
            raise ShapeError("mixture components have different dimensions")
        object.__setattr__(self, 'components', components)

    @property
    def dim(self) -> int:
        return self.components[0][1].dim

    def log_pdf(self, points: np.ndarray) -> np.ndarray:
        per_component = np.stack([math.log(w) + spec.log_pdf(points) for w, spec in self.components])
        return logsumexp(per_component, axis=0)


@dataclass(frozen=True)
class LogitNormalSpec:
    """LogitNormal(loc, scale)：sigmoid(Z) 的分布，Z ~ N(loc, scale²)"""
    loc: float = 0.0
    scale: float = 1.0

    def __post_init__(self):
        if not self.scale > 0.0:
            raise ConfigurationError("logit-normal scale must be positive", key="scale")

    dim = 1

    def log_pdf(self, points: np.ndarray) -> np.ndarray:
        # log φ(logit x) − ln x − ln(1 − x)，避免边界附近下溢
        x = points[:, 0]
        return (norm.logpdf(logit(x), loc=self.loc, scale=self.scale)
                - np.log(x) - np.log1p(-x))


TargetSpec = Union[GaussianSpec, MixtureSpec, LogitNormalSpec]


@dataclass(frozen=True, eq=False)
class Target:
    """
    未归一化目标密度

    Attributes:
        name: 目标名称
        dim: 维度
        log_density_fn: 点集 (n, d) → ln Π 的函数
        support: 支撑集
        log_norm_const: 已知时为 ln Z
        spec: 生成该目标的参数（预设目标可用，供真值基准使用）
    """
    name: str
    dim: int
    log_density_fn: Callable[[np.ndarray], np.ndarray]
    support: Support
    log_norm_const: Optional[float] = None
    spec: Optional[TargetSpec] = None

    def log_unnorm_density(self, x: npt.ArrayLike) -> Union[float, np.ndarray]:
        """见模块函数 log_unnorm_density"""
        return log_unnorm_density(self, x)


def log_unnorm_density(target: Target, x: npt.ArrayLike) -> Union[float, np.ndarray]:
    """
    计算 ln Π(x)

    Args:
        target: 目标分布
        x: 单点 (d,) 或点集 (n, d)

    Returns:
        单点返回 float，点集返回 (n,) 数组

    Raises:
        DomainError: 存在支撑集外的点
        ShapeError: 维度不匹配
    """
    single = np.ndim(x) <= 1 and (np.ndim(x) == 0 or np.shape(x)[0] == target.dim)
    points = as_points(x, target.dim)
    target.support.check(points)
    values = target.log_density_fn(points)
    return float(values[0]) if single and points.shape[0] == 1 else values


def gaussian_target(spec: GaussianSpec, name: str = "gaussian") -> Target:
    """以高斯分布为目标"""
    return Target(name=name, dim=spec.dim, log_density_fn=spec.log_pdf,
                  support=REAL_SUPPORT, log_norm_const=0.0, spec=spec)


def mixture_target(spec: MixtureSpec, name: str = "mixture") -> Target:
    """以高斯混合为目标"""
    return Target(name=name, dim=spec.dim, log_density_fn=spec.log_pdf,
                  support=REAL_SUPPORT, log_norm_const=0.0, spec=spec)


def logitnormal_target(spec: LogitNormalSpec = LogitNormalSpec(), name: str = "logitnormal") -> Target:
    """以 logit-normal 分布为目标，支撑集 (0, 1)"""
    return Target(name=name, dim=1, log_density_fn=spec.log_pdf,
                  support=UNIT_INTERVAL_SUPPORT, log_norm_const=0.0, spec=spec)


def _experiment_gaussian() -> Target:
    spec = GaussianSpec(mean=np.array([1.0, -1.0]),
                        covariance=np.array([[2.0, -0.5], [-0.5, 2.0]]))
    return gaussian_target(spec, name="gaussian")


def _experiment_mixture() -> Target:
    identity = np.eye(2)
    spec = MixtureSpec(components=(
        (0.5, GaussianSpec(mean=np.array([3.0, 0.0]), covariance=identity)),
        (0.5, GaussianSpec(mean=np.array([-3.0, 0.0]), covariance=identity)),
    ))
    return mixture_target(spec, name="mixture")


def _experiment_logitnormal() -> Target:
    return logitnormal_target(LogitNormalSpec(loc=0.0, scale=1.0), name="logitnormal")


EXPERIMENT_TARGETS = {
    "gaussian": _experiment_gaussian,
    "mixture": _experiment_mixture,
    "logitnormal": _experiment_logitnormal,
}


def make_experiment_target(name: str) -> Target:
    """
    按名称构造实验目标

    Args:
        name: gaussian | mixture | logitnormal

    Raises:
        ConfigurationError: 未知名称
    """
    factory = EXPERIMENT_TARGETS.get(name)
    if factory is None:
        raise ConfigurationError(
            f"unknown target '{name}', expected one of {sorted(EXPERIMENT_TARGETS)}", key="target")
    return factory()
