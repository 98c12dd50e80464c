"""
提议分布族模块
参数化提议 q_θ 的采样、对数密度与得分函数 ∇_θ ln q_θ
优化器在无约束参数向量上行走：
  - 高斯族：(均值, Cholesky 严格下三角, Cholesky 对角线的对数)
  - Beta 族：(ln α, ln β)
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Dict, Optional, Union

import numpy as np
import numpy.typing as npt
from scipy import linalg
from scipy.special import betaln

from .special import digamma
from .targets import (
    GaussianSpec,
    REAL_SUPPORT,
    UNIT_INTERVAL_SUPPORT,
    Support,
    as_points,
    gaussian_log_pdf,
)
from ..exceptions.errors import ConfigurationError, DivergenceError, ShapeError

logger = logging.getLogger(__name__)

ParamVector = npt.NDArray[np.float64]

# Cholesky 对角线下限
DELTA_PD = 1e-6


@dataclass(frozen=True, eq=False)
class GaussianProposalParams:
    """高斯提议参数，floor_hit 表示对角线触及 DELTA_PD 下限"""
    mean: np.ndarray
    chol_factor: np.ndarray
    floor_hit: bool = False

    @property
    def covariance(self) -> np.ndarray:
        return self.chol_factor @ self.chol_factor.T

    def to_spec(self) -> GaussianSpec:
        return GaussianSpec(mean=self.mean, covariance=self.covariance)


@dataclass(frozen=True)
class BetaProposalParams:
    """Beta 提议参数，以对数形式存储"""
    log_alpha: float
    log_beta: float

    @classmethod
    def from_shape(cls, alpha: float, beta: float) -> 'BetaProposalParams':
        if not (alpha > 0.0 and beta > 0.0):
            raise ConfigurationError(f"Beta shape parameters must be positive, got ({alpha}, {beta})",
                                     key="theta0")
        return cls(log_alpha=float(np.log(alpha)), log_beta=float(np.log(beta)))

    @property
    def alpha(self) -> float:
        return float(np.exp(self.log_alpha))

    @property
    def beta(self) -> float:
        return float(np.exp(self.log_beta))


ProposalParams = Union[GaussianProposalParams, BetaProposalParams]


class ProposalFamily(ABC):
    """参数化提议分布族基类"""

    name: str
    dim: int
    n_params: int
    support: Support

    def check_length(self, theta: npt.ArrayLike) -> ParamVector:
        """校验参数向量长度并转换为 float64 数组"""
        vector = np.asarray(theta, dtype=np.float64)
        if vector.ndim != 1 or vector.shape[0] != self.n_params:
            raise ShapeError(
                f"{self.name} family expects {self.n_params} parameters, got shape {vector.shape}")
        return vector

    @abstractmethod
    def pack(self, params) -> ParamVector:
        """约束参数 → 无约束向量"""

    @abstractmethod
    def unpack(self, theta: npt.ArrayLike) -> ProposalParams:
        """无约束向量 → 约束参数"""

    @abstractmethod
    def sample(self, theta: npt.ArrayLike, rng: np.random.Generator, n: int) -> np.ndarray:
        """从 q_θ 抽取 n 个独立样本，返回 (n, d)"""

    @abstractmethod
    def log_density(self, theta: npt.ArrayLike, x: npt.ArrayLike) -> Union[float, np.ndarray]:
        """ln q_θ(x)"""

    @abstractmethod
    def score(self, theta: npt.ArrayLike, x: npt.ArrayLike) -> np.ndarray:
        """∇_θ ln q_θ(x)，点集输入返回 (n, p)"""

    @abstractmethod
    def param_columns(self, theta: npt.ArrayLike) -> Dict[str, float]:
        """轨迹 CSV 中的参数列（约束形式）"""

    def _points(self, x: npt.ArrayLike):
        single = np.ndim(x) <= 1 and (np.ndim(x) == 0 or np.shape(x)[0] == self.dim)
        points = as_points(x, self.dim)
        self.support.check(points)
        return points, single and points.shape[0] == 1


class GaussianFamily(ProposalFamily):
    """
    多元正态提议族 N(μ, LLᵀ)

    fixed_chol 给定时只优化均值，协方差固定为 fixed_chol·fixed_cholᵀ
    """

    name = "gaussian"

    def __init__(self, dim: int, fixed_chol: Optional[npt.ArrayLike] = None):
        if dim < 1:
            raise ConfigurationError(f"dimension must be positive, got {dim}", key="dim")
        self.dim = dim
        self.support = REAL_SUPPORT
        self._lower = np.tril_indices(dim, -1)
        if fixed_chol is not None:
            chol = np.atleast_2d(np.asarray(fixed_chol, dtype=np.float64))
            if chol.shape != (dim, dim) or np.any(np.diag(chol) <= 0.0):
                raise ConfigurationError("fixed Cholesky factor must be lower triangular with positive diagonal",
                                         key="fixed_chol")
            self.fixed_chol: Optional[np.ndarray] = np.tril(chol)
            self.n_params = dim
        else:
            self.fixed_chol = None
            self.n_params = dim + len(self._lower[0]) + dim

    @property
    def mean_only(self) -> bool:
        return self.fixed_chol is not None

    def pack(self, params: Union[GaussianProposalParams, GaussianSpec]) -> ParamVector:
        if isinstance(params, GaussianSpec):
            mean, chol = params.mean, params.chol
        else:
            mean, chol = params.mean, params.chol_factor
        mean = np.asarray(mean, dtype=np.float64)
        if mean.shape != (self.dim,):
            raise ShapeError(f"mean must have length {self.dim}, got {mean.shape}")
        if self.mean_only:
            return mean.copy()
        chol = np.asarray(chol, dtype=np.float64)
        return np.concatenate([mean, chol[self._lower], np.log(np.diag(chol))])

    def unpack(self, theta: npt.ArrayLike) -> GaussianProposalParams:
        vector = self.check_length(theta)
        if not np.all(np.isfinite(vector)):
            raise DivergenceError(f"non-finite Gaussian parameters {vector.tolist()}")
        d = self.dim
        mean = vector[:d].copy()
        if self.mean_only:
            return GaussianProposalParams(mean=mean, chol_factor=self.fixed_chol)

        n_lower = len(self._lower[0])
        chol = np.zeros((d, d))
        chol[self._lower] = vector[d:d + n_lower]
        with np.errstate(over='ignore'):
            diag = np.exp(vector[d + n_lower:])
        if not np.all(np.isfinite(diag)):
            raise DivergenceError("Cholesky diagonal overflowed")
        floor_hit = bool(np.any(diag < DELTA_PD))
        chol[np.diag_indices(d)] = np.maximum(diag, DELTA_PD)
        return GaussianProposalParams(mean=mean, chol_factor=chol, floor_hit=floor_hit)

    def sample(self, theta: npt.ArrayLike, rng: np.random.Generator, n: int) -> np.ndarray:
        params = self.unpack(theta)
        z = rng.standard_normal((n, self.dim))
        return params.mean + z @ params.chol_factor.T

    def log_density(self, theta: npt.ArrayLike, x: npt.ArrayLike) -> Union[float, np.ndarray]:
        params = self.unpack(theta)
        points, single = self._points(x)
        values = gaussian_log_pdf(points, params.mean, params.chol_factor)
        return float(values[0]) if single else values

    def score(self, theta: npt.ArrayLike, x: npt.ArrayLike) -> np.ndarray:
        vector = self.check_length(theta)
        params = self.unpack(vector)
        points, single = self._points(x)
        chol = params.chol_factor

        # z = L⁻¹(x − μ), u = Σ⁻¹(x − μ) = L⁻ᵀ z
        z = linalg.solve_triangular(chol, (points - params.mean).T, lower=True)
        u = linalg.solve_triangular(chol.T, z, lower=False)
        blocks = [u.T]

        if not self.mean_only:
            # ∂ ln q / ∂L_ij = u_i z_j − δ_ij / L_ii（下三角）
            rows, cols = self._lower
            blocks.append((u[rows] * z[cols]).T)
            d = self.dim
            diag_raw = np.exp(vector[-d:])
            chain = np.where(diag_raw < DELTA_PD, 0.0, np.diag(chol))
            diag_grad = u * z - (1.0 / np.diag(chol))[:, None]
            blocks.append((chain[:, None] * diag_grad).T)

        grads = np.concatenate(blocks, axis=1)
        return grads[0] if single else grads

    def param_columns(self, theta: npt.ArrayLike) -> Dict[str, float]:
        params = self.unpack(theta)
        columns = {f"mu_{i + 1}": float(params.mean[i]) for i in range(self.dim)}
        cov = params.covariance
        for i in range(self.dim):
            for j in range(self.dim):
                columns[f"sigma_{i + 1}{j + 1}"] = float(cov[i, j])
        return columns


class BetaFamily(ProposalFamily):
    """Beta(α, β) 提议族，支撑集 (0, 1)"""

    name = "beta"
    dim = 1
    n_params = 2
    support = UNIT_INTERVAL_SUPPORT

    # 采样结果夹到开区间内，避免浮点舍入落在 0 或 1 上
    _LOWEST = np.finfo(np.float64).tiny
    _HIGHEST = 1.0 - np.finfo(np.float64).epsneg

    def pack(self, params: BetaProposalParams) -> ParamVector:
        return np.array([params.log_alpha, params.log_beta], dtype=np.float64)

    def unpack(self, theta: npt.ArrayLike) -> BetaProposalParams:
        vector = self.check_length(theta)
        if not np.all(np.isfinite(vector)):
            raise DivergenceError(f"non-finite Beta parameters {vector.tolist()}")
        return BetaProposalParams(log_alpha=float(vector[0]), log_beta=float(vector[1]))

    def _shapes(self, theta: npt.ArrayLike):
        params = self.unpack(theta)
        with np.errstate(over='ignore'):
            alpha, beta = params.alpha, params.beta
        if not (np.isfinite(alpha) and np.isfinite(beta) and alpha > 0.0 and beta > 0.0):
            raise DivergenceError(f"Beta shape parameters out of range: ({alpha}, {beta})")
        return alpha, beta

    def sample(self, theta: npt.ArrayLike, rng: np.random.Generator, n: int) -> np.ndarray:
        alpha, beta = self._shapes(theta)
        draws = rng.beta(alpha, beta, size=n)
        return np.clip(draws, self._LOWEST, self._HIGHEST).reshape(n, 1)

    def log_density(self, theta: npt.ArrayLike, x: npt.ArrayLike) -> Union[float, np.ndarray]:
        alpha, beta = self._shapes(theta)
        points, single = self._points(x)
        x1 = points[:, 0]
        values = (alpha - 1.0) * np.log(x1) + (beta - 1.0) * np.log1p(-x1) - betaln(alpha, beta)
        return float(values[0]) if single else values

    def score(self, theta: npt.ArrayLike, x: npt.ArrayLike) -> np.ndarray:
        alpha, beta = self._shapes(theta)
        points, single = self._points(x)
        x1 = points[:, 0]
        psi_total = digamma(alpha + beta)
        # 乘以 dα/d ln α = α、dβ/d ln β = β
        d_alpha = alpha * (np.log(x1) - digamma(alpha) + psi_total)
        d_beta = beta * (np.log1p(-x1) - digamma(beta) + psi_total)
        grads = np.stack([d_alpha, d_beta], axis=1)
        return grads[0] if single else grads

    def param_columns(self, theta: npt.ArrayLike) -> Dict[str, float]:
        alpha, beta = self._shapes(theta)
        return {"alpha": alpha, "beta": beta}


PROPOSAL_FAMILIES = ("gaussian", "beta")


def make_family(name: str, dim: int) -> ProposalFamily:
    """
    按名称构造提议族

    Raises:
        ConfigurationError: 未知族名或维度不支持
    """
    if name == "gaussian":
        return GaussianFamily(dim)
    if name == "beta":
        if dim != 1:
            raise ConfigurationError(f"beta family is one-dimensional, target has dim {dim}", key="family")
        return BetaFamily()
    raise ConfigurationError(f"unknown proposal family '{name}', expected one of {PROPOSAL_FAMILIES}",
                             key="family")
