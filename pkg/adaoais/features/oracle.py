"""
独立真值基准
高斯间 ρ 的闭式解、张量网格求积、logit-normal 区间概率、有限差分梯度与 Polyak–Łojasiewicz 数值检验
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt
from numpy.polynomial.legendre import leggauss
from scipy.special import logit, ndtr

from ..core.proposals import GaussianFamily, ProposalFamily
from ..core.targets import GaussianSpec, SupportKind, Target, log_unnorm_density
from ..exceptions.errors import AccuracyError, DomainError, OracleUnavailableError

logger = logging.getLogger(__name__)

MIN_NODES = 64
# (0,1) 支撑集上的积分区间 (δ, 1−δ)
UNIT_INTERVAL_DELTA = 1e-12


class QuadratureScheme(Enum):
    """求积格式"""
    MIDPOINT = "midpoint"
    GAUSS_LEGENDRE = "gauss_legendre"


@dataclass(frozen=True)
class QuadratureGrid:
    """张量积求积网格"""
    nodes: Tuple[int, ...]
    bounds: Tuple[Tuple[float, float], ...]
    scheme: QuadratureScheme = QuadratureScheme.GAUSS_LEGENDRE

    def __post_init__(self):
        if len(self.nodes) != len(self.bounds):
            raise DomainError("grid needs one node count per bounded dimension")
        if any(n < MIN_NODES for n in self.nodes):
            raise DomainError(f"quadrature grids need at least {MIN_NODES} nodes per dimension")
        if any(not lo < hi for lo, hi in self.bounds):
            raise DomainError(f"invalid quadrature bounds {self.bounds}")

    @property
    def dim(self) -> int:
        return len(self.nodes)

    def refined(self) -> 'QuadratureGrid':
        return QuadratureGrid(tuple(2 * n for n in self.nodes), self.bounds, self.scheme)

    def points_and_weights(self) -> Tuple[np.ndarray, np.ndarray]:
        """返回网格点 (M, d) 与权重 (M,)"""
        axes = [_rule_1d(n, lo, hi, self.scheme) for n, (lo, hi) in zip(self.nodes, self.bounds)]
        mesh = np.meshgrid(*[x for x, _ in axes], indexing='ij')
        weight_mesh = np.meshgrid(*[w for _, w in axes], indexing='ij')
        points = np.stack([m.ravel() for m in mesh], axis=1)
        weights = np.prod(np.stack([w.ravel() for w in weight_mesh], axis=1), axis=1)
        return points, weights


def _rule_1d(n: int, lo: float, hi: float, scheme: QuadratureScheme) -> Tuple[np.ndarray, np.ndarray]:
    half = 0.5 * (hi - lo)
    if scheme == QuadratureScheme.GAUSS_LEGENDRE:
        x, w = leggauss(n)
        return lo + half * (x + 1.0), half * w
    width = (hi - lo) / n
    return lo + width * (np.arange(n) + 0.5), np.full(n, width)


def integrate(f: Callable[[np.ndarray], np.ndarray], grid: QuadratureGrid) -> float:
    """∫ f 在网格上的求积值，f 接受 (M, d) 点集"""
    points, weights = grid.points_and_weights()
    return float(np.dot(weights, f(points)))


def default_grid(target: Target, nodes: int = 512,
                 scheme: QuadratureScheme = QuadratureScheme.GAUSS_LEGENDRE) -> QuadratureGrid:
    """覆盖目标主要质量的网格：R^d 上取 [−12, 12]^d（至少 8 个标准差），(0,1) 上取 (δ, 1−δ)"""
    if target.support.kind == SupportKind.UNIT_INTERVAL:
        bounds = ((UNIT_INTERVAL_DELTA, 1.0 - UNIT_INTERVAL_DELTA),) * target.dim
    elif target.support.kind == SupportKind.BOX:
        bounds = tuple(zip(target.support.lower, target.support.upper))
    else:
        bounds = _gaussian_bounds(target) if isinstance(target.spec, GaussianSpec) else ((-12.0, 12.0),) * target.dim
    return QuadratureGrid((nodes,) * target.dim, bounds, scheme)


def _gaussian_bounds(target: Target) -> Tuple[Tuple[float, float], ...]:
    spec = target.spec
    std = np.sqrt(np.diag(spec.covariance))
    width = np.maximum(8.0 * std, 12.0 - np.abs(spec.mean))
    return tuple((float(m - w), float(m + w)) for m, w in zip(spec.mean, width))


def rho_gaussian(pi_spec: GaussianSpec, q_spec: GaussianSpec) -> float:
    """
    ρ = ∫ π²/q dx 的闭式解（= D_χ²(π‖q) + 1）

    A = 2Σ_π⁻¹ − Σ_q⁻¹ 非正定时积分发散，返回 math.inf
    """
    pi_prec = np.linalg.inv(pi_spec.covariance)
    q_prec = np.linalg.inv(q_spec.covariance)
    a = 2.0 * pi_prec - q_prec
    a = 0.5 * (a + a.T)
    if np.any(np.linalg.eigvalsh(a) <= 0.0):
        return math.inf
    b = 2.0 * pi_prec @ pi_spec.mean - q_prec @ q_spec.mean
    c = 2.0 * pi_spec.mean @ pi_prec @ pi_spec.mean - q_spec.mean @ q_prec @ q_spec.mean
    _, logdet_a = np.linalg.slogdet(a)
    _, logdet_pi = np.linalg.slogdet(pi_spec.covariance)
    _, logdet_q = np.linalg.slogdet(q_spec.covariance)
    log_rho = (0.5 * logdet_q - logdet_pi - 0.5 * logdet_a
               + 0.5 * (b @ np.linalg.solve(a, b) - c))
    return float(np.exp(log_rho))


def rho_gaussian_mean_gradient(pi_spec: GaussianSpec, q_spec: GaussianSpec) -> np.ndarray:
    """∇_{μ_q} ρ = ρ · Σ_q⁻¹ (μ_q − A⁻¹ b)"""
    rho = rho_gaussian(pi_spec, q_spec)
    if not math.isfinite(rho):
        return np.full(q_spec.dim, np.inf)
    pi_prec = np.linalg.inv(pi_spec.covariance)
    q_prec = np.linalg.inv(q_spec.covariance)
    a = 2.0 * pi_prec - q_prec
    b = 2.0 * pi_prec @ pi_spec.mean - q_prec @ q_spec.mean
    return rho * q_prec @ (q_spec.mean - np.linalg.solve(a, b))


def R_quadrature(target: Target, family: ProposalFamily, theta: npt.ArrayLike,
                 grid: Optional[QuadratureGrid] = None) -> float:
    """R(θ) = ∫ Π²/q_θ dx 的求积值（dim ≤ 2）"""
    if target.dim > 2:
        raise OracleUnavailableError(f"quadrature oracle supports dim <= 2, target has dim {target.dim}")
    grid = grid or default_grid(target)

    def integrand(points: np.ndarray) -> np.ndarray:
        log_pi = log_unnorm_density(target, points)
        log_q = family.log_density(theta, points)
        return np.exp(2.0 * log_pi - log_q)

    return integrate(integrand, grid)


def rho_quadrature(target: Target, family: ProposalFamily, theta: npt.ArrayLike,
                   grid: Optional[QuadratureGrid] = None) -> float:
    """ρ(θ) = R(θ)/Z²"""
    log_z = target.log_norm_const or 0.0
    return R_quadrature(target, family, theta, grid) * math.exp(-2.0 * log_z)


def rho_for(target: Target, family: ProposalFamily, theta: npt.ArrayLike) -> float:
    """高斯/高斯组合用闭式解，其余情况用求积"""
    if isinstance(target.spec, GaussianSpec) and isinstance(family, GaussianFamily):
        return rho_gaussian(target.spec, family.unpack(theta).to_spec())
    return rho_quadrature(target, family, theta)


def rect_prob(target: Target, rect: Tuple[Sequence[float], Sequence[float]], nodes: int = MIN_NODES,
              scheme: QuadratureScheme = QuadratureScheme.GAUSS_LEGENDRE,
              rtol: float = 1e-6, max_nodes: int = 4096) -> float:
    """
    P(X ∈ rect)，对归一化密度做张量网格求积，节点数加倍直到相对变化 < rtol

    Raises:
        AccuracyError: 加倍到 max_nodes 仍未收敛
    """
    return refine_rect_prob(target, rect, nodes, scheme, rtol, max_nodes)[0]


def refine_rect_prob(target: Target, rect: Tuple[Sequence[float], Sequence[float]], nodes: int = MIN_NODES,
                     scheme: QuadratureScheme = QuadratureScheme.GAUSS_LEGENDRE,
                     rtol: float = 1e-6, max_nodes: int = 4096) -> Tuple[float, int]:
    """同 rect_prob，同时返回收敛时每维的节点数"""
    if target.dim > 2:
        raise OracleUnavailableError(f"rect_prob supports dim <= 2, target has dim {target.dim}")
    lower, upper = rect
    bounds = tuple((float(lo), float(hi)) for lo, hi in zip(lower, upper))
    if target.support.kind == SupportKind.UNIT_INTERVAL:
        bounds = tuple((max(lo, UNIT_INTERVAL_DELTA), min(hi, 1.0 - UNIT_INTERVAL_DELTA)) for lo, hi in bounds)
    log_z = target.log_norm_const or 0.0

    def density(points: np.ndarray) -> np.ndarray:
        return np.exp(log_unnorm_density(target, points) - log_z)

    grid = QuadratureGrid((nodes,) * target.dim, bounds, scheme)
    value = integrate(density, grid)
    while grid.nodes[0] < max_nodes:
        grid = grid.refined()
        refined = integrate(density, grid)
        if abs(refined - value) <= rtol * abs(refined):
            return refined, grid.nodes[0]
        value = refined
    raise AccuracyError(f"rect_prob did not converge to rtol {rtol} with {max_nodes} nodes")


def logitnormal_interval_prob(a: float, b: float, loc: float = 0.0, scale: float = 1.0) -> float:
    """X = sigmoid(Z), Z ~ N(loc, scale²) 时 P(a ≤ X ≤ b) = Φ((logit b − loc)/scale) − Φ((logit a − loc)/scale)"""
    if not (0.0 <= a < b <= 1.0):
        raise DomainError(f"need 0 <= a < b <= 1, got ({a}, {b})")
    return float(ndtr((logit(b) - loc) / scale) - ndtr((logit(a) - loc) / scale))


def fd_gradient(f: Callable[[np.ndarray], float], theta: npt.ArrayLike, h: float = 1e-5) -> np.ndarray:
    """
    中心差分梯度，误差 O(h²)

    Raises:
        DomainError: f 在 h 邻域内取到非有限值
    """
    base = np.asarray(theta, dtype=np.float64)
    grad = np.empty_like(base)
    for i in range(base.shape[0]):
        step = np.zeros_like(base)
        step[i] = h
        plus, minus = f(base + step), f(base - step)
        if not (math.isfinite(plus) and math.isfinite(minus)):
            raise DomainError(f"non-finite function value near coordinate {i}")
        grad[i] = (plus - minus) / (2.0 * h)
    return grad


def R_gaussian_mean(theta: npt.ArrayLike, mu_pi: float = 0.0, sigma: float = 1.0) -> np.ndarray:
    """一维等方差高斯、仅均值参数化时 R(θ) = exp((μ_π − θ)²/σ²)"""
    u = (np.asarray(theta, dtype=np.float64) - mu_pi) / sigma
    return np.exp(u * u)


def grad_R_gaussian_mean(theta: npt.ArrayLike, mu_pi: float = 0.0, sigma: float = 1.0) -> np.ndarray:
    """dR/dθ = 2(θ − μ_π)/σ² · exp((μ_π − θ)²/σ²)"""
    theta = np.asarray(theta, dtype=np.float64)
    return 2.0 * (theta - mu_pi) / sigma ** 2 * R_gaussian_mean(theta, mu_pi, sigma)


def pl_check(thetas: Sequence[float], mu: float, mu_pi: float = 0.0, sigma: float = 1.0) -> bool:
    """
    检验 R(θ) − R(θ*) ≤ ‖∇R(θ)‖² / (2μ) 在每个网格点成立

    R(θ*) = 1，左侧用 expm1 计算以保持 θ ≈ θ* 附近的精度
    """
    theta = np.asarray(thetas, dtype=np.float64)
    u = (theta - mu_pi) / sigma
    gap = np.expm1(u * u)
    grad = grad_R_gaussian_mean(theta, mu_pi, sigma)
    return bool(np.all(gap <= grad * grad / (2.0 * mu)))


def gradient_oracle(target: Target, family: ProposalFamily, theta: npt.ArrayLike,
                    h: float = 1e-5) -> np.ndarray:
    """
    ∇R(θ) 的独立基准

    高斯目标 + 高斯提议：对闭式 Z²ρ 做有限差分；其余 dim ≤ 2 的组合：对求积 R 做有限差分

    Raises:
        OracleUnavailableError: 没有可用基准
    """
    theta = family.check_length(theta)
    z_sq = math.exp(2.0 * (target.log_norm_const or 0.0))
    if isinstance(target.spec, GaussianSpec) and isinstance(family, GaussianFamily):
        return fd_gradient(lambda t: z_sq * rho_gaussian(target.spec, family.unpack(t).to_spec()), theta, h)
    if target.dim <= 2:
        grid = default_grid(target, nodes=2048 if target.dim == 1 else 256)
        return fd_gradient(lambda t: R_quadrature(target, family, t, grid), theta, h)
    raise OracleUnavailableError(f"no gradient oracle for target '{target.name}' with family '{family.name}'")
