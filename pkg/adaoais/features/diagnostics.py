"""
诊断工具
梯度无偏性检验、评分函数的有限差分检验、固定 θ 下的 SNIS 误差界检验，以及 Beta 提议的跨运行平均
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from .oracle import fd_gradient, grad_R_gaussian_mean, gradient_oracle, rho_for
from ..core.proposals import BetaFamily, BetaProposalParams, GaussianFamily, ProposalFamily
from ..core.targets import GaussianSpec, Target, gaussian_target, make_experiment_target
from ..exceptions.errors import ConfigurationError, OracleUnavailableError
from ..models.records import RunTrace
from ..services.montecarlo import (
    TestFunction,
    build_batch,
    grad_R_terms,
    importance_weights,
    snis_estimate,
)
from ..utils.seeding import derive_rng

logger = logging.getLogger(__name__)

Z_THRESHOLD = 4.0
SCORE_FD_TOL = 1e-5


@dataclass(eq=False)
class GradcheckReport:
    """梯度检验报告"""
    case: str
    theta: np.ndarray
    n_samples: int
    mc_mean: np.ndarray
    mc_se: np.ndarray
    oracle: np.ndarray
    z_scores: np.ndarray
    score_error: float
    threshold: float = Z_THRESHOLD

    @property
    def gradient_ok(self) -> bool:
        return bool(np.all(np.abs(self.z_scores) < self.threshold))

    @property
    def score_ok(self) -> bool:
        return self.score_error < SCORE_FD_TOL

    @property
    def passed(self) -> bool:
        return self.gradient_ok and self.score_ok

    def lines(self) -> List[str]:
        out = [f"case {self.case}: theta={np.array2string(self.theta, precision=6)} n={self.n_samples}"]
        for i, (m, s, o, z) in enumerate(zip(self.mc_mean, self.mc_se, self.oracle, self.z_scores)):
            out.append(f"  coord {i}: mc={m:.6g} se={s:.3g} oracle={o:.6g} z={z:+.3f}")
        out.append(f"  score vs finite difference: max abs error {self.score_error:.3g}")
        out.append(f"  {'PASS' if self.passed else 'FAIL'}")
        return out


@dataclass(frozen=True, eq=False)
class GradcheckCase:
    """梯度检验用例：目标、提议族、θ 以及可选的手工推导梯度"""
    name: str
    target: Target
    family: ProposalFamily
    theta: np.ndarray
    exact_gradient: Optional[Callable[[np.ndarray], np.ndarray]] = None


def _gaussian_optimum() -> GradcheckCase:
    target = make_experiment_target("gaussian")
    family = GaussianFamily(target.dim)
    return GradcheckCase("gaussian-optimum", target, family, family.pack(target.spec))


def _gaussian_1d_mean() -> GradcheckCase:
    target = gaussian_target(GaussianSpec(mean=np.array([0.0]), covariance=np.array([[1.0]])),
                             name="gaussian-1d")
    family = GaussianFamily(1, fixed_chol=np.array([[1.0]]))
    return GradcheckCase("gaussian-1d-mean", target, family, np.array([0.5]),
                         exact_gradient=lambda theta: grad_R_gaussian_mean(theta))


def _beta_logitnormal() -> GradcheckCase:
    target = make_experiment_target("logitnormal")
    family = BetaFamily()
    return GradcheckCase("beta-logitnormal", target, family,
                         family.pack(BetaProposalParams.from_shape(2.0, 3.0)))


GRADCHECK_CASES: Dict[str, Callable[[], GradcheckCase]] = {
    "gaussian-optimum": _gaussian_optimum,
    "gaussian-1d-mean": _gaussian_1d_mean,
    "beta-logitnormal": _beta_logitnormal,
}


def make_gradcheck_case(name: str) -> GradcheckCase:
    """
    Raises:
        ConfigurationError: 未知用例
    """
    factory = GRADCHECK_CASES.get(name)
    if factory is None:
        raise ConfigurationError(f"unknown gradcheck case '{name}', expected one of {sorted(GRADCHECK_CASES)}",
                                 key="case")
    return factory()


def score_fd_error(family: ProposalFamily, theta: npt.ArrayLike, points: np.ndarray, h: float = 1e-5) -> float:
    """解析评分函数与 ln q_θ 中心差分之间的最大绝对误差"""
    theta = family.check_length(theta)
    worst = 0.0
    for x in points:
        point = x[None, :]
        analytic = family.score(theta, point)[0]
        numeric = fd_gradient(lambda t: float(np.atleast_1d(family.log_density(t, point))[0]), theta, h)
        worst = max(worst, float(np.max(np.abs(analytic - numeric))))
    return worst


def gradcheck(case: GradcheckCase, n_samples: int, seed: int, score_points: int = 5) -> GradcheckReport:
    """
    比较 g(θ) 的 Monte Carlo 均值与独立基准梯度，按坐标给出 z 分数

    Raises:
        ConfigurationError: n_samples < 2
        OracleUnavailableError: 没有可用的基准梯度
    """
    if n_samples < 2:
        raise ConfigurationError(f"gradcheck needs at least 2 samples, got {n_samples}", key="samples")
    family, theta = case.family, case.family.check_length(case.theta)
    rng = derive_rng(seed, 0)
    points = family.sample(theta, rng, n_samples)
    weights = importance_weights(case.target, family, theta, points)
    terms = grad_R_terms(weights, family.score(theta, points))
    mean = terms.mean(axis=0)
    se = terms.std(axis=0, ddof=1) / math.sqrt(n_samples)

    if case.exact_gradient is not None:
        oracle = np.asarray(case.exact_gradient(theta), dtype=np.float64)
    else:
        oracle = gradient_oracle(case.target, family, theta)

    diff = mean - oracle
    with np.errstate(divide='ignore', invalid='ignore'):
        z = np.where(se > 0.0, diff / se, np.where(np.abs(diff) < 1e-12, 0.0, np.inf))

    report = GradcheckReport(case=case.name, theta=theta, n_samples=n_samples, mc_mean=mean, mc_se=se,
                             oracle=oracle, z_scores=z,
                             score_error=score_fd_error(family, theta, points[:score_points]))
    logger.info(f"gradcheck {case.name}: max |z| {np.max(np.abs(z)):.3f}, "
                f"score error {report.score_error:.3g}")
    return report


def snis_mse_bound(target: Target, family: ProposalFamily, theta: npt.ArrayLike, sup_norm: float,
                n_particles: int) -> Optional[Tuple[float, float]]:
    """
    返回 (ρ(θ), 4‖φ‖²_∞ ρ(θ)/N)；没有可用基准时返回 None
    """
    try:
        rho = rho_for(target, family, theta)
    except OracleUnavailableError:
        return None
    return rho, 4.0 * sup_norm ** 2 * rho / n_particles


def fixed_theta_mse(target: Target, family: ProposalFamily, theta: npt.ArrayLike, phi: TestFunction,
                    n_particles: int, batches: int, truth: float, seed: int) -> float:
    """固定 θ 下 batches 个独立批次的 SNIS 均方误差"""
    theta = family.check_length(theta)
    errors = np.empty(batches)
    for b in range(batches):
        rng = derive_rng(seed, b)
        points = family.sample(theta, rng, n_particles)
        errors[b] = snis_estimate(build_batch(target, family, theta, points, phi)) - truth
    return float(np.mean(errors * errors))


def log_spaced_iterations(iterations: int, count: int = 8) -> List[int]:
    """0、T 以及 [1, T] 内按对数均匀分布的迭代序号"""
    if iterations <= 0:
        return [0]
    spaced = np.unique(np.round(np.logspace(0.0, math.log10(iterations), count)).astype(int))
    return sorted({0, iterations, *spaced.tolist()})


@dataclass
class ProposalSnapshot:
    """某次迭代跨运行平均后的 Beta 参数"""
    k: int
    alpha: float
    beta: float
    runs_used: int


def average_beta_proposals(traces: Sequence[RunTrace], family: ProposalFamily,
                           iterations: Sequence[int]) -> List[ProposalSnapshot]:
    """
    对完成运行的 (α, β) 在指定迭代处取平均

    Raises:
        ConfigurationError: 提议族不是 Beta
    """
    if not isinstance(family, BetaFamily):
        raise ConfigurationError("proposal averaging needs the beta family", key="family")
    completed = [t for t in sorted(traces, key=lambda t: t.run_index) if t.completed]
    snapshots = []
    for k in iterations:
        shapes = [family.unpack(t.records[k].theta) for t in completed if k < len(t.records)]
        if not shapes:
            snapshots.append(ProposalSnapshot(k, math.nan, math.nan, 0))
            continue
        snapshots.append(ProposalSnapshot(k, float(np.mean([s.alpha for s in shapes])),
                                          float(np.mean([s.beta for s in shapes])), len(shapes)))
    return snapshots
