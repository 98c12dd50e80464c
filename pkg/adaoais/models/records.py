"""运行轨迹与 MSE 曲线数据模型"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np


class RunStatus(Enum):
    """运行终止状态"""
    COMPLETED = "completed"
    DIVERGED = "diverged"


@dataclass(frozen=True, eq=False)
class TraceRecord:
    """单次迭代记录"""
    k: int
    theta: np.ndarray
    estimate: float
    r_hat: float
    grad_norm: float
    weight_overflow: bool = False
    floor_hit: bool = False


@dataclass(eq=False)
class RunTrace:
    """
    一次 OAIS 运行的完整轨迹

    完成的运行恰有 T+1 条记录 (k = 0..T)；发散的运行在发散迭代处截断
    """
    iterations: int
    records: List[TraceRecord] = field(default_factory=list)
    status: RunStatus = RunStatus.COMPLETED
    diverged_at: Optional[int] = None
    reason: Optional[str] = None
    seed: int = 0
    run_index: int = 0
    wall_time: float = 0.0

    @property
    def completed(self) -> bool:
        return self.status == RunStatus.COMPLETED

    def mark_diverged(self, k: int, reason: str) -> None:
        self.status = RunStatus.DIVERGED
        self.diverged_at = k
        self.reason = reason

    @property
    def estimates(self) -> np.ndarray:
        return np.array([r.estimate for r in self.records])

    @property
    def r_hats(self) -> np.ndarray:
        return np.array([r.r_hat for r in self.records])

    @property
    def grad_norms(self) -> np.ndarray:
        return np.array([r.grad_norm for r in self.records])

    @property
    def thetas(self) -> np.ndarray:
        if not self.records:
            return np.empty((0, 0))
        return np.stack([r.theta for r in self.records])

    @property
    def final(self) -> Optional[TraceRecord]:
        return self.records[-1] if self.records else None

    def status_label(self) -> str:
        if self.completed:
            return self.status.value
        return f"{self.status.value}({self.diverged_at}:{self.reason})"


@dataclass(eq=False)
class MseCurve:
    """
    逐迭代 MSE 曲线

    estimates 按运行序号保存每次完成运行的估计序列，mse 可由其精确重算
    """
    truth: float
    mse: np.ndarray
    run_count: int
    n_particles: int
    estimates: np.ndarray
    run_indices: Tuple[int, ...] = ()
    diverged_runs: int = 0

    @property
    def runs_used(self) -> int:
        return int(self.estimates.shape[0])

    @property
    def completed_runs(self) -> int:
        return self.runs_used

    @classmethod
    def from_estimates(cls, truth: float, estimates: Sequence[Sequence[float]], n_particles: int,
                       run_count: Optional[int] = None,
                       run_indices: Optional[Sequence[int]] = None) -> 'MseCurve':
        """由完成运行的估计矩阵 (runs_used, T+1) 约简出 MSE"""
        matrix = np.asarray(estimates, dtype=np.float64)
        if matrix.ndim != 2:
            raise ValueError(f"estimates must be a 2-D array, got shape {matrix.shape}")
        used = matrix.shape[0]
        total = used if run_count is None else run_count
        indices = tuple(range(used)) if run_indices is None else tuple(run_indices)
        curve = cls(truth=float(truth), mse=np.empty(matrix.shape[1]), run_count=total,
                    n_particles=n_particles, estimates=matrix, run_indices=indices,
                    diverged_runs=total - used)
        curve.mse = curve.recompute()
        return curve

    def recompute(self) -> np.ndarray:
        if self.runs_used == 0:
            return np.full(self.estimates.shape[1], np.nan)
        return np.mean((self.estimates - self.truth) ** 2, axis=0)
