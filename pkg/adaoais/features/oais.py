"""
OAIS 主循环
每次迭代：从 q_{θ_k} 采样 N 点 → 构造权重 → 报告 SNIS 估计 → 用同一批样本估计 ∇R(θ_k) → 优化器更新
迭代 k 的随机流由 (seed, stream..., k) 派生，可从任意 θ_k 快照重放
"""

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence, Tuple

import numpy as np
import numpy.typing as npt

from .experiment import ExperimentSetup
from .monitor import RunMonitor
from ..core.proposals import ProposalFamily
from ..core.targets import Target
from ..exceptions.errors import (
    ConfigurationError,
    DegenerateBatchError,
    DivergenceError,
)
from ..models.records import MseCurve, RunTrace, TraceRecord
from ..services.montecarlo import (
    TestFunction,
    build_batch,
    estimate_R_from_log,
    estimate_grad_R,
    snis_estimate,
)
from ..services.optimizers import OptimizerSpec
from ..utils.seeding import child_seed, derive_rng

logger = logging.getLogger(__name__)


def _iterate(target: Target, family: ProposalFamily, theta: np.ndarray, phi: TestFunction,
             n_particles: int, rng: np.random.Generator, k: int) -> Tuple[TraceRecord, np.ndarray]:
    params = family.unpack(theta)
    floor_hit = bool(getattr(params, 'floor_hit', False))
    points = family.sample(theta, rng, n_particles)
    batch = build_batch(target, family, theta, points, phi)
    estimate = snis_estimate(batch)
    with np.errstate(over='ignore', invalid='ignore'):
        r_hat = estimate_R_from_log(batch.log_weights)
        g = estimate_grad_R(batch.unnorm_weights, family.score(theta, points))
        grad_norm = float(np.linalg.norm(g))
    record = TraceRecord(k=k, theta=theta.copy(), estimate=estimate, r_hat=r_hat, grad_norm=grad_norm,
                         weight_overflow=batch.overflow, floor_hit=floor_hit)
    return record, g


def replay_iteration(target: Target, family: ProposalFamily, theta_k: npt.ArrayLike, phi: TestFunction,
                     n_particles: int, seed: int, k: int, stream: Sequence[int] = ()) -> TraceRecord:
    """从 θ_k 快照重放第 k 次迭代的报告值"""
    theta = family.check_length(theta_k)
    record, _ = _iterate(target, family, theta, phi, n_particles, derive_rng(seed, *stream, k), k)
    return record


def run_oais(target: Target, family: ProposalFamily, theta0: npt.ArrayLike, phi: TestFunction,
             optimizer: OptimizerSpec, n_particles: int, iterations: int, seed: int,
             stream: Sequence[int] = ()) -> RunTrace:
    """
    执行一次 OAIS 运行

    Args:
        target: 目标分布
        family: 提议分布族
        theta0: 初始无约束参数
        phi: 有界测试函数
        optimizer: 优化器规格
        n_particles: 每次迭代的粒子数 N
        iterations: 迭代次数 T，记录 k = 0..T
        seed: 主随机种子
        stream: 子流键，多次运行时为 (run_index,)

    Returns:
        RunTrace: 完成或发散的运行轨迹

    Raises:
        ConfigurationError: 参数非法，在任何采样之前抛出
    """
    if n_particles < 1:
        raise ConfigurationError(f"n_particles must be >= 1, got {n_particles}", key="n_particles")
    if iterations < 0:
        raise ConfigurationError(f"iterations must be >= 0, got {iterations}", key="iterations")
    theta = family.check_length(theta0).copy()
    try:
        family.unpack(theta)
    except DivergenceError as e:
        raise ConfigurationError(f"invalid initial parameters: {e}", key="theta0", original_error=e)

    run_index = int(stream[0]) if stream else 0
    trace = RunTrace(iterations=iterations, run_index=run_index,
                     seed=child_seed(seed, run_index) if stream else int(seed))
    state = optimizer.init_state(family.n_params)
    started = time.perf_counter()

    for k in range(iterations + 1):
        rng = derive_rng(seed, *stream, k)
        try:
            record, g = _iterate(target, family, theta, phi, n_particles, rng, k)
        except DivergenceError as e:
            trace.mark_diverged(k, e.reason)
            break
        except DegenerateBatchError:
            trace.mark_diverged(k, "degenerate_batch")
            break

        trace.records.append(record)
        if record.weight_overflow:
            trace.mark_diverged(k, "weight_overflow")
            break
        if k == iterations:
            break
        try:
            state, theta = optimizer.step(state, theta, g)
        except DivergenceError as e:
            trace.mark_diverged(k, e.reason)
            break

    trace.wall_time = time.perf_counter() - started
    if trace.completed:
        logger.debug(f"run {run_index} completed {iterations} iterations in {trace.wall_time:.2f}s")
    else:
        logger.warning(f"run {run_index} diverged at iteration {trace.diverged_at} ({trace.reason})")
    return trace


def run_setup(setup: ExperimentSetup, master_seed: int, run_index: int) -> RunTrace:
    """按实验设置执行第 run_index 次运行"""
    return run_oais(setup.target, setup.family, setup.theta0, setup.phi, setup.optimizer,
                    setup.n_particles, setup.iterations, master_seed, stream=(run_index,))


def run_many(setup: ExperimentSetup, runs: int, master_seed: int, jobs: int = 1,
             monitor: Optional[RunMonitor] = None) -> List[RunTrace]:
    """
    并发执行多次独立运行

    结果按运行序号排列，与 jobs 无关；给定 monitor 时记录每次运行的状态与耗时
    """
    if runs < 1:
        raise ConfigurationError(f"runs must be >= 1, got {runs}", key="runs")
    if jobs < 1:
        raise ConfigurationError(f"jobs must be >= 1, got {jobs}", key="jobs")
    logger.info(f"{setup.name}: {runs} runs, N={setup.n_particles}, T={setup.iterations}, jobs={jobs}")
    if jobs == 1:
        traces = [run_setup(setup, master_seed, r) for r in range(runs)]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as executor:
            traces = list(executor.map(lambda r: run_setup(setup, master_seed, r), range(runs)))
    if monitor is not None:
        monitor.record_runs(traces)
    return traces


def reduce_mse(traces: Sequence[RunTrace], truth: float, n_particles: int) -> MseCurve:
    """排除发散运行后按运行序号约简出 MSE 曲线"""
    if not np.isfinite(truth):
        raise ConfigurationError(f"truth must be finite, got {truth}", key="truth")
    ordered = sorted(traces, key=lambda t: t.run_index)
    completed = [t for t in ordered if t.completed]
    width = max((t.iterations for t in ordered), default=0) + 1
    estimates = np.stack([t.estimates for t in completed]) if completed else np.empty((0, width))
    curve = MseCurve.from_estimates(truth, estimates, n_particles, run_count=len(ordered),
                                    run_indices=[t.run_index for t in completed])
    if curve.diverged_runs:
        logger.warning(f"excluded {curve.diverged_runs} diverged runs out of {curve.run_count} from the MSE")
    return curve


def run_mse(setup: ExperimentSetup, runs: int, truth: float, master_seed: int,
            jobs: int = 1, monitor: Optional[RunMonitor] = None) -> Tuple[MseCurve, List[RunTrace]]:
    """
    多次运行并计算逐迭代 MSE

    Returns:
        (MseCurve, 全部运行轨迹)
    """
    if runs < 2:
        raise ConfigurationError(f"MSE needs at least 2 runs, got {runs}", key="runs")
    traces = run_many(setup, runs, master_seed, jobs, monitor)
    return reduce_mse(traces, truth, setup.n_particles), traces
