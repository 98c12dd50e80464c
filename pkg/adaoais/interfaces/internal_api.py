"""
内部公共API接口模块
提供实验运行、MSE 扫描、真值夹具与梯度检验的异步接口，阻塞计算通过 asyncio.to_thread 卸载
"""

import asyncio
import logging
from typing import Dict, List, Optional, Sequence, Tuple

from ..config.settings import ConfigManager, ExperimentConfig, RuntimeSettings
from ..exceptions.errors import ConfigurationError, OAISError
from ..features.diagnostics import (
    GradcheckReport,
    ProposalSnapshot,
    average_beta_proposals,
    gradcheck,
    log_spaced_iterations,
    make_gradcheck_case,
)
from ..features.experiment import ExperimentSetup
from ..features.fixtures import FixtureEntry, check_fixture_target, compute_truths, load_fixtures, lookup_truth, write_fixtures
from ..features.monitor import RunMonitor
from ..features.oais import run_many, run_mse
from ..models.records import MseCurve, RunTrace

logger = logging.getLogger(__name__)


class OAISInternalAPI:
    """
    OAIS 内部公共API接口
    统一封装实验配置、运行与真值基准
    """

    def __init__(self):
        self._config_manager: Optional[ConfigManager] = None
        self._monitor = RunMonitor()

    def initialize(self, config_manager: Optional[ConfigManager] = None) -> None:
        """
        初始化API接口

        Args:
            config_manager: 配置管理器实例，如果为None则使用全局实例
        """
        if config_manager is None:
            from ..config.settings import config_manager as global_manager
            config_manager = global_manager
        self._config_manager = config_manager

    @property
    def config_manager(self) -> ConfigManager:
        if self._config_manager is None:
            raise OAISError("internal API is not initialized")
        return self._config_manager

    @property
    def monitor(self) -> RunMonitor:
        return self._monitor

    # ========== 配置 ==========

    def settings(self) -> RuntimeSettings:
        return self.config_manager.get_runtime_settings()

    def load_config(self, text: Optional[str] = None, preset: Optional[str] = None) -> ExperimentConfig:
        """
        由配置文档或预设名加载配置，两者同时给出时文档优先

        Raises:
            ConfigurationError: 两者都未给出或配置非法
        """
        if text is not None:
            return self.config_manager.parse_config(text)
        if preset is not None:
            return self.config_manager.get_preset(preset)
        raise ConfigurationError("either a configuration document or a preset is required", key="preset")

    # ========== 运行 ==========

    async def run_experiment(self, config: ExperimentConfig, jobs: int = 1) -> Tuple[ExperimentSetup, List[RunTrace]]:
        """执行配置中的全部运行"""
        setup = ExperimentSetup.from_config(config)
        traces = await asyncio.to_thread(run_many, setup, config.runs, config.master_seed, jobs, self._monitor)
        logger.info(self._monitor.generate_report())
        return setup, traces

    async def mse_sweep(self, config: ExperimentConfig, fixtures_path: str,
                        jobs: int = 1) -> Tuple[ExperimentSetup, FixtureEntry, MseCurve, List[RunTrace]]:
        """
        读取夹具真值后执行多次运行并计算 MSE

        Raises:
            FixtureNotFoundError: 夹具缺失，应先运行 fixtures 命令
            FixtureMismatchError: 夹具矩形与实验不一致
        """
        setup = ExperimentSetup.from_config(config)
        entry = lookup_truth(load_fixtures(fixtures_path), config.target, setup.rect)
        curve, traces = await asyncio.to_thread(run_mse, setup, config.runs, entry.truth,
                                                config.master_seed, jobs, self._monitor)
        logger.info(self._monitor.generate_report())
        return setup, entry, curve, traces

    async def proposal_evolution(self, config: ExperimentConfig, jobs: int = 1,
                                 points: int = 8) -> Tuple[ExperimentSetup, List[ProposalSnapshot]]:
        """Beta 提议在对数间隔迭代处的跨运行平均"""
        if config.proposal.family != "beta":
            raise ConfigurationError("proposal evolution needs the beta proposal family", key="family")
        setup, traces = await self.run_experiment(config, jobs)
        iterations = log_spaced_iterations(config.iterations, points)
        return setup, average_beta_proposals(traces, setup.family, iterations)

    # ========== 真值基准 ==========

    async def freeze_fixtures(self, path: str, force: bool = False,
                              names: Optional[Sequence[str]] = None) -> Dict[str, FixtureEntry]:
        """计算并冻结真值夹具"""
        check_fixture_target(path, force)
        truths = await asyncio.to_thread(compute_truths, names)
        write_fixtures(path, truths, force=force)
        logger.info(f"wrote {len(truths)} fixtures to {path}")
        return truths

    async def gradcheck(self, case: str, n_samples: int, seed: int) -> GradcheckReport:
        """梯度无偏性检验"""
        return await asyncio.to_thread(gradcheck, make_gradcheck_case(case), n_samples, seed)


# 全局API实例
_internal_api: Optional[OAISInternalAPI] = None


def get_internal_api() -> OAISInternalAPI:
    """获取全局内部API实例"""
    global _internal_api
    if _internal_api is None:
        raise OAISError("internal API is not initialized")
    return _internal_api


def init_internal_api(config_manager: Optional[ConfigManager] = None) -> OAISInternalAPI:
    """初始化全局内部API实例"""
    global _internal_api
    _internal_api = OAISInternalAPI()
    _internal_api.initialize(config_manager)
    return _internal_api
