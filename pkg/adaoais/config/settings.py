"""实验配置设置模块"""

import configparser
import logging
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .presets import PRESETS, DEFAULT_MASTER_SEED
from ..core.proposals import PROPOSAL_FAMILIES
from ..core.targets import EXPERIMENT_TARGETS, make_experiment_target
from ..exceptions.errors import ConfigurationError
from ..services.optimizers import OPTIMIZER_NAMES, OptimizerSpec, Schedule, ScheduleKind
from ..utils.schema_validator import ValueType, get_schema_validator

logger = logging.getLogger(__name__)

U64_MAX = 2 ** 64 - 1


@dataclass(frozen=True)
class ProposalConfig:
    """提议族与初始参数 θ₀（约束形式）"""
    family: str
    mean: Optional[Tuple[float, ...]] = None
    covariance: Optional[Tuple[Tuple[float, ...], ...]] = None
    alpha: Optional[float] = None
    beta: Optional[float] = None


@dataclass(frozen=True)
class PhiConfig:
    """测试函数：超矩形示性函数的边界"""
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]


@dataclass(frozen=True)
class OptimizerConfig:
    """优化器配置"""
    name: str
    rate: float
    schedule: str = "constant"
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def to_spec(self) -> OptimizerSpec:
        return OptimizerSpec(name=self.name,
                             schedule=Schedule(ScheduleKind(self.schedule), self.rate),
                             beta1=self.beta1, beta2=self.beta2, eps=self.eps)


@dataclass(frozen=True)
class ExperimentConfig:
    """实验配置数据类"""
    name: str
    target: str
    proposal: ProposalConfig
    phi: PhiConfig
    optimizer: OptimizerConfig
    n_particles: int
    iterations: int
    runs: int = 1
    master_seed: int = DEFAULT_MASTER_SEED
    output: Optional[str] = None
    thin: int = 1

    def with_overrides(self, **changes: Any) -> 'ExperimentConfig':
        """覆盖部分字段并重新校验"""
        changes = {key: value for key, value in changes.items() if value is not None}
        updated = replace(self, **changes)
        validate_config(updated)
        return updated


@dataclass(frozen=True)
class RuntimeSettings:
    """运行时设置，来自环境变量"""
    out_dir: str
    jobs: int
    log_level: str
    fixtures_path: str


SECTION_SCHEMAS: Dict[str, Dict[str, dict]] = {
    "experiment": {
        "preset": {"type": ValueType.STRING, "enum": sorted(PRESETS), "description": "作为基础的预设名称"},
        "name": {"type": ValueType.STRING, "description": "实验名称"},
        "target": {"type": ValueType.STRING, "required": True, "enum": sorted(EXPERIMENT_TARGETS),
                   "description": "目标分布预设"},
        "n_particles": {"type": ValueType.INTEGER, "required": True, "min": 1, "description": "粒子数 N"},
        "iterations": {"type": ValueType.INTEGER, "required": True, "min": 0, "description": "迭代次数 T"},
        "runs": {"type": ValueType.INTEGER, "default": 1, "min": 1, "description": "独立运行次数"},
        "master_seed": {"type": ValueType.INTEGER, "default": DEFAULT_MASTER_SEED, "min": 0, "max": U64_MAX,
                        "description": "主随机种子"},
        "output": {"type": ValueType.STRING, "description": "输出目录"},
        "thin": {"type": ValueType.INTEGER, "default": 1, "min": 1, "description": "轨迹写出间隔"},
    },
    "proposal": {
        "family": {"type": ValueType.STRING, "required": True, "enum": list(PROPOSAL_FAMILIES),
                   "description": "提议分布族"},
        "mean": {"type": ValueType.VECTOR, "description": "高斯初始均值 μ₀"},
        "covariance": {"type": ValueType.MATRIX, "description": "高斯初始协方差 Σ₀"},
        "alpha": {"type": ValueType.FLOAT, "positive": True, "description": "Beta 初始 α"},
        "beta": {"type": ValueType.FLOAT, "positive": True, "description": "Beta 初始 β"},
    },
    "phi": {
        "lower": {"type": ValueType.VECTOR, "required": True, "description": "矩形下界"},
        "upper": {"type": ValueType.VECTOR, "required": True, "description": "矩形上界"},
    },
    "optimizer": {
        "name": {"type": ValueType.STRING, "required": True, "enum": list(OPTIMIZER_NAMES),
                 "description": "优化器"},
        "rate": {"type": ValueType.FLOAT, "required": True, "positive": True, "description": "学习率基数"},
        "schedule": {"type": ValueType.STRING, "default": "constant",
                     "enum": [kind.value for kind in ScheduleKind], "description": "步长策略"},
        "beta1": {"type": ValueType.FLOAT, "default": 0.9, "min": 0.0, "max": 1.0, "description": "Adam β₁"},
        "beta2": {"type": ValueType.FLOAT, "default": 0.999, "min": 0.0, "max": 1.0, "description": "Adam β₂"},
        "eps": {"type": ValueType.FLOAT, "default": 1e-8, "positive": True, "description": "数值稳定项 ε"},
    },
}


def validate_config(config: ExperimentConfig) -> None:
    """
    校验配置不变量

    Raises:
        ConfigurationError: 任一不变量不成立，错误信息指明对应键
    """
    if config.n_particles < 1:
        raise ConfigurationError("n_particles must be >= 1", key="n_particles")
    if config.iterations < 0:
        raise ConfigurationError("iterations must be >= 0", key="iterations")
    if config.runs < 1:
        raise ConfigurationError("runs must be >= 1", key="runs")
    if config.thin < 1:
        raise ConfigurationError("thin must be >= 1", key="thin")
    if not 0 <= config.master_seed <= U64_MAX:
        raise ConfigurationError("master_seed must be an unsigned 64-bit integer", key="master_seed")

    dim = make_experiment_target(config.target).dim
    proposal = config.proposal
    if proposal.family == "gaussian":
        if proposal.mean is None or proposal.covariance is None:
            raise ConfigurationError("gaussian proposal needs mean and covariance", key="mean")
        if len(proposal.mean) != dim:
            raise ConfigurationError(f"mean must have {dim} entries", key="mean")
        cov = np.asarray(proposal.covariance, dtype=np.float64)
        if cov.shape != (dim, dim):
            raise ConfigurationError(f"covariance must be {dim}x{dim}", key="covariance")
        if not np.allclose(cov, cov.T, rtol=0.0, atol=1e-12):
            raise ConfigurationError("covariance must be symmetric", key="covariance")
        if np.any(np.linalg.eigvalsh(cov) <= 0.0):
            raise ConfigurationError("covariance must be positive definite", key="covariance")
    elif proposal.family == "beta":
        if dim != 1:
            raise ConfigurationError(f"beta proposal needs a 1-D target, '{config.target}' has dim {dim}",
                                     key="family")
        if proposal.alpha is None or proposal.beta is None:
            raise ConfigurationError("beta proposal needs alpha and beta", key="alpha")
    else:
        raise ConfigurationError(f"unknown proposal family '{proposal.family}'", key="family")

    if len(config.phi.lower) != dim or len(config.phi.upper) != dim:
        raise ConfigurationError(f"phi bounds must have {dim} entries", key="lower")
    if any(lo >= hi for lo, hi in zip(config.phi.lower, config.phi.upper)):
        raise ConfigurationError("phi lower bounds must be below upper bounds", key="lower")

    # 构造 OptimizerSpec 即校验优化器不变量
    config.optimizer.to_spec()


class ConfigManager:
    """实验配置管理器"""

    def __init__(self):
        self.validator = get_schema_validator()
        self._runtime: Optional[RuntimeSettings] = None

    def get_env_schema(self) -> Dict[str, Any]:
        """获取环境变量验证模式"""
        return {
            "ADAOAIS_OUT": {
                "type": ValueType.STRING,
                "default": "results",
                "description": "默认输出目录"
            },
            "ADAOAIS_JOBS": {
                "type": ValueType.INTEGER,
                "default": 1,
                "min": 1,
                "max": 256,
                "description": "并行运行的线程数"
            },
            "ADAOAIS_LOG_LEVEL": {
                "type": ValueType.STRING,
                "default": "INFO",
                "enum": ["DEBUG", "INFO", "WARNING", "ERROR"],
                "description": "日志级别"
            },
            "ADAOAIS_FIXTURES": {
                "type": ValueType.STRING,
                "default": "fixtures/truths.json",
                "description": "真值夹具文件路径"
            },
        }

    def load_runtime_settings(self) -> RuntimeSettings:
        """从环境变量加载运行时设置"""
        env_vars = self.validator.validate_env_vars("adaoais", self.get_env_schema())
        return RuntimeSettings(
            out_dir=env_vars["ADAOAIS_OUT"],
            jobs=env_vars["ADAOAIS_JOBS"],
            log_level=env_vars["ADAOAIS_LOG_LEVEL"],
            fixtures_path=env_vars["ADAOAIS_FIXTURES"],
        )

    def get_runtime_settings(self) -> RuntimeSettings:
        """获取运行时设置（首次调用时加载）"""
        if self._runtime is None:
            self._runtime = self.load_runtime_settings()
        return self._runtime

    def list_presets(self) -> List[str]:
        return sorted(PRESETS)

    def get_preset(self, name: str) -> ExperimentConfig:
        """
        获取预设配置

        Raises:
            ConfigurationError: 未知预设
        """
        if name not in PRESETS:
            raise ConfigurationError(f"unknown preset '{name}'", key="preset")
        return self._build(self._validate_sections(PRESETS[name]))

    def parse_config(self, text: str) -> ExperimentConfig:
        """
        解析实验配置文档

        Args:
            text: INI 风格文档，段为 [experiment] [proposal] [phi] [optimizer]

        Returns:
            应用默认值并校验后的 ExperimentConfig

        Raises:
            ConfigurationError: 语法错误、未知段或键、缺少必需键、取值非法
        """
        parser = configparser.ConfigParser(interpolation=None, default_section="__defaults__")
        parser.optionxform = str
        try:
            parser.read_string(text)
        except configparser.Error as e:
            raise ConfigurationError(f"malformed configuration document: {e}", original_error=e)

        raw = {section: dict(parser.items(section)) for section in parser.sections()}
        for section in raw:
            if section not in SECTION_SCHEMAS:
                raise ConfigurationError(f"unknown section [{section}]", key=section)

        base: Dict[str, Dict[str, Any]] = {}
        preset = raw.get("experiment", {}).get("preset")
        if preset is not None:
            preset = preset.strip()
            if preset not in PRESETS:
                raise ConfigurationError(f"unknown preset '{preset}'", key="preset")
            base = self._validate_sections(PRESETS[preset])
            # 更换提议族时预设中的初值不再适用
            family = raw.get("proposal", {}).get("family")
            if family is not None and family.strip() != base["proposal"]["family"]:
                base.pop("proposal")

        return self._build(self._validate_sections(raw, base))

    def _validate_sections(self, raw: Dict[str, Dict[str, Any]],
                           base: Optional[Dict[str, Dict[str, Any]]] = None) -> Dict[str, Dict[str, Any]]:
        base = base or {}
        return {
            section: self.validator.validate_section(section, raw.get(section, {}), schema,
                                                     base=base.get(section))
            for section, schema in SECTION_SCHEMAS.items()
        }

    def _build(self, sections: Dict[str, Dict[str, Any]]) -> ExperimentConfig:
        experiment = sections["experiment"]
        config = ExperimentConfig(
            name=experiment.get("name") or experiment.get("preset") or "custom",
            target=experiment["target"],
            proposal=ProposalConfig(**sections["proposal"]),
            phi=PhiConfig(**sections["phi"]),
            optimizer=OptimizerConfig(**sections["optimizer"]),
            n_particles=experiment["n_particles"],
            iterations=experiment["iterations"],
            runs=experiment["runs"],
            master_seed=experiment["master_seed"],
            output=experiment.get("output"),
            thin=experiment["thin"],
        )
        validate_config(config)
        return config


# 全局配置管理器实例
config_manager = ConfigManager()


def parse_config(text: str) -> ExperimentConfig:
    """解析实验配置文档"""
    return config_manager.parse_config(text)
