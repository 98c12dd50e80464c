"""配置模块初始化文件"""

from .settings import (
    ExperimentConfig,
    ProposalConfig,
    PhiConfig,
    OptimizerConfig,
    RuntimeSettings,
    ConfigManager,
    config_manager,
    parse_config,
    validate_config,
)
from .presets import PRESETS

__all__ = [
    'ExperimentConfig',
    'ProposalConfig',
    'PhiConfig',
    'OptimizerConfig',
    'RuntimeSettings',
    'ConfigManager',
    'config_manager',
    'parse_config',
    'validate_config',
    'PRESETS',
]
