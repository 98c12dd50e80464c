"""
adaoais - 自适应优化器驱动的优化重要性采样
以 SGD/Adam/AdaGrad 最小化 χ² 型目标 R(θ) 来自适应提议分布，并报告自归一化重要性采样估计
"""

from dotenv import find_dotenv, load_dotenv

# 加载工作目录中的 .env（如存在）
load_dotenv(find_dotenv(usecwd=True))

from .config.settings import ExperimentConfig, config_manager, parse_config  # noqa: E402
from .exceptions.errors import OAISError  # noqa: E402
from .features.oais import run_mse, run_oais  # noqa: E402
from .interfaces.internal_api import OAISInternalAPI, get_internal_api, init_internal_api  # noqa: E402

__version__ = "0.1.0"

__all__ = [
    'ExperimentConfig',
    'config_manager',
    'parse_config',
    'OAISError',
    'run_oais',
    'run_mse',
    'OAISInternalAPI',
    'get_internal_api',
    'init_internal_api',
    '__version__',
]
