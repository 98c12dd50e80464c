"""
接口模块初始化文件
导出内部公共API接口与命令行入口
"""

from .internal_api import (
    OAISInternalAPI,
    get_internal_api,
    init_internal_api
)

__all__ = [
    'OAISInternalAPI',
    'get_internal_api',
    'init_internal_api'
]
