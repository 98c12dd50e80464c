"""
工具函数模块
包含配置验证与随机种子派生等辅助方法
"""

from .schema_validator import SchemaValidator, ValueType, get_schema_validator
from .seeding import derive_seed, derive_rng, child_seed

__all__ = [
    'SchemaValidator',
    'ValueType',
    'get_schema_validator',
    'derive_seed',
    'derive_rng',
    'child_seed',
]
