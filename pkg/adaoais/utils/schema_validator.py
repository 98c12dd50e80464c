"""键值模式验证器，环境变量与实验配置文件共用同一套模式定义"""

import os
from enum import Enum
from typing import Dict, Any, Mapping, Optional

from ..exceptions.errors import ConfigurationError


class ValueType(Enum):
    """取值类型枚举"""
    STRING = "string"
    INTEGER = "integer"
    FLOAT = "float"
    BOOLEAN = "boolean"
    VECTOR = "vector"
    MATRIX = "matrix"


class SchemaValidator:
    """基于模式字典的键值验证器"""

    def validate_env_vars(self, scope: str, env_schema: Dict[str, dict]) -> Dict[str, Any]:
        """
        验证环境变量

        Args:
            scope: 作用域名称，仅用于错误信息
            env_schema: 环境变量模式定义

        Returns:
            验证后的环境变量字典
        """
        raw = {name: os.getenv(name) for name in env_schema}
        raw = {name: value for name, value in raw.items() if value is not None}
        return self.validate_section(scope, raw, env_schema)

    def validate_section(self, section: str, raw: Mapping[str, Any],
                         schema: Dict[str, dict],
                         base: Optional[Mapping[str, Any]] = None) -> Dict[str, Any]:
        """
        验证一个配置段

        Args:
            section: 配置段名称
            raw: 原始键值
            schema: 模式定义
            base: 预设提供的取值，优先级低于 raw

        Returns:
            验证后的键值字典，未设置且无默认值的可选键不出现

        Raises:
            ConfigurationError: 未知键、缺少必需键或取值非法
        """
        for key in raw:
            if key not in schema:
                raise ConfigurationError(f"[{section}] unknown key '{key}'", key=key)

        validated: Dict[str, Any] = {}
        for key, spec in schema.items():
            if key in raw:
                value = raw[key]
            elif base is not None and key in base:
                validated[key] = base[key]
                continue
            elif 'default' in spec:
                value = spec['default']
            else:
                value = None

            if value is None:
                if spec.get('required', False):
                    raise ConfigurationError(f"[{section}] missing required key '{key}'", key=key)
                continue

            try:
                validated[key] = self._coerce(value, spec)
            except ValueError as e:
                raise ConfigurationError(f"[{section}] invalid value for '{key}': {e}", key=key) from e

        return validated

    def _coerce(self, value: Any, spec: dict) -> Any:
        value_type = spec.get('type', ValueType.STRING)
        if value_type == ValueType.STRING:
            return self._validate_string(value, spec)
        if value_type == ValueType.INTEGER:
            return self._validate_integer(value, spec)
        if value_type == ValueType.FLOAT:
            return self._validate_float(value, spec)
        if value_type == ValueType.BOOLEAN:
            return self._validate_boolean(value, spec)
        if value_type == ValueType.VECTOR:
            return self._validate_vector(value, spec)
        if value_type == ValueType.MATRIX:
            return self._validate_matrix(value, spec)
        return value

    def _validate_string(self, value: Any, config: dict) -> str:
        """验证字符串类型"""
        if not isinstance(value, str):
            raise ValueError(f"expected string, got {type(value).__name__}")
        value = value.strip()
        if 'enum' in config and value not in config['enum']:
            raise ValueError(f"'{value}' not in {config['enum']}")
        return value

    def _check_range(self, number: float, config: dict) -> None:
        min_val = config.get('min')
        max_val = config.get('max')
        if min_val is not None and number < min_val:
            raise ValueError(f"must be >= {min_val}")
        if max_val is not None and number > max_val:
            raise ValueError(f"must be <= {max_val}")
        # 开区间下界
        if config.get('positive') and not number > 0:
            raise ValueError("must be > 0")

    def _validate_integer(self, value: Any, config: dict) -> int:
        """验证整数类型"""
        if isinstance(value, bool):
            raise ValueError(f"cannot convert to integer: '{value}'")
        if isinstance(value, int):
            int_value = value
        else:
            try:
                int_value = int(str(value).strip())
            except ValueError:
                raise ValueError(f"cannot convert to integer: '{value}'")
        self._check_range(int_value, config)
        return int_value

    def _validate_float(self, value: Any, config: dict) -> float:
        """验证浮点数类型"""
        try:
            float_value = float(str(value).strip()) if isinstance(value, str) else float(value)
        except (TypeError, ValueError):
            raise ValueError(f"cannot convert to float: '{value}'")
        if float_value != float_value or float_value in (float('inf'), float('-inf')):
            raise ValueError("must be finite")
        self._check_range(float_value, config)
        return float_value

    def _validate_boolean(self, value: Any, config: dict) -> bool:
        """验证布尔类型"""
        if isinstance(value, bool):
            return value
        value_lower = str(value).strip().lower()
        if value_lower in ('true', '1', 'yes', 'on'):
            return True
        elif value_lower in ('false', '0', 'no', 'off'):
            return False
        raise ValueError(f"cannot convert to boolean: '{value}'")

    def _validate_vector(self, value: Any, config: dict) -> tuple:
        """验证向量类型，文本形式为逗号分隔"""
        if isinstance(value, str):
            items = [item for item in value.replace(' ', '').split(',') if item]
        else:
            items = list(value)
        vector = tuple(self._validate_float(item, {}) for item in items)
        if not vector:
            raise ValueError("empty vector")
        length = config.get('length')
        if length is not None and len(vector) != length:
            raise ValueError(f"expected {length} entries, got {len(vector)}")
        return vector

    def _validate_matrix(self, value: Any, config: dict) -> tuple:
        """验证矩阵类型，文本形式为分号分隔行、逗号分隔列"""
        if isinstance(value, str):
            rows = [row for row in value.split(';') if row.strip()]
        else:
            rows = list(value)
        matrix = tuple(self._validate_vector(row, {}) for row in rows)
        if not matrix or any(len(row) != len(matrix) for row in matrix):
            raise ValueError("matrix must be square")
        return matrix


# 全局验证器实例
_schema_validator = SchemaValidator()


def get_schema_validator() -> SchemaValidator:
    """获取验证器实例"""
    return _schema_validator
