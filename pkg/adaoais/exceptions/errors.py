"""采样与优化异常模块"""

from typing import Optional


class OAISError(Exception):
    """adaoais 基础异常类"""

    def __init__(self, message: str, original_error: Optional[Exception] = None):
        self.message = message
        self.original_error = original_error
        super().__init__(message)


class ConfigurationError(OAISError):
    """配置错误"""

    def __init__(self, message: str, key: Optional[str] = None,
                 original_error: Optional[Exception] = None):
        self.key = key
        super().__init__(message, original_error)


class DomainError(OAISError):
    """取值超出定义域错误"""
    pass


class ShapeError(OAISError):
    """参数向量维度错误"""
    pass


class DegenerateBatchError(OAISError):
    """权重全部为零的退化样本批"""
    pass


class DivergenceError(OAISError):
    """梯度或参数出现非有限值"""

    def __init__(self, message: str, reason: str = "non_finite"):
        self.reason = reason
        super().__init__(message)


class WeightOverflowError(DivergenceError):
    """对数权重溢出"""

    def __init__(self, message: str):
        super().__init__(message, reason="weight_overflow")


class AccuracyError(OAISError):
    """数值积分精度不足"""
    pass


class FixtureError(OAISError):
    """真值夹具错误"""
    pass


class FixtureNotFoundError(FixtureError):
    """真值夹具不存在"""
    pass


class FixtureExistsError(FixtureError):
    """真值夹具已存在，拒绝覆盖"""
    pass


class FixtureMismatchError(FixtureError):
    """真值夹具与实验配置不一致"""
    pass


class OracleUnavailableError(OAISError):
    """该目标/提议组合没有可用的梯度基准"""
    pass


class OutputError(OAISError):
    """结果文件写入错误"""
    pass
