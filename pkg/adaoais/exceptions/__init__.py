"""异常模块初始化文件"""

from .errors import (
    OAISError,
    ConfigurationError,
    DomainError,
    ShapeError,
    DegenerateBatchError,
    DivergenceError,
    WeightOverflowError,
    AccuracyError,
    FixtureError,
    FixtureNotFoundError,
    FixtureExistsError,
    FixtureMismatchError,
    OracleUnavailableError,
    OutputError,
)

__all__ = [
    'OAISError',
    'ConfigurationError',
    'DomainError',
    'ShapeError',
    'DegenerateBatchError',
    'DivergenceError',
    'WeightOverflowError',
    'AccuracyError',
    'FixtureError',
    'FixtureNotFoundError',
    'FixtureExistsError',
    'FixtureMismatchError',
    'OracleUnavailableError',
    'OutputError',
]
