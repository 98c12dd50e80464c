"""
特殊函数
digamma 采用递推 ψ(x) = ψ(x+1) − 1/x 把自变量推到 x ≥ 6，再用渐近级数求值
"""

from typing import Union

import numpy as np
import numpy.typing as npt

from ..exceptions.errors import DomainError

ArrayLike = Union[float, npt.ArrayLike]

_ASYMPTOTIC_SHIFT = 6.0

# 渐近级数 Σ B_2n / (2n x^2n) 的系数
_ASYMPTOTIC_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
)


def digamma(x: ArrayLike) -> Union[float, np.ndarray]:
    """
    digamma 函数 ψ(x) = d ln Γ(x) / dx

    Args:
        x: 正实数或正实数数组

    Returns:
        与输入同形状的 ψ(x)，标量输入返回 float

    Raises:
        DomainError: 存在 x ≤ 0 或非有限值
    """
    values = np.array(x, dtype=np.float64, copy=True)
    if not np.all(np.isfinite(values)) or np.any(values <= 0.0):
        raise DomainError(f"digamma requires finite x > 0, got {x}")

    result = np.zeros_like(values)
    small = values < _ASYMPTOTIC_SHIFT
    while np.any(small):
        result[small] -= 1.0 / values[small]
        values[small] += 1.0
        small = values < _ASYMPTOTIC_SHIFT

    inv_sq = 1.0 / (values * values)
    series = np.zeros_like(values)
    for coeff in reversed(_ASYMPTOTIC_COEFFS):
        series = (series + coeff) * inv_sq
    result += np.log(values) - 0.5 / values - series

    if result.ndim == 0:
        return float(result)
    return result
