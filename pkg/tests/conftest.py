"""测试公共夹具"""

import numpy as np
import pytest

from adaoais.core.proposals import BetaFamily, GaussianFamily
from adaoais.core.targets import GaussianSpec, gaussian_target

ENV_VARS = ("ADAOAIS_OUT", "ADAOAIS_JOBS", "ADAOAIS_LOG_LEVEL", "ADAOAIS_FIXTURES")


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    """测试不受宿主环境变量影响"""
    for name in ENV_VARS:
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def rng():
    return np.random.default_rng(20230101)


@pytest.fixture
def std_normal_1d():
    """N(0, 1) 目标"""
    return gaussian_target(GaussianSpec(mean=np.array([0.0]), covariance=np.array([[1.0]])), name="normal-1d")


@pytest.fixture
def mean_only_1d():
    """单位方差、只优化均值的一维高斯提议族"""
    return GaussianFamily(1, fixed_chol=np.array([[1.0]]))


@pytest.fixture
def gaussian_2d():
    return GaussianFamily(2)


@pytest.fixture
def beta_family():
    return BetaFamily()
