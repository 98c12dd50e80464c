"""
真值夹具
在运行任何实验之前由独立基准计算并冻结三个实验的真值，实验只读取夹具而不在线重算真值
"""

import json
import logging
import math
import os
from dataclasses import asdict, dataclass
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
from scipy.special import ndtr

from .oracle import logitnormal_interval_prob, refine_rect_prob
from ..core.targets import GaussianSpec, LogitNormalSpec, MixtureSpec, make_experiment_target
from ..exceptions.errors import (
    AccuracyError,
    FixtureError,
    FixtureExistsError,
    FixtureMismatchError,
    FixtureNotFoundError,
    OutputError,
)

logger = logging.getLogger(__name__)

# 两个独立基准之间允许的最大差异
CROSS_CHECK_TOL = 1e-8

# 实验名 → (目标预设, 测试函数矩形)
FIXTURE_EXPERIMENTS: Dict[str, Tuple[str, Tuple[Tuple[float, ...], Tuple[float, ...]]]] = {
    "exp1": ("gaussian", ((-1.0, -1.0), (1.0, 1.0))),
    "exp2": ("mixture", ((-1.0, -1.0), (1.0, 1.0))),
    "exp3": ("logitnormal", ((0.25,), (0.75,))),
}

TARGET_FIXTURE_KEYS = {target: name for name, (target, _) in FIXTURE_EXPERIMENTS.items()}


@dataclass(frozen=True)
class FixtureEntry:
    """冻结的真值"""
    truth: float
    generator: str
    nodes: int
    rect: Tuple[Tuple[float, ...], Tuple[float, ...]]

    def to_dict(self) -> dict:
        data = asdict(self)
        data["rect"] = [list(self.rect[0]), list(self.rect[1])]
        return data

    @classmethod
    def from_dict(cls, name: str, data: dict) -> 'FixtureEntry':
        try:
            lower, upper = data["rect"]
            return cls(truth=float(data["truth"]), generator=str(data["generator"]),
                       nodes=int(data["nodes"]),
                       rect=(tuple(float(v) for v in lower), tuple(float(v) for v in upper)))
        except (KeyError, TypeError, ValueError) as e:
            raise FixtureError(f"fixture entry '{name}' is malformed: {e}", original_error=e)


def mixture_rect_product(spec: MixtureSpec, rect: Tuple[Sequence[float], Sequence[float]]) -> float:
    """
    对角协方差高斯混合的矩形概率：各分量按坐标轴分解为一维正态概率之积

    Raises:
        AccuracyError: 存在非对角协方差分量
    """
    lower, upper = rect
    total = 0.0
    for weight, component in spec.components:
        cov = component.covariance
        if np.count_nonzero(cov - np.diag(np.diag(cov))):
            raise AccuracyError("product formula needs axis-aligned mixture components")
        prob = weight
        for mean, var, lo, hi in zip(component.mean, cov.diagonal(), lower, upper):
            std = math.sqrt(var)
            prob *= float(ndtr((hi - mean) / std) - ndtr((lo - mean) / std))
        total += prob
    return total


def compute_truth(name: str) -> FixtureEntry:
    """
    计算单个实验的真值

    Raises:
        FixtureNotFoundError: 未知实验名
        AccuracyError: 求积不收敛或两个独立基准不一致
    """
    if name not in FIXTURE_EXPERIMENTS:
        raise FixtureNotFoundError(f"no ground truth generator for '{name}'")
    target_name, rect = FIXTURE_EXPERIMENTS[name]
    target = make_experiment_target(target_name)
    spec = target.spec

    if isinstance(spec, GaussianSpec):
        truth, nodes = refine_rect_prob(target, rect)
        return FixtureEntry(truth, "quadrature", nodes, rect)

    if isinstance(spec, MixtureSpec):
        truth, nodes = refine_rect_prob(target, rect)
        product = mixture_rect_product(spec, rect)
        if abs(truth - product) >= CROSS_CHECK_TOL:
            raise AccuracyError(f"{name}: quadrature {truth!r} disagrees with product formula {product!r}")
        return FixtureEntry(truth, "quadrature+product", nodes, rect)

    if isinstance(spec, LogitNormalSpec):
        (a,), (b,) = rect
        truth = logitnormal_interval_prob(a, b, spec.loc, spec.scale)
        quadrature, nodes = refine_rect_prob(target, rect)
        if abs(truth - quadrature) >= CROSS_CHECK_TOL:
            raise AccuracyError(f"{name}: analytic {truth!r} disagrees with quadrature {quadrature!r}")
        return FixtureEntry(truth, "analytic", nodes, rect)

    raise FixtureNotFoundError(f"no ground truth generator for target '{target_name}'")


def compute_truths(names: Optional[Sequence[str]] = None) -> Dict[str, FixtureEntry]:
    """计算全部（或指定）实验的真值"""
    truths = {}
    for name in names or sorted(FIXTURE_EXPERIMENTS):
        entry = compute_truth(name)
        logger.info(f"froze {name} truth {entry.truth:.10g} ({entry.generator}, {entry.nodes} nodes)")
        truths[name] = entry
    return truths


def check_fixture_target(path: str, force: bool = False) -> None:
    """
    Raises:
        FixtureExistsError: 文件已存在且未指定 force
    """
    if os.path.exists(path) and not force:
        raise FixtureExistsError(f"fixture file '{path}' already exists, pass --force to overwrite")


def write_fixtures(path: str, truths: Dict[str, FixtureEntry], force: bool = False) -> None:
    """
    写出夹具文件

    Raises:
        FixtureExistsError: 文件已存在且未指定 force
        OutputError: 写入失败
    """
    check_fixture_target(path, force)
    document = {name: entry.to_dict() for name, entry in sorted(truths.items())}
    try:
        directory = os.path.dirname(path)
        if directory:
            os.makedirs(directory, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write("\n")
    except OSError as e:
        raise OutputError(f"failed to write fixture file '{path}': {e}", original_error=e)


def load_fixtures(path: str) -> Dict[str, FixtureEntry]:
    """
    读取夹具文件

    Raises:
        FixtureNotFoundError: 文件不存在
        FixtureError: 文件内容非法
    """
    if not os.path.exists(path):
        raise FixtureNotFoundError(
            f"fixture file '{path}' not found, run 'adaoais fixtures' to generate the ground truths")
    try:
        with open(path, encoding="utf-8") as f:
            document = json.load(f)
    except (OSError, ValueError) as e:
        raise FixtureError(f"failed to read fixture file '{path}': {e}", original_error=e)
    if not isinstance(document, dict):
        raise FixtureError(f"fixture file '{path}' must contain a JSON object")
    return {name: FixtureEntry.from_dict(name, data) for name, data in document.items()}


def lookup_truth(fixtures: Dict[str, FixtureEntry], target_name: str,
                 rect: Tuple[Sequence[float], Sequence[float]]) -> FixtureEntry:
    """
    按目标预设查找真值，并确认夹具的矩形与实验一致

    Raises:
        FixtureNotFoundError: 夹具中没有该实验
        FixtureMismatchError: 夹具矩形与实验测试函数不一致
    """
    name = TARGET_FIXTURE_KEYS.get(target_name, target_name)
    entry = fixtures.get(name)
    if entry is None:
        raise FixtureNotFoundError(
            f"no fixture for '{name}', run 'adaoais fixtures' to generate the ground truths")
    lower, upper = rect
    same = (len(lower) == len(entry.rect[0]) and len(upper) == len(entry.rect[1])
            and all(math.isclose(a, b, rel_tol=0.0, abs_tol=1e-12)
                    for a, b in zip((*lower, *upper), (*entry.rect[0], *entry.rect[1]))))
    if not same:
        raise FixtureMismatchError(
            f"fixture '{name}' was frozen for rect {entry.rect}, experiment uses {tuple(map(tuple, rect))}")
    return entry
