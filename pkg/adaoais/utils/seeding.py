"""
随机种子派生
子流由 SeedSequence(master_seed, spawn_key=(run_index, ...)) 确定，新增运行不会扰动已有运行
"""

import numpy as np


def derive_seed(master_seed: int, *keys: int) -> np.random.SeedSequence:
    """按 (master_seed, keys...) 派生子种子序列"""
    return np.random.SeedSequence(int(master_seed), spawn_key=tuple(int(k) for k in keys))


def derive_rng(master_seed: int, *keys: int) -> np.random.Generator:
    """按 (master_seed, keys...) 派生独立的 PCG64 随机流"""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, *keys)))


def child_seed(master_seed: int, run_index: int) -> int:
    """第 run_index 次运行的整数子种子，用于摘要报告"""
    return int(derive_seed(master_seed, run_index).generate_state(1, np.uint64)[0])
