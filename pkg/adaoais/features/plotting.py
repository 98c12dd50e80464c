"""
SVG 图形输出
MSE 曲线、参数轨迹与 Beta 提议演化；固定 hashsalt 且不写日期元数据，同一输入逐字节重现
"""

import logging
import math
from contextlib import contextmanager
from typing import Dict, Iterator, Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from scipy.stats import beta as beta_dist  # noqa: E402

from .reporting import output_guard, read_mse_csv  # noqa: E402
from ..core.proposals import ProposalFamily  # noqa: E402
from ..core.targets import Target, log_unnorm_density  # noqa: E402
from ..models.records import RunTrace  # noqa: E402

logger = logging.getLogger(__name__)

SVG_STYLE = {
    "svg.hashsalt": "adaoais",
    "svg.fonttype": "none",
    "font.size": 10,
    "axes.grid": True,
    "grid.alpha": 0.25,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "lines.linewidth": 1.2,
}


@contextmanager
def _figure(path: str, nrows: int = 1, ncols: int = 1, width: float = 6.4, height: float = 4.0) -> Iterator:
    with plt.rc_context(SVG_STYLE):
        fig, axes = plt.subplots(nrows, ncols, figsize=(width, height), squeeze=False)
        try:
            yield fig, axes
            fig.tight_layout()
            with output_guard(path):
                fig.savefig(path, format="svg", metadata={"Date": None})
        finally:
            plt.close(fig)
    logger.debug(f"wrote {path}")


def plot_mse(frame: pd.DataFrame, n_particles: int, path: str, title: str = "") -> str:
    """MSE 曲线，对数纵轴，1/N 参考线"""
    iters = frame["iter"].to_numpy()
    mse = frame["mse"].to_numpy(dtype=np.float64)
    # 对数坐标下非正值无法绘制
    mse = np.where(mse > 0.0, mse, np.nan)
    with _figure(path) as (_, axes):
        ax = axes[0][0]
        ax.plot(iters, mse, color="tab:blue", label="MSE")
        ax.axhline(1.0 / n_particles, color="tab:red", linestyle="--", label=f"1/N = {1.0 / n_particles:.3g}")
        ax.set_yscale("log")
        ax.set_xlabel("iteration")
        ax.set_ylabel("mean squared error")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right")
    return path


def plot_mse_csv(csv_path: str, svg_path: str, n_particles: int, title: str = "") -> str:
    """由 MSE CSV 重新生成图形"""
    return plot_mse(read_mse_csv(csv_path), n_particles, svg_path, title)


def plot_params(traces: Sequence[RunTrace], family: ProposalFamily, path: str,
                reference: Optional[Dict[str, float]] = None) -> str:
    """每个参数列一个子图，每次运行一条线；reference 给出目标参数的虚线参考值"""
    ordered = sorted(traces, key=lambda t: t.run_index)
    with_records = [t for t in ordered if t.records]
    names = list(family.param_columns(with_records[0].records[0].theta)) if with_records else []
    count = max(len(names), 1)
    ncols = min(count, 3)
    nrows = math.ceil(count / ncols)
    with _figure(path, nrows, ncols, width=3.2 * ncols, height=2.6 * nrows) as (_, axes):
        flat = axes.ravel()
        for ax, name in zip(flat, names):
            for trace in with_records:
                ks = [r.k for r in trace.records]
                values = [family.param_columns(r.theta)[name] for r in trace.records]
                ax.plot(ks, values, linewidth=0.8, alpha=0.7)
            if reference and name in reference:
                ax.axhline(reference[name], color="black", linestyle="--", linewidth=1.0)
            ax.set_title(name)
            ax.set_xlabel("iteration")
        for ax in flat[len(names):]:
            ax.set_visible(False)
    return path


def plot_proposals(snapshots: Sequence, target: Target, path: str, points: int = 400) -> str:
    """平均 (α, β) 诱导的 Beta 密度与目标密度对比"""
    x = np.linspace(0.0, 1.0, points + 2)[1:-1]
    target_density = np.exp(log_unnorm_density(target, x[:, None]) - (target.log_norm_const or 0.0))
    usable = [s for s in snapshots if s.runs_used > 0]
    colors = plt.get_cmap("viridis")(np.linspace(0.0, 0.9, max(len(usable), 1)))
    with _figure(path) as (_, axes):
        ax = axes[0][0]
        ax.plot(x, target_density, color="black", linewidth=2.0, label="target")
        for color, snapshot in zip(colors, usable):
            ax.plot(x, beta_dist.pdf(x, snapshot.alpha, snapshot.beta), color=color,
                    label=f"k = {snapshot.k}")
        ax.set_xlabel("x")
        ax.set_ylabel("density")
        ax.legend(loc="upper right", fontsize=8)
    return path
