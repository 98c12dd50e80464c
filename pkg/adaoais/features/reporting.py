"""
结果写出
轨迹 CSV、MSE CSV、提议演化 CSV 与摘要 JSON，全部在约简完成后由单一写者写出
"""

import json
import logging
import math
import os
from contextlib import contextmanager
from typing import Any, Dict, Iterator, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..core.proposals import ProposalFamily
from ..exceptions.errors import OutputError
from ..models.records import MseCurve, RunTrace

logger = logging.getLogger(__name__)

# 17 位有效数字保证浮点数往返无损，写出结果逐字节确定
FLOAT_FORMAT = "%.17g"


def trace_filename(run_index: int) -> str:
    return f"trace_run{run_index:03d}.csv"


@contextmanager
def output_guard(path: str) -> Iterator[None]:
    """把写出过程中的 OSError 转换为 OutputError"""
    try:
        yield
    except OSError as e:
        raise OutputError(f"failed to write '{path}': {e}", original_error=e)


def ensure_dir(path: str) -> str:
    with output_guard(path):
        os.makedirs(path, exist_ok=True)
    return path


def thinned_indices(count: int, thin: int) -> List[int]:
    """每 thin 条保留一条，并始终保留最后一条"""
    if count == 0:
        return []
    keep = list(range(0, count, thin))
    if keep[-1] != count - 1:
        keep.append(count - 1)
    return keep


def trace_frame(trace: RunTrace, family: ProposalFamily, thin: int = 1) -> pd.DataFrame:
    """
    轨迹表：iter, estimate, R_hat, grad_norm, 参数列, weight_overflow, floor_hit, status

    status 只在最后一行填写
    """
    param_names = list(family.param_columns(_any_theta(trace, family)).keys())
    columns = ["iter", "estimate", "R_hat", "grad_norm", *param_names, "weight_overflow", "floor_hit", "status"]
    rows = []
    for i in thinned_indices(len(trace.records), thin):
        record = trace.records[i]
        row = {"iter": record.k, "estimate": record.estimate, "R_hat": record.r_hat,
               "grad_norm": record.grad_norm}
        row.update(family.param_columns(record.theta))
        row.update(weight_overflow=int(record.weight_overflow), floor_hit=int(record.floor_hit), status="")
        rows.append(row)
    frame = pd.DataFrame(rows, columns=columns)
    if rows:
        frame.loc[frame.index[-1], "status"] = trace.status_label()
    return frame


def _any_theta(trace: RunTrace, family: ProposalFamily) -> np.ndarray:
    if trace.records:
        return trace.records[0].theta
    # 只用于取列名，零向量对两个提议族都合法
    return np.zeros(family.n_params)


def write_trace_csv(path: str, trace: RunTrace, family: ProposalFamily, thin: int = 1) -> str:
    frame = trace_frame(trace, family, thin)
    with output_guard(path):
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def mse_frame(curve: MseCurve) -> pd.DataFrame:
    return pd.DataFrame({
        "iter": np.arange(curve.mse.shape[0]),
        "mse": curve.mse,
        "runs_used": np.full(curve.mse.shape[0], curve.runs_used),
    })


def write_mse_csv(path: str, curve: MseCurve) -> str:
    with output_guard(path):
        mse_frame(curve).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def read_mse_csv(path: str) -> pd.DataFrame:
    """
    Raises:
        OutputError: 文件不可读或缺少列
    """
    try:
        frame = pd.read_csv(path)
    except (OSError, ValueError) as e:
        raise OutputError(f"failed to read MSE table '{path}': {e}", original_error=e)
    missing = {"iter", "mse", "runs_used"} - set(frame.columns)
    if missing:
        raise OutputError(f"MSE table '{path}' lacks columns {sorted(missing)}")
    return frame


def write_proposals_csv(path: str, snapshots: Sequence[Any]) -> str:
    frame = pd.DataFrame([{"iter": s.k, "alpha": s.alpha, "beta": s.beta, "runs_used": s.runs_used}
                          for s in snapshots], columns=["iter", "alpha", "beta", "runs_used"])
    with output_guard(path):
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    return path


def _finite_or_none(value: float) -> Optional[float]:
    return float(value) if value is not None and math.isfinite(value) else None


def run_summary(trace: RunTrace, family: ProposalFamily) -> Dict[str, Any]:
    """单次运行的摘要：最终估计、最终参数、状态与耗时"""
    final = trace.final
    return {
        "run": trace.run_index,
        "seed": trace.seed,
        "status": trace.status.value,
        "diverged_at": trace.diverged_at,
        "reason": trace.reason,
        "records": len(trace.records),
        "final_iter": final.k if final else None,
        "final_estimate": _finite_or_none(final.estimate) if final else None,
        "final_R_hat": _finite_or_none(final.r_hat) if final else None,
        "final_params": ({name: _finite_or_none(v) for name, v in family.param_columns(final.theta).items()}
                         if final else None),
        "wall_time": round(trace.wall_time, 6),
    }


def write_summary(path: str, summary: Dict[str, Any]) -> str:
    with output_guard(path):
        with open(path, "w", encoding="utf-8") as f:
            json.dump(summary, f, indent=2, sort_keys=True, default=_json_default)
            f.write("\n")
    return path


def _json_default(value: Any) -> Any:
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, tuple):
        return list(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")
