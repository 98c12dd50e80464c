"""
运行监控模块
统计运行耗时与终止状态，供摘要和日志使用
"""

import threading
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable

from ..models.records import RunTrace


@dataclass
class RunMetrics:
    """运行统计数据类"""
    run_count: int = 0
    completed: int = 0
    diverged: int = 0
    total_wall_time: float = 0.0
    max_wall_time: float = 0.0
    min_wall_time: float = 0.0
    divergence_reasons: Dict[str, int] = field(default_factory=dict)

    @property
    def avg_wall_time(self) -> float:
        return self.total_wall_time / self.run_count if self.run_count else 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {
            "runs": self.run_count,
            "completed_runs": self.completed,
            "diverged_runs": self.diverged,
            "divergence_reasons": dict(sorted(self.divergence_reasons.items())),
        }


class RunMonitor:
    """
    运行监控器
    线程安全地累计各次运行的状态与耗时
    """

    def __init__(self):
        self._lock = threading.Lock()
        self._walls = []
        self._statuses = Counter()
        self._reasons = Counter()

    def record_run(self, trace: RunTrace) -> None:
        """记录一次运行的结果"""
        with self._lock:
            self._walls.append(trace.wall_time)
            self._statuses[trace.status.value] += 1
            if not trace.completed:
                self._reasons[trace.reason or "unknown"] += 1

    def record_runs(self, traces: Iterable[RunTrace]) -> None:
        for trace in traces:
            self.record_run(trace)

    def get_metrics(self) -> RunMetrics:
        """获取运行统计"""
        with self._lock:
            return RunMetrics(
                run_count=len(self._walls),
                completed=self._statuses["completed"],
                diverged=self._statuses["diverged"],
                total_wall_time=sum(self._walls),
                max_wall_time=max(self._walls, default=0.0),
                min_wall_time=min(self._walls, default=0.0),
                divergence_reasons=dict(self._reasons),
            )

    def generate_report(self) -> str:
        """生成一行运行报告"""
        metrics = self.get_metrics()
        report = (f"{metrics.run_count} runs: {metrics.completed} completed, {metrics.diverged} diverged, "
                  f"wall time avg {metrics.avg_wall_time:.2f}s max {metrics.max_wall_time:.2f}s")
        if metrics.divergence_reasons:
            reasons = ", ".join(f"{k}={v}" for k, v in sorted(metrics.divergence_reasons.items()))
            report += f" ({reasons})"
        return report

    def reset_metrics(self) -> None:
        """重置统计"""
        with self._lock:
            self._walls.clear()
            self._statuses.clear()
            self._reasons.clear()
