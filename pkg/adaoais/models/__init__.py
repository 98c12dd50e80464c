"""
数据模型模块
运行轨迹、迭代记录与 MSE 曲线
"""

from .records import RunStatus, TraceRecord, RunTrace, MseCurve

__all__ = ['RunStatus', 'TraceRecord', 'RunTrace', 'MseCurve']
