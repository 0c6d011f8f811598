"""
Serial and asynchronous parameter-server training loops.
"""

from .config import TrainConfig, TrainMode
from .history import HISTORY_COLUMNS, History, UpdateRecord
from .server import ParameterServer, StalenessGate, TargetSnapshot, build_tree
from .sweep import SUMMARY_COLUMNS, SweepAxis, SweepCell, run_sweep, slowdown, summary_frame, write_summary
from .trainer import train_async, train_serial

__all__ = [
    "HISTORY_COLUMNS",
    "History",
    "ParameterServer",
    "SUMMARY_COLUMNS",
    "StalenessGate",
    "SweepAxis",
    "SweepCell",
    "TargetSnapshot",
    "TrainConfig",
    "TrainMode",
    "UpdateRecord",
    "build_tree",
    "run_sweep",
    "slowdown",
    "summary_frame",
    "train_async",
    "train_serial",
]
