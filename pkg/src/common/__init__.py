"""remaster の共通プロトコルとミックスインです。"""

from .mixins import LoggingMixin, ProgressMixin
from .protocols import LogDensity, ProgressReporter

__all__ = [
    "LogDensity",
    "ProgressReporter",
    "LoggingMixin",
    "ProgressMixin",
]
