"""精度指標の要約の型を定義するモジュールです。"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

from ..exceptions import MetricsError

METRIC_KINDS: tuple[str, ...] = ("relative", "post_registration", "theoretical_full", "theoretical_offsets_only")


@dataclass(frozen=True)
class AccuracySummary:
    """
    距離の分布の要約です。

    Parameters
    ----------
    mean : float
        平均 (mm) です。
    interval_low : float
        2.5 パーセンタイル (mm) です。
    interval_high : float
        97.5 パーセンタイル (mm) です。
    n : int
        値の数です。
    metric_kind : str
        指標の種類です。
    """

    mean: float
    interval_low: float
    interval_high: float
    n: int
    metric_kind: str

    def __post_init__(self) -> None:
        if self.metric_kind not in METRIC_KINDS:
            raise MetricsError(f"Unknown metric kind '{self.metric_kind}'")
        if not (0.0 <= self.interval_low <= self.interval_high and self.mean >= 0.0):
            raise MetricsError(
                f"Inconsistent summary: mean {self.mean}, interval [{self.interval_low}, {self.interval_high}]"
            )

    @property
    def interval_95(self) -> tuple[float, float]:
        return (self.interval_low, self.interval_high)

    def as_dict(self) -> dict[str, Any]:
        return {
            "metric_kind": self.metric_kind,
            "mean_mm": self.mean,
            "interval_95_mm": [self.interval_low, self.interval_high],
            "n": self.n,
        }
