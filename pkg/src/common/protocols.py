"""循環インポートを回避し、インターフェースを定義するためのプロトコル定義です。"""

from typing import Protocol, runtime_checkable

import numpy as np
from numpy.typing import NDArray


@runtime_checkable
class LogDensity(Protocol):
    """サンプラーが評価する対数密度 (正規化定数は不要) のプロトコルです。"""

    def __call__(self, vector: NDArray[np.float64]) -> float:
        """状態ベクトルの対数密度を返します。許容範囲外では -inf を返します。"""
        ...


@runtime_checkable
class ProgressReporter(Protocol):
    """長い計算の進捗を受け取るコンポーネントのプロトコルです。"""

    def report(self, stage: str, done: int, total: int) -> None:
        """進捗を報告します。"""
        ...
