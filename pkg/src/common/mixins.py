"""共有動作パターンのための共通ミックスインです。"""

from __future__ import annotations

import logging
from typing import Any

from ..logger import get_logger
from .protocols import ProgressReporter


class LoggingMixin:
    """一貫したロギング機能のためのミックスインです。"""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self._logger: logging.Logger | None = None

    @property
    def logger(self) -> logging.Logger:
        """ロガーのインスタンスを取得します (遅延読み込み)。"""
        if self._logger is None:
            self._logger = get_logger(self.__class__.__module__)
        return self._logger

    def log_debug(self, message: str) -> None:
        self.logger.debug(f"{self.__class__.__name__}: {message}")

    def log_info(self, message: str) -> None:
        self.logger.info(f"{self.__class__.__name__}: {message}")


class ProgressMixin:
    """進捗を報告する必要があるコンポーネントのためのミックスインです。"""

    def __init__(self, *args: Any, **kwargs: Any) -> None:
        super().__init__(*args, **kwargs)
        self._reporter: ProgressReporter | None = None

    def set_reporter(self, reporter: ProgressReporter | None) -> None:
        """進捗の報告先を設定します。"""
        self._reporter = reporter

    def report_progress(self, stage: str, done: int, total: int) -> None:
        """進捗を報告します。

        Parameters
        ----------
        stage : str
            処理段階の名前です。
        done : int
            完了した数です。
        total : int
            全体の数です。
        """
        if self._reporter:
            self._reporter.report(stage, done, total)
        else:
            # 報告先がない場合はログにフォールバックします。
            get_logger(self.__class__.__module__).debug(f"Progress {stage}: {done}/{total}")
