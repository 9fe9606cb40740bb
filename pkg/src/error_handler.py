"""remaster の一元化されたエラーハンドリングです。"""

from __future__ import annotations

import sys
import traceback
from collections.abc import Callable
from enum import Enum
from types import TracebackType
from typing import TextIO

from .config import app_config
from .exceptions import RemasterError
from .logger import get_logger

logger = get_logger(__name__)

ErrorCallback = Callable[[Exception, str], None]
ExceptionHook = Callable[[type[BaseException], BaseException, TracebackType | None], None]


class ErrorSeverity(Enum):
    """エラーの深刻度レベルです。"""

    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"


class ErrorHandler:
    """コマンドラインツールの一元化されたエラーハンドラーです。"""

    def __init__(self, stream: TextIO | None = None):
        """エラーハンドラーを初期化します。

        Parameters
        ----------
        stream : TextIO | None
            利用者向けのメッセージを書き出す先です。None の場合は標準エラーです。
        """
        self._stream = stream
        self._error_callbacks: dict[type, ErrorCallback] = {}
        self._show_messages = True

    def set_show_messages(self, show: bool) -> None:
        """利用者向けメッセージの出力を有効または無効にします。"""
        self._show_messages = show

    def register_error_callback(self, error_type: type, callback: ErrorCallback) -> None:
        """特定のエラータイプのコールバックを登録します。

        Parameters
        ----------
        error_type : type
            処理する例外タイプです。
        callback : ErrorCallback
            このエラーが発生したときに呼び出す関数です。
        """
        self._error_callbacks[error_type] = callback

    @staticmethod
    def exit_code_for(error: BaseException) -> int:
        """例外に対応する終了コードを返します。"""
        if isinstance(error, RemasterError):
            return app_config.EXIT_DOMAIN_ERROR
        return app_config.EXIT_UNEXPECTED

    @staticmethod
    def severity_for(error: BaseException) -> ErrorSeverity:
        """ドメインのエラーは ERROR、それ以外は CRITICAL として扱います。"""
        return ErrorSeverity.ERROR if isinstance(error, RemasterError) else ErrorSeverity.CRITICAL

    def handle_error(
        self,
        error: Exception,
        context: str = "",
        severity: ErrorSeverity | None = None,
        show_message: bool | None = None,
    ) -> int:
        """適切なログ記録と利用者向けメッセージでエラーを処理します。

        Parameters
        ----------
        error : Exception
            発生した例外です。
        context : str
            エラーが発生したコンテキストの説明です。
        severity : ErrorSeverity | None
            エラーの深刻度レベルです。None の場合は例外の種類から決めます。
        show_message : bool | None
            メッセージを出力するかどうかです (グローバル設定を上書き)。

        Returns
        -------
        int
            プロセスの終了コードです。
        """
        if severity is None:
            severity = self.severity_for(error)
        error_msg = str(error)
        full_message = f"{context}: {error_msg}" if context else error_msg

        if severity == ErrorSeverity.INFO:
            logger.info(full_message)
        elif severity == ErrorSeverity.WARNING:
            logger.warning(full_message)
        elif severity == ErrorSeverity.ERROR:
            logger.error(full_message, exc_info=error)
        elif severity == ErrorSeverity.CRITICAL:
            logger.critical(full_message, exc_info=error)

        error_type = type(error)
        if error_type in self._error_callbacks:
            try:
                self._error_callbacks[error_type](error, context)
            except Exception as callback_error:
                logger.error(f"Error in error callback: {callback_error}")

        should_show = show_message if show_message is not None else self._show_messages
        if should_show and severity in (ErrorSeverity.ERROR, ErrorSeverity.CRITICAL):
            self._show_error_message(full_message, severity)
        return self.exit_code_for(error)

    def handle_exception(
        self,
        exc_type: type[BaseException],
        exc_value: BaseException,
        exc_traceback: TracebackType | None,
        context: str = "",
    ) -> None:
        """未捕捉例外を処理します。"""
        tb_text = "".join(traceback.format_exception(exc_type, exc_value, exc_traceback))
        logger.critical(f"Uncaught exception in {context}:\n{tb_text}")
        if isinstance(exc_value, Exception):
            self.handle_error(exc_value, f"Uncaught exception in {context}", ErrorSeverity.CRITICAL)

    def _show_error_message(self, message: str, severity: ErrorSeverity) -> None:
        stream = self._stream if self._stream is not None else sys.stderr
        title = "critical error" if severity == ErrorSeverity.CRITICAL else "error"
        print(f"{app_config.APP_NAME}: {title}: {message}", file=stream)

    def create_exception_hook(self, context: str = "application") -> ExceptionHook:
        """sys.excepthook 用の例外フックを作成します。

        Parameters
        ----------
        context : str
            例外のコンテキスト説明です。

        Returns
        -------
        ExceptionHook
            例外フック関数です。
        """

        def exception_hook(
            exc_type: type[BaseException], exc_value: BaseException, exc_traceback: TracebackType | None
        ) -> None:
            # KeyboardInterrupt は処理しません。
            if issubclass(exc_type, KeyboardInterrupt):
                sys.__excepthook__(exc_type, exc_value, exc_traceback)
                return

            self.handle_exception(exc_type, exc_value, exc_traceback, context)

        return exception_hook


_global_error_handler: ErrorHandler | None = None


def get_error_handler() -> ErrorHandler:
    """グローバルエラーハンドラーのインスタンスを取得します。"""
    global _global_error_handler
    if _global_error_handler is None:
        _global_error_handler = ErrorHandler()
    return _global_error_handler


def setup_global_exception_handling() -> None:
    """グローバル例外処理をセットアップします。"""
    sys.excepthook = get_error_handler().create_exception_hook("global")
    logger.info("Global exception handling configured")
