"""remaster 全体で使うロガーの設定です。

REMASTER_HOME (既定は ~/.remaster) の logs ディレクトリにある remaster.log に書き出します。
"""

import logging
from pathlib import Path

from .config import logging_config

_log_dir = Path(logging_config.LOG_DIRECTORY)
_log_dir.mkdir(parents=True, exist_ok=True)

logging.basicConfig(
    level=logging.INFO,
    format="%(asctime)s [%(levelname)s] %(name)s: %(message)s",
    filename=str(Path(logging_config.LOG_FILE)),
    encoding="utf-8",
)


def get_logger(name: str | None = None) -> logging.Logger:
    """設定されたロガーを返します。"""
    return logging.getLogger(name)


def set_verbosity(verbose: bool) -> None:
    """ルートロガーのレベルを切り替え、詳細モードでは標準エラーにも出力します。

    Parameters
    ----------
    verbose : bool
        True の場合は DEBUG レベルにしてコンソールハンドラーを追加します。
    """
    root = logging.getLogger()
    root.setLevel(logging.DEBUG if verbose else logging.INFO)
    if verbose and not any(isinstance(h, logging.StreamHandler) and h.level == logging.DEBUG for h in root.handlers):
        handler = logging.StreamHandler()
        handler.setLevel(logging.DEBUG)
        handler.setFormatter(logging.Formatter("[%(levelname)s] %(name)s: %(message)s"))
        root.addHandler(handler)
