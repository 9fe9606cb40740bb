"""設定管理モジュールです。"""

from .settings import BUILTIN_SCENES, ConfigRepository

__all__ = [
    "BUILTIN_SCENES",
    "ConfigRepository",
]
