"""remaster ソースモジュールです。"""

# 循環 import を避けるため、自動 import を無効化します。
# from . import services

__all__ = []
