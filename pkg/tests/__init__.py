"""テストパッケージの初期化です。

ログファイルなどがホームディレクトリに書き出されないように、
src を読み込む前にデータディレクトリを一時ディレクトリに切り替えます。"""

from __future__ import annotations

import os
import tempfile

os.environ["RUNNING_TESTS"] = "1"
os.environ.setdefault("REMASTER_HOME", tempfile.mkdtemp(prefix="remaster-tests-"))
