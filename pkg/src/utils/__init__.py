"""出力ファイルの置き場所を扱うユーティリティ関数を提供するモジュールです。"""

from pathlib import Path


def ensure_directory(directory_path: str | Path) -> Path:
    """
    出力ディレクトリを親ディレクトリも含めて作成します。

    Parameters
    ----------
    directory_path : str | Path
        作成するディレクトリのパスです。既に存在していても構いません。

    Returns
    -------
    Path
        ディレクトリのパスです。
    """
    path = Path(directory_path)
    path.mkdir(parents=True, exist_ok=True)
    return path


def output_path(directory: str | Path, filename: str) -> Path:
    """出力ディレクトリを作成し、その中のファイルのパスを返します。"""
    return ensure_directory(directory) / filename
