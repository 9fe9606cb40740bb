"""remaster のエントリー ポイントです。

このモジュールは、コマンドラインからツールキットを起動するためのエントリー ポイントを提供します。
引数の解析とサブコマンドの実行は src.application に委ねます。
"""

import sys

from src.logger import get_logger

logger = get_logger(__name__)


def main() -> int:
    """
    アプリケーションのエントリー ポイントです。

    Returns
    -------
    int
        アプリケーションの終了コードです。
    """
    logger.info("Starting remaster command line")

    from src.application import main as application_main

    return application_main(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
