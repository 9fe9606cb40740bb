"""remaster のバージョン番号です。pyproject.toml の hatch がここから読み取ります。"""

__version__ = "0.1.0"
