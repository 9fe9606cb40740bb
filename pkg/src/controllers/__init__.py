"""校正実験のコントローラーモジュールです。

このパッケージは、サービスを組み合わせて実験全体を実行するコントローラークラスを提供します。
"""
