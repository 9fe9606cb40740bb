"""ドメインのデータ型を定義するモジュールです。"""
