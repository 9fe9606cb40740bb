"""運動学、逆運動学、姿勢生成、位置合わせ、校正、評価の計算を提供するモジュールです。"""
