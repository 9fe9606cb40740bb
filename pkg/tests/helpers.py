"""テストで共有するデータ生成の補助関数です。"""

from __future__ import annotations

import math

import numpy as np

from src.models.kinematics import DHChain, RigidTransform
from src.models.scene import SceneConfig
from src.services.kinematics import euler_zyx_to_rotation, reference_chain

TRUE_OFFSETS_DEG = (0.477, -0.192, 0.139, 0.099, 0.392, -0.114, 0.936)


def interior_configs(chain: DHChain, n: int, seed: int, margin: float = 0.8) -> np.ndarray:
    """可動範囲の内側 margin 倍の範囲で一様な関節構成を返します。"""
    rng = np.random.default_rng(seed)
    limits = chain.joint_limits * margin
    return rng.uniform(limits[:, 0], limits[:, 1], size=(n, chain.k))


def sensor_pose() -> RigidTransform:
    """モーションキャプチャーの組み込みシーンと同じセンサーの姿勢です。"""
    rotation = euler_zyx_to_rotation(math.radians(165.0), math.radians(5.0), math.radians(-3.0))
    return RigidTransform(rotation, np.array([1800.0, 200.0, 900.0]))


def make_scene(
    offsets_deg: tuple[float, ...] = TRUE_OFFSETS_DEG,
    marker: str = "sir",
    noise: float = 0.0,
    registration_noise: float = 0.0,
    pose: RigidTransform | None = None,
    seed: int = 11,
) -> SceneConfig:
    """テスト用の合成シーンを作ります。"""
    return SceneConfig(
        chain_nominal=reference_chain(),
        true_offsets_deg=offsets_deg,
        true_sensor_pose=sensor_pose() if pose is None else pose,
        marker=marker,
        sensor_noise_sigma=noise,
        registration_noise_sigma=registration_noise,
        seed=seed,
        label="test",
    )


def indexed(configs: np.ndarray, per_pose: int = 3) -> list[tuple[int, np.ndarray]]:
    """関節構成に per_pose 個ずつ同じ姿勢番号を付けます。"""
    return [(i // per_pose, q) for i, q in enumerate(configs)]
