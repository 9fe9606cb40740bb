"""テストで共有するフィクスチャーです。"""

from __future__ import annotations

import numpy as np
import pytest

from src.models.kinematics import DHChain
from src.models.scene import SceneConfig
from src.services.kinematics import reference_chain

from .helpers import make_scene


@pytest.fixture
def chain() -> DHChain:
    """組み込みの参照チェーンです。"""
    return reference_chain()


@pytest.fixture
def noiseless_scene() -> SceneConfig:
    """雑音のない合成シーンです。"""
    return make_scene()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
