"""ラテン超方格サンプリングでセンサーを向く候補姿勢を生成するモジュールです。

4 次元 (ᴿθ_z, r, ᴿz_d, ᵀθ_z) を層別サンプリングし、位置を円筒座標で、
向きを「ツール Z 軸がセンサー原点を向く」規則で決めます。
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike
from scipy.stats import qmc

from ..config import sampler_defaults
from ..exceptions import DegeneratePoseError, RemasterError
from ..logger import get_logger
from ..models.ik import IKRequest
from ..models.kinematics import DHChain, FloatArray, Pose
from ..models.sampling import CandidatePose, PoseSet, SamplerConfig
from .ik import default_arm_angles, solve_ik
from .kinematics import rot_z

logger = get_logger(__name__)

_BASE_Z = np.array([0.0, 0.0, 1.0])
_LHS_DIMS = 4


def latin_hypercube(n: int, dims: int = _LHS_DIMS, seed: int | np.random.Generator | None = None) -> FloatArray:
    """
    ラテン超方格サンプルを返します。

    Parameters
    ----------
    n : int
        サンプル数です。
    dims : int
        次元数です。
    seed : int | np.random.Generator | None
        乱数シードです。

    Returns
    -------
    FloatArray
        形状 (n, dims) の [0, 1) の値です。各列は各区間 [i/n, (i+1)/n) にちょうど 1 つずつ値を持ちます。
    """
    if n < 1:
        raise RemasterError(f"Latin hypercube needs at least one sample, got {n}")
    sampler = qmc.LatinHypercube(d=dims, seed=seed)
    return np.asarray(sampler.random(n), dtype=np.float64)


def scale_row(unit_row: ArrayLike, bounds: FloatArray) -> FloatArray:
    """[0, 1) の行を各次元の [下限, 上限) に写します。"""
    u = np.asarray(unit_row, dtype=np.float64)
    return bounds[:, 0] + u * (bounds[:, 1] - bounds[:, 0])


def build_pose(lhs_row: ArrayLike, sensor_origin: ArrayLike) -> CandidatePose:
    """
    スケール済みの LHS 行からセンサーを向く姿勢を作ります。

    Parameters
    ----------
    lhs_row : ArrayLike
        (ᴿθ_z, r, ᴿz_d, ᵀθ_z) です。角度は rad、長さは mm です。
    sensor_origin : ArrayLike
        ロボット基準座標系で表したセンサー原点 (mm) です。

    Returns
    -------
    CandidatePose
        構成した候補姿勢です。

    Raises
    ------
    DegeneratePoseError
        位置がセンサー原点と一致する場合、または接近方向が基準 Z 軸と平行な場合に発生します。

    Notes
    -----
    ẑ はセンサー原点への単位ベクトル、x̂ は正規化した ẑ × Z、ŷ = ẑ × x̂ です。
    最後にツール Z 軸まわりに ᵀθ_z だけ回します。
    """
    theta_base, radius, height, theta_tool = (float(v) for v in np.asarray(lhs_row, dtype=np.float64))
    translation = np.array([radius * np.cos(theta_base), radius * np.sin(theta_base), height])
    toward = np.asarray(sensor_origin, dtype=np.float64) - translation
    distance = float(np.linalg.norm(toward))
    if distance < sampler_defaults.PARALLEL_TOLERANCE:
        raise DegeneratePoseError("Pose translation coincides with the sensor origin")
    z_axis = toward / distance
    if abs(float(z_axis @ _BASE_Z)) >= 1.0 - sampler_defaults.PARALLEL_TOLERANCE:
        raise DegeneratePoseError("Approach direction is parallel to the base Z axis")
    x_axis = np.cross(z_axis, _BASE_Z)
    x_axis /= np.linalg.norm(x_axis)
    y_axis = np.cross(z_axis, x_axis)
    rotation = np.column_stack([x_axis, y_axis, z_axis]) @ rot_z(theta_tool)
    return CandidatePose(Pose(rotation, translation), (theta_base, radius, height, theta_tool))


def generate_candidates(config: SamplerConfig) -> tuple[list[CandidatePose], int, int]:
    """
    設定から候補姿勢を生成します。

    Returns
    -------
    tuple[list[CandidatePose], int, int]
        候補姿勢、捨てた退化行の数、再サンプリングの回数です。

    Notes
    -----
    退化した行は同じセル内で新しい値を引き直し、最大回数を超えたら捨てます。
    再サンプリングの乱数は LHS とは別の系列から取るので、退化行がなければ結果は LHS だけで決まります。
    """
    lhs_seq, resample_seq = np.random.SeedSequence(config.seed).spawn(2)
    unit = latin_hypercube(config.n_poses, _LHS_DIMS, np.random.default_rng(lhs_seq))
    resample_rng = np.random.default_rng(resample_seq)
    bounds = config.bounds
    n = config.n_poses
    candidates: list[CandidatePose] = []
    n_degenerate = 0
    n_resampled = 0
    for index, row in enumerate(unit):
        cells = np.floor(row * n)
        attempt_row = row
        for attempt in range(sampler_defaults.MAX_RESAMPLE_ATTEMPTS + 1):
            try:
                candidates.append(build_pose(scale_row(attempt_row, bounds), config.sensor_origin))
                break
            except DegeneratePoseError as e:
                if attempt == sampler_defaults.MAX_RESAMPLE_ATTEMPTS:
                    logger.warning(f"Discarding LHS row {index} after {attempt} resamples: {e.message}")
                    n_degenerate += 1
                    break
                n_resampled += 1
                attempt_row = (cells + resample_rng.random(_LHS_DIMS)) / n
    return candidates, n_degenerate, n_resampled


def filter_feasible(
    candidates: Sequence[CandidatePose], chain: DHChain, arm_angles: Sequence[float]
) -> list[CandidatePose]:
    """
    逆運動学の解が 1 つ以上ある候補だけを順序を保って残します。

    Parameters
    ----------
    candidates : Sequence[CandidatePose]
        候補姿勢です。
    chain : DHChain
        ロボットモデルです。
    arm_angles : Sequence[float]
        アーム角 (rad) です。

    Returns
    -------
    list[CandidatePose]
        実行可能な候補姿勢です。
    """
    angles = tuple(arm_angles)
    feasible: list[CandidatePose] = []
    for index, candidate in enumerate(candidates):
        try:
            solutions = solve_ik(chain, IKRequest(candidate.pose, angles))
        except RemasterError as e:
            logger.debug(f"Candidate {index} discarded: {e.message}")
            continue
        if not solutions.solutions:
            logger.debug(f"Candidate {index} discarded: no in-limit solution {solutions.diagnostics.as_dict()}")
            continue
        feasible.append(candidate)
    return feasible


def generate_pose_set(config: SamplerConfig, chain: DHChain) -> PoseSet:
    """
    候補姿勢を生成し、実行可能なものを先頭から n_keep 個残します。

    Parameters
    ----------
    config : SamplerConfig
        生成設定です。
    chain : DHChain
        ロボットモデルです。

    Returns
    -------
    PoseSet
        残した姿勢と集計です。
    """
    candidates, n_degenerate, n_resampled = generate_candidates(config)
    feasible = filter_feasible(candidates, chain, default_arm_angles(config.arm_angle_count))
    if len(feasible) < config.n_keep:
        logger.warning(f"Only {len(feasible)} feasible poses available, {config.n_keep} requested")
    kept = feasible[: config.n_keep]
    logger.info(
        f"Generated {config.n_poses} candidate poses (seed {config.seed}): "
        f"{len(feasible)} feasible, {len(kept)} kept"
    )
    return PoseSet(
        candidates=kept,
        n_generated=config.n_poses,
        n_degenerate=n_degenerate,
        n_resampled=n_resampled,
        n_infeasible=len(candidates) - len(feasible),
    )
