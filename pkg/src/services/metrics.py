"""相対精度、位置合わせ後の絶対精度、事後サンプルによる理論精度を計算するモジュールです。"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from ..config import metrics_defaults
from ..exceptions import DimensionMismatchError, EmptyMetricError, MetricsError
from ..logger import get_logger
from ..models.calibration import CalibrationResult
from ..models.kinematics import DHChain, FloatArray, JointConfig
from ..models.metrics import AccuracySummary
from .kinematics import tool_points_batch

logger = get_logger(__name__)

BASELINES: tuple[str, ...] = ("mle", "vernier")

Cluster = tuple[ArrayLike, ArrayLike]


def summarize_values(values: ArrayLike, metric_kind: str) -> AccuracySummary:
    """
    距離の平均と 2.5/97.5 パーセンタイル (線形補間) を求めます。

    Raises
    ------
    EmptyMetricError
        値が一つもない場合に発生します。
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyMetricError(metric_kind)
    low, high = np.percentile(v, metrics_defaults.INTERVAL_PERCENTILES)
    return AccuracySummary(float(v.mean()), float(low), float(high), int(v.size), metric_kind)


def relative_distances(clusters: Sequence[Cluster]) -> FloatArray:
    """
    同じ姿勢のクラスター内のすべての点の組について | ‖Δp_ref‖ − ‖Δp_robot‖ | を返します。

    Raises
    ------
    MetricsError
        空のクラスターがある場合に発生します。
    DimensionMismatchError
        クラスター内の参照点とロボット点の数が一致しない場合に発生します。
    """
    pooled: list[FloatArray] = []
    for index, (ref, robot) in enumerate(clusters):
        p_ref = np.asarray(ref, dtype=np.float64).reshape(-1, 3)
        p_robot = np.asarray(robot, dtype=np.float64).reshape(-1, 3)
        if p_ref.shape[0] == 0:
            raise MetricsError(f"Cluster {index} is empty")
        if p_ref.shape != p_robot.shape:
            raise DimensionMismatchError(f"cluster {index} points", p_ref.shape[0], p_robot.shape[0])
        i, j = np.triu_indices(p_ref.shape[0], k=1)
        d_ref = np.linalg.norm(p_ref[i] - p_ref[j], axis=1)
        d_robot = np.linalg.norm(p_robot[i] - p_robot[j], axis=1)
        pooled.append(np.abs(d_ref - d_robot))
    return np.concatenate(pooled) if pooled else np.empty(0)


def relative_accuracy(clusters: Sequence[Cluster]) -> AccuracySummary:
    """
    相対カーテシアン精度を求めます。

    Parameters
    ----------
    clusters : Sequence[Cluster]
        姿勢ごとの (参照座標系 N の点, ロボット基準座標系 R の点) の組です。

    Returns
    -------
    AccuracySummary
        すべての組の距離差の要約です。

    Raises
    ------
    EmptyMetricError
        すべてのクラスターが 1 点だけで、組が一つもない場合に発生します。

    Notes
    -----
    距離は座標系に依存しないので、どちらかの点群を剛体変換しても結果は変わりません。
    """
    return summarize_values(relative_distances(clusters), "relative")


def clusters_by_pose(pose_indices: ArrayLike, ref_points: ArrayLike, robot_points: ArrayLike) -> list[Cluster]:
    """レコードを姿勢番号の昇順にクラスターへまとめます。"""
    indices = np.asarray(pose_indices)
    ref = np.asarray(ref_points, dtype=np.float64)
    robot = np.asarray(robot_points, dtype=np.float64)
    return [(ref[indices == pose], robot[indices == pose]) for pose in np.unique(indices)]


def post_registration_accuracy(residuals: ArrayLike) -> AccuracySummary:
    """
    位置合わせ後の絶対精度として誤差行列の行ノルム ‖Eᵢ‖₂ の分布を要約します。

    Parameters
    ----------
    residuals : ArrayLike
        形状 (n, 3) の誤差行列 (mm) です。

    Returns
    -------
    AccuracySummary
        行ノルムの要約です。合計は mean × n で得られます。

    Raises
    ------
    EmptyMetricError
        誤差行列が空の場合に発生します。
    """
    e = np.asarray(residuals, dtype=np.float64).reshape(-1, 3)
    return summarize_values(np.linalg.norm(e, axis=1), "post_registration")


def random_configs(chain: DHChain, n: int, seed: int) -> list[JointConfig]:
    """
    可動範囲内で一様な関節構成を返します。

    Parameters
    ----------
    chain : DHChain
        ロボットモデルです。
    n : int
        構成の数です。
    seed : int
        乱数シードです。

    Returns
    -------
    list[JointConfig]
        関節構成です。
    """
    if n < 1:
        raise MetricsError(f"Number of random configurations must be positive, got {n}")
    rng = np.random.default_rng(seed)
    draws = rng.uniform(chain.joint_limits[:, 0], chain.joint_limits[:, 1], size=(n, chain.k))
    return list(draws)


def _draw_offsets(result: CalibrationResult, n_draws: int, per_joint: bool, rng: np.random.Generator) -> FloatArray:
    samples = result.offset_samples_rad()
    m = samples.shape[0]
    replace = m < n_draws
    if per_joint:
        columns = [samples[rng.choice(m, n_draws, replace=replace), j] for j in range(samples.shape[1])]
        return np.column_stack(columns)
    return samples[rng.choice(m, n_draws, replace=replace)]


def theoretical_distances(
    chain: DHChain,
    result: CalibrationResult,
    configs: Sequence[JointConfig] | FloatArray,
    n_draws: int = metrics_defaults.N_DRAWS,
    include_isotropic_noise: bool = True,
    baseline: str = "mle",
    point_name: str = "flange",
    seed: int = metrics_defaults.THEORETICAL_SEED,
    per_joint: bool = False,
) -> FloatArray:
    """theoretical_accuracy の元になる距離を形状 (n_draws, n_configs) で返します。"""
    if baseline not in BASELINES:
        raise MetricsError(f"Unknown baseline '{baseline}' (expected one of {', '.join(BASELINES)})")
    if result.post_burn_in_samples.shape[0] == 0:
        raise EmptyMetricError("theoretical")
    q = np.asarray(configs, dtype=np.float64)
    if q.size == 0:
        raise EmptyMetricError("theoretical")
    if n_draws < 1:
        raise MetricsError(f"n_draws must be positive, got {n_draws}")
    q = q.reshape(-1, chain.k)

    baseline_offsets = result.mle.theta2 if baseline == "mle" else chain.offsets
    baseline_points = tool_points_batch(chain.with_offsets(baseline_offsets), q, point_name)
    rng = np.random.default_rng(seed)
    draws = _draw_offsets(result, n_draws, per_joint, rng)
    sigma = result.mle.sigma
    distances = np.empty((n_draws, q.shape[0]))
    for i, offsets in enumerate(draws):
        points = tool_points_batch(chain.with_offsets(offsets), q, point_name)
        if include_isotropic_noise:
            # 等方モデルなので雑音は TCP に直接加えられます。
            points = points + rng.normal(0.0, sigma, size=points.shape)
        distances[i] = np.linalg.norm(points - baseline_points, axis=1)
    return distances


def theoretical_accuracy(
    chain: DHChain,
    result: CalibrationResult,
    configs: Sequence[JointConfig] | FloatArray,
    n_draws: int = metrics_defaults.N_DRAWS,
    include_isotropic_noise: bool = True,
    baseline: str = "mle",
    point_name: str = "flange",
    seed: int = metrics_defaults.THEORETICAL_SEED,
    per_joint: bool = False,
) -> AccuracySummary:
    """
    事後サンプルのゼロオフセットで TCP の不確かさを伝播させた理論精度を求めます。

    Parameters
    ----------
    chain : DHChain
        名目上のロボットモデルです。
    result : CalibrationResult
        burn-in 後のサンプルを持つ校正結果です。
    configs : Sequence[JointConfig] | FloatArray
        評価する関節構成です。
    n_draws : int
        事後サンプルから引く数です。サンプル数が足りない場合は復元抽出します。
    include_isotropic_noise : bool
        N(0, σ_MLE²I) を TCP に加えるかどうかです。
    baseline : str
        基準の TCP に使うオフセットです。"mle" は推定値、"vernier" はチェーンの名目オフセットです。
    point_name : str
        TCP とするツール点です。
    seed : int
        乱数シードです。
    per_joint : bool
        True の場合は関節ごとに独立に引きます。False の場合はサンプルの行をまとめて引きます。

    Returns
    -------
    AccuracySummary
        すべての構成とサンプルの距離の要約です。

    Raises
    ------
    EmptyMetricError
        サンプルまたは構成が空の場合に発生します。
    """
    distances = theoretical_distances(
        chain, result, configs, n_draws, include_isotropic_noise, baseline, point_name, seed, per_joint
    )
    kind = "theoretical_full" if include_isotropic_noise else "theoretical_offsets_only"
    return summarize_values(distances, kind)


def offsets_only_share(full: AccuracySummary, offsets_only: AccuracySummary) -> float:
    """理論精度の平均に占めるゼロオフセット由来の誤差の割合を返します。"""
    if full.mean <= 0.0:
        return 0.0
    return offsets_only.mean / full.mean
