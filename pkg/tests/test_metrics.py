"""精度指標 (相対精度、位置合わせ後の絶対精度、理論精度) をテストします。"""

import math

import numpy as np
import pytest
from scipy import stats
from scipy.spatial.transform import Rotation

from src.exceptions import EmptyMetricError, MetricsError
from src.models.calibration import PosteriorTrace, parameter_names
from src.models.kinematics import RigidTransform
from src.models.metrics import AccuracySummary
from src.services.calibration import summarize
from src.services.kinematics import tool_points_batch
from src.services.metrics import (
    clusters_by_pose,
    offsets_only_share,
    post_registration_accuracy,
    random_configs,
    relative_accuracy,
    summarize_values,
    theoretical_accuracy,
    theoretical_distances,
)

from .helpers import TRUE_OFFSETS_DEG, interior_configs

MAXWELL_MEAN_FACTOR = math.sqrt(8.0 / math.pi)


def random_transform(rng: np.random.Generator) -> RigidTransform:
    rotation = Rotation.from_rotvec(rng.normal(0.0, 1.0, 3)).as_matrix()
    return RigidTransform(rotation, rng.uniform(-1000.0, 1000.0, 3))


def constant_result(offsets_deg, sigma: float, n: int = 50):
    """すべてのサンプルが同じ値の校正結果を作ります。"""
    row = np.array([0.0] * 6 + list(offsets_deg) + [sigma])
    samples = np.tile(row, (n, 1))
    trace = PosteriorTrace(
        samples=samples,
        accepted=np.ones(n, dtype=bool),
        log_posterior=np.zeros(n),
        parameter_names=parameter_names(len(offsets_deg)),
        seed=0,
        proposal_width=0.0125,
        n_steps=n,
        burn_in=0,
    )
    return summarize(trace)


def test_congruent_clusters_have_zero_relative_error(rng):
    """剛体変換で写しただけの点群では相対精度が 0 になることをテストします。"""
    clusters = []
    for _ in range(5):
        robot = rng.uniform(-500.0, 500.0, (4, 3))
        clusters.append((random_transform(rng).apply(robot), robot))
    summary = relative_accuracy(clusters)
    assert summary.n == 5 * 6
    assert summary.mean < 1e-9
    assert summary.metric_kind == "relative"


def test_relative_accuracy_is_frame_invariant(rng):
    """参照点群を剛体変換しても相対精度が変わらないことをテストします。"""
    for _ in range(100):
        ref = rng.uniform(-500.0, 500.0, (3, 3))
        robot = ref + rng.normal(0.0, 0.5, (3, 3))
        before = relative_accuracy([(ref, robot)])
        after = relative_accuracy([(random_transform(rng).apply(ref), robot)])
        assert after.mean == pytest.approx(before.mean, abs=1e-9)


def test_relative_accuracy_example():
    """10 mm と 7 mm の距離差が 3 mm になることをテストします。"""
    ref = np.array([[0.0, 0.0, 0.0], [10.0, 0.0, 0.0]])
    robot = np.array([[0.0, 0.0, 0.0], [7.0, 0.0, 0.0]])
    summary = relative_accuracy([(ref, robot)])
    assert summary.mean == pytest.approx(3.0)
    assert summary.n == 1


def test_relative_accuracy_needs_pairs():
    """1 点だけのクラスターしかない場合はエラーになることをテストします。"""
    single = (np.zeros((1, 3)), np.zeros((1, 3)))
    with pytest.raises(EmptyMetricError):
        relative_accuracy([single, single])


def test_clusters_by_pose_groups_records():
    """姿勢番号ごとに昇順でまとめることをテストします。"""
    ref = np.arange(15, dtype=float).reshape(5, 3)
    clusters = clusters_by_pose([2, 0, 2, 0, 1], ref, ref + 1.0)
    assert [c[0].shape[0] for c in clusters] == [2, 1, 2]
    np.testing.assert_array_equal(clusters[0][0], ref[[1, 3]])


def test_post_registration_examples():
    """行ノルムの平均と線形補間のパーセンタイルをテストします。"""
    summary = post_registration_accuracy([[3.0, 4.0, 0.0], [0.0, 0.0, 0.0]])
    assert summary.mean == 2.5
    assert summary.interval_95 == pytest.approx((0.125, 4.875))
    assert summary.n == 2


def test_post_registration_of_isotropic_noise(rng):
    """等方ガウス誤差の行ノルムの平均が σ√(8/π) に近いことをテストします。"""
    sigma = 0.1
    summary = post_registration_accuracy(rng.normal(0.0, sigma, (1_000_000, 3)))
    assert summary.mean == pytest.approx(sigma * MAXWELL_MEAN_FACTOR, rel=0.01)


def test_summarize_values_percentiles():
    summary = summarize_values(np.arange(101, dtype=float), "relative")
    assert summary.interval_95 == pytest.approx((2.5, 97.5))
    assert summary.mean == 50.0
    with pytest.raises(EmptyMetricError):
        summarize_values([], "relative")


def test_accuracy_summary_validation():
    """未知の種類や矛盾した区間がエラーになることをテストします。"""
    with pytest.raises(MetricsError):
        AccuracySummary(1.0, 0.5, 1.5, 3, "absolute")
    with pytest.raises(MetricsError):
        AccuracySummary(1.0, 2.0, 1.5, 3, "relative")


def test_random_configs_are_uniform(chain):
    """ランダムな関節構成が可動範囲内で一様に分布することをテストします。"""
    configs = np.array(random_configs(chain, 10_000, seed=1000))
    assert configs.shape == (10_000, 7)
    assert all(chain.within_limits(q) for q in configs)
    for j in range(chain.k):
        low, high = chain.joint_limits[j]
        counts, _ = np.histogram(configs[:, j], bins=10, range=(low, high))
        assert stats.chisquare(counts).pvalue > 0.001
    assert np.array_equal(configs, np.array(random_configs(chain, 10_000, seed=1000)))
    with pytest.raises(MetricsError):
        random_configs(chain, 0, seed=1)


def test_theoretical_accuracy_without_spread_is_zero(chain):
    """サンプルがすべて推定値と同じで雑音もなければ理論精度が 0 になることをテストします。"""
    result = constant_result(TRUE_OFFSETS_DEG, 0.1)
    configs = interior_configs(chain, 20, seed=8)
    summary = theoretical_accuracy(chain, result, configs, n_draws=200, include_isotropic_noise=False)
    assert summary.mean == 0.0
    assert summary.metric_kind == "theoretical_offsets_only"
    assert summary.n == 200 * 20


def test_theoretical_accuracy_with_noise_only(chain):
    """広がりのないサンプルに雑音だけを加えると σ√(8/π) になることをテストします。"""
    result = constant_result(TRUE_OFFSETS_DEG, 0.1)
    configs = interior_configs(chain, 20, seed=8)
    summary = theoretical_accuracy(chain, result, configs, n_draws=2000)
    assert summary.metric_kind == "theoretical_full"
    assert summary.mean == pytest.approx(0.1 * MAXWELL_MEAN_FACTOR, rel=0.02)


def test_vernier_baseline_measures_distance_from_nominal(chain):
    """vernier 基準では名目オフセットの TCP からの距離になることをテストします。"""
    result = constant_result(TRUE_OFFSETS_DEG, 0.1)
    configs = interior_configs(chain, 20, seed=8)
    summary = theoretical_accuracy(
        chain, result, configs, n_draws=10, include_isotropic_noise=False, baseline="vernier"
    )
    shifted = tool_points_batch(chain.with_offsets(np.radians(TRUE_OFFSETS_DEG)), configs, "flange")
    nominal = tool_points_batch(chain, configs, "flange")
    expected = float(np.mean(np.linalg.norm(shifted - nominal, axis=1)))
    assert summary.mean == pytest.approx(expected, rel=1e-12)
    assert summary.mean > 0.0


def test_per_joint_draws(chain, rng):
    """関節ごとに独立に引く方法でも形状が変わらず、結果は異なることをテストします。"""
    samples = np.zeros((100, 14))
    samples[:, 6:13] = rng.normal(0.0, 0.05, (100, 1))
    samples[:, -1] = 0.1
    trace = PosteriorTrace(
        samples=samples,
        accepted=np.ones(100, dtype=bool),
        log_posterior=np.zeros(100),
        parameter_names=parameter_names(7),
        seed=0,
        proposal_width=0.0125,
        n_steps=100,
        burn_in=0,
    )
    result = summarize(trace)
    configs = interior_configs(chain, 5, seed=8)
    joint = theoretical_distances(chain, result, configs, n_draws=300, include_isotropic_noise=False)
    independent = theoretical_distances(
        chain, result, configs, n_draws=300, include_isotropic_noise=False, per_joint=True
    )
    assert joint.shape == independent.shape == (300, 5)
    assert not np.allclose(joint, independent)


def test_theoretical_errors(chain):
    result = constant_result(TRUE_OFFSETS_DEG, 0.1)
    configs = interior_configs(chain, 3, seed=8)
    with pytest.raises(MetricsError):
        theoretical_accuracy(chain, result, configs, baseline="median")
    with pytest.raises(EmptyMetricError):
        theoretical_accuracy(chain, result, np.empty((0, 7)))


def test_offsets_only_share():
    full = AccuracySummary(0.2, 0.1, 0.3, 10, "theoretical_full")
    offsets_only = AccuracySummary(0.05, 0.01, 0.1, 10, "theoretical_offsets_only")
    assert offsets_only_share(full, offsets_only) == pytest.approx(0.25)
    zero = AccuracySummary(0.0, 0.0, 0.0, 10, "theoretical_full")
    assert offsets_only_share(zero, offsets_only) == 0.0
