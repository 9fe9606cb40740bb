"""S-R-S アームの解析的逆運動学をテストします。"""

import math

import numpy as np
import pytest

from src.exceptions import IKError, UnreachableTargetError, UnsupportedTopologyError
from src.models.ik import IKRequest
from src.models.kinematics import DHChain, DHJoint, Pose
from src.models.sampling import SamplerConfig
from src.services.ik import (
    arm_angle,
    default_arm_angles,
    enumerate_configurations,
    enumerate_configurations_with_diagnostics,
    reach,
    solve_ik,
    thin_configurations,
)
from src.services.kinematics import forward_kinematics
from src.services.pose_sampler import generate_pose_set


def regular_configs(chain: DHChain, n: int, seed: int) -> list[np.ndarray]:
    """特異姿勢から離れた可動範囲内の関節構成を返します。"""
    rng = np.random.default_rng(seed)
    configs = []
    while len(configs) < n:
        q = rng.uniform(chain.joint_limits[:, 0] * 0.95, chain.joint_limits[:, 1] * 0.95)
        if min(abs(math.sin(q[1])), abs(q[3]), abs(math.sin(q[5]))) > 0.05:
            configs.append(q)
    return configs


def contains(solutions: list[np.ndarray], q: np.ndarray, tolerance: float = 1e-6) -> bool:
    return any(np.max(np.abs(s - q)) < tolerance for s in solutions)


def test_round_trip_recovers_configuration(chain):
    """FK の姿勢と自身のアーム角から元の関節構成が解に含まれることを 500 例でテストします。"""
    for q0 in regular_configs(chain, 500, seed=7):
        target = forward_kinematics(chain, q0)
        psi = arm_angle(chain, q0)
        result = solve_ik(chain, IKRequest(target, (psi,)))
        assert contains(result.solutions, q0), f"解に元の構成が含まれていません: {q0}"
        for q in result.solutions:
            pose = forward_kinematics(chain, q)
            assert np.linalg.norm(pose.translation - target.translation) < 1e-6
            assert np.linalg.norm(pose.rotation - target.rotation) < 1e-9


def test_offsets_are_subtracted_from_solutions(chain):
    """ゼロオフセットを持つチェーンでも FK と整合する解を返すことをテストします。"""
    offset_chain = chain.with_offsets(np.radians([0.477, -0.192, 0.139, 0.099, 0.392, -0.114, 0.936]))
    q0 = np.array([0.4, 0.7, -0.3, 1.2, 0.5, -0.8, 0.2])
    target = forward_kinematics(offset_chain, q0)
    result = solve_ik(offset_chain, IKRequest(target, (arm_angle(offset_chain, q0),)))
    assert contains(result.solutions, q0)


def test_unreachable_target(chain):
    """手首中心が d3 + d5 より遠い目標がエラーになることをテストします。"""
    target = Pose(np.eye(3), np.array([1500.0, 0.0, 340.0]))
    with pytest.raises(UnreachableTargetError):
        solve_ik(chain, IKRequest(target, (0.0,)))


def test_elbow_singular_target_has_one_elbow_branch(chain):
    """肘が伸び切った目標では (肩, 手首) の組ごとに肘の分岐が 1 つだけになることをテストします。"""
    q0 = np.array([0.3, 0.6, 0.2, 0.0, 0.4, 0.7, 0.1])
    target = forward_kinematics(chain, q0)
    result = solve_ik(chain, IKRequest(target, (arm_angle(chain, q0),)))
    assert contains(result.solutions, q0)
    pairs = [(shoulder, wrist) for shoulder, _, wrist in result.branch_labels]
    assert len(pairs) == len(set(pairs))
    assert all(elbow == "+" for _, elbow, _ in result.branch_labels)
    assert all(q[3] == 0.0 for q in result.solutions)


def test_all_eight_branches_without_limits(chain):
    """可動範囲を ±π にすると 1 つのアーム角で 8 つの分岐がすべて得られることをテストします。"""
    wide = chain.with_limits(np.tile([-math.pi, math.pi], (chain.k, 1)))
    q0 = np.array([0.3, 0.8, 0.4, 1.0, 0.5, 0.9, 0.2])
    target = forward_kinematics(wide, q0)
    result = solve_ik(wide, IKRequest(target, (arm_angle(wide, q0),)))
    assert len(result) == 8
    assert len(set(result.branch_labels)) == 8
    assert result.diagnostics.out_of_limits == 0


def test_solutions_are_distinct_and_within_limits(chain):
    """解が可動範囲内で、互いに 1e-9 rad 以上離れていることをテストします。"""
    q0 = np.array([-0.5, 0.9, 0.6, -1.3, 0.2, 1.1, -0.6])
    target = forward_kinematics(chain, q0)
    angles = default_arm_angles(8) + (arm_angle(chain, q0),)
    result = solve_ik(chain, IKRequest(target, angles))
    assert len(result) > 0
    for i, a in enumerate(result.solutions):
        assert chain.within_limits(a)
        for b in result.solutions[i + 1 :]:
            assert np.max(np.abs(a - b)) >= 1e-9


def test_adding_arm_angles_never_removes_solutions(chain):
    """アーム角を追加しても既存の解が失われないことをテストします。"""
    q0 = np.array([0.2, -0.7, 0.5, 1.4, -0.3, 0.6, 0.9])
    target = forward_kinematics(chain, q0)
    fewer = solve_ik(chain, IKRequest(target, (0.0,)))
    more = solve_ik(chain, IKRequest(target, (0.0, math.pi / 3, -math.pi / 3)))
    for q in fewer.solutions:
        assert contains(more.solutions, q, 1e-9)


def test_default_arm_angles():
    """既定のアーム角が (−π, π] を等分することをテストします。"""
    assert default_arm_angles(4) == pytest.approx((-math.pi / 2, 0.0, math.pi / 2, math.pi))
    with pytest.raises(IKError):
        default_arm_angles(0)


def test_request_validation(chain):
    """空のアーム角や範囲外のアーム角が拒否されることをテストします。"""
    target = forward_kinematics(chain, np.full(7, 0.3))
    with pytest.raises(IKError):
        IKRequest(target, ())
    with pytest.raises(IKError):
        IKRequest(target, (-math.pi,))


def test_unsupported_topology(chain):
    """S-R-S 構成でないチェーンがエラーになることをテストします。"""
    six = DHChain(
        joints=chain.joints[:6],
        joint_limits=chain.joint_limits[:6],
        tool_points={"flange": [0.0, 0.0, 0.0]},
    )
    with pytest.raises(UnsupportedTopologyError):
        reach(six)
    bent = DHChain(
        joints=(DHJoint(a=10.0, alpha=chain.joints[0].alpha, d=340.0),) + chain.joints[1:],
        joint_limits=chain.joint_limits,
        tool_points={"flange": [0.0, 0.0, 0.0]},
    )
    with pytest.raises(UnsupportedTopologyError):
        solve_ik(bent, IKRequest(forward_kinematics(chain, np.full(7, 0.3)), (0.0,)))


def test_enumerate_empty_targets(chain):
    """目標が空なら空のリストを返すことをテストします。"""
    assert enumerate_configurations(chain, [], default_arm_angles()) == []


def test_enumerate_skips_unreachable_pose(chain):
    """到達不能な姿勢は飛ばして診断情報に記録し、一括処理を続けることをテストします。"""
    reachable = forward_kinematics(chain, np.array([0.3, 0.8, 0.4, 1.0, 0.5, 0.9, 0.2]))
    unreachable = Pose(np.eye(3), np.array([1500.0, 0.0, 340.0]))
    records, diagnostics = enumerate_configurations_with_diagnostics(
        chain, [unreachable, reachable], default_arm_angles()
    )
    assert [index for index, _ in diagnostics.skipped_poses] == [0]
    assert records
    assert all(index == 1 for index, _ in records)


def test_enumerate_sampled_poses(chain):
    """LHS で生成した姿勢の構成がすべて FK で検算できることをテストします。"""
    pose_set = generate_pose_set(SamplerConfig(n_keep=36), chain)
    arm_angles = default_arm_angles()
    records = enumerate_configurations(chain, pose_set.poses, arm_angles)
    n_poses = len(pose_set.poses)
    assert n_poses <= len(records) <= 8 * len(arm_angles) * n_poses
    indices = [index for index, _ in records]
    assert indices == sorted(indices)
    for index, q in records:
        pose = forward_kinematics(chain, q)
        assert np.linalg.norm(pose.translation - pose_set.poses[index].translation) < 1e-6


def test_thin_configurations_keeps_evenly_spaced_records():
    """姿勢ごとに上限まで等間隔に間引き、最初と最後の構成と順序を保つことをテストします。"""
    records = [(0, np.full(7, float(i))) for i in range(9)] + [(1, np.full(7, 10.0)), (1, np.full(7, 11.0))]
    thinned = thin_configurations(records, 3)
    assert [index for index, _ in thinned] == [0, 0, 0, 1, 1]
    assert [q[0] for q in thinned] == [0.0, 4.0, 8.0, 10.0, 11.0]
    kept = thin_configurations(records, 20)
    assert len(kept) == len(records)
    assert all(a is b for a, b in zip(kept, records, strict=True))
    assert thin_configurations([], 3) == []


def test_thin_configurations_single_record_per_pose():
    """上限が 1 なら各姿勢の最初の構成だけが残ることをテストします。"""
    records = [(0, np.zeros(7)), (0, np.ones(7)), (2, np.full(7, 2.0))]
    thinned = thin_configurations(records, 1)
    assert [(index, q[0]) for index, q in thinned] == [(0, 0.0), (2, 2.0)]
    with pytest.raises(IKError):
        thin_configurations(records, 0)


def test_thinned_sampled_poses_stay_under_cap(chain):
    """既定の上限で間引いた構成の数が姿勢ごとの上限を超えないことをテストします。"""
    config = SamplerConfig()
    pose_set = generate_pose_set(config, chain)
    records = enumerate_configurations(chain, pose_set.poses, default_arm_angles(config.arm_angle_count))
    thinned = thin_configurations(records, config.max_configs_per_pose)
    counts = np.bincount([index for index, _ in thinned], minlength=len(pose_set.poses))
    assert counts.max() <= config.max_configs_per_pose
    assert len(thinned) <= config.max_configs_per_pose * len(pose_set.poses)
    assert {index for index, _ in thinned} == {index for index, _ in records}
