"""逆運動学の要求と解集合の型を定義するモジュールです。"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..exceptions import IKError
from .kinematics import JointConfig, Pose

BranchLabel = tuple[str, str, str]


@dataclass(frozen=True, eq=False)
class IKRequest:
    """
    逆運動学の要求です。

    Parameters
    ----------
    target : Pose
        ロボット基準座標系で表したフランジの目標姿勢です。
    arm_angles : tuple[float, ...]
        冗長自由度を解くアーム角 (rad) です。空でなく、各値は (−π, π] に入ります。
    """

    target: Pose
    arm_angles: tuple[float, ...]

    def __post_init__(self) -> None:
        angles = tuple(float(psi) for psi in self.arm_angles)
        if not angles:
            raise IKError("At least one arm angle is required")
        for psi in angles:
            if not -math.pi < psi <= math.pi:
                raise IKError(f"Arm angle {psi} outside (-pi, pi]")
        object.__setattr__(self, "arm_angles", angles)


@dataclass
class IKDiagnostics:
    """
    捨てた分岐の内訳です。

    Attributes
    ----------
    out_of_limits : int
        可動範囲外で捨てた分岐の数です。
    singular : int
        特異で自由な関節を 0 に固定して解いた分岐の数です。
    duplicate : int
        既存の解と重複して捨てた分岐の数です。
    round_trip_failed : int
        FK による検算に失敗して捨てた分岐の数です。
    """

    out_of_limits: int = 0
    singular: int = 0
    duplicate: int = 0
    round_trip_failed: int = 0

    def merge(self, other: IKDiagnostics) -> None:
        self.out_of_limits += other.out_of_limits
        self.singular += other.singular
        self.duplicate += other.duplicate
        self.round_trip_failed += other.round_trip_failed

    def as_dict(self) -> dict[str, int]:
        return {
            "out_of_limits": self.out_of_limits,
            "singular": self.singular,
            "duplicate": self.duplicate,
            "round_trip_failed": self.round_trip_failed,
        }


@dataclass
class IKSolutionSet:
    """
    1 つの目標姿勢に対するすべての離散解です。

    Notes
    -----
    すべての解は可動範囲内で、どの 2 つも関節ごとの差の最大値が 1e-9 rad 以上です。
    """

    solutions: list[JointConfig] = field(default_factory=list)
    branch_labels: list[BranchLabel] = field(default_factory=list)
    arm_angles: list[float] = field(default_factory=list)
    diagnostics: IKDiagnostics = field(default_factory=IKDiagnostics)

    def __len__(self) -> int:
        return len(self.solutions)


@dataclass
class EnumerationDiagnostics:
    """構成の一括列挙で飛ばした姿勢と分岐の集計です。"""

    skipped_poses: list[tuple[int, str]] = field(default_factory=list)
    branches: IKDiagnostics = field(default_factory=IKDiagnostics)
