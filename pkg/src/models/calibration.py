"""校正のドメイン型 (データセット、パラメーター、トレース、結果、MCMC 設定) を定義するモジュールです。

サンプリングでは、パラメーターを固有の単位で並べたベクトル
``[x, y, z, alpha, beta, gamma, dtheta1..dthetak, sigma]`` (mm, deg, deg, mm) として扱います。
"""

from __future__ import annotations

import math
from collections.abc import Iterator
from dataclasses import dataclass, field
from typing import NamedTuple, TypeAlias

import numpy as np
from numpy.typing import ArrayLike, NDArray

from ..config import mcmc_defaults, profile_config
from ..exceptions import DimensionMismatchError, EmptyDatasetError, InvalidParameterError, SamplerConfigError
from .kinematics import FloatArray, JointConfig

REGISTRATION_PARAMETER_NAMES: tuple[str, ...] = ("x", "y", "z", "alpha", "beta", "gamma")
IntArray: TypeAlias = NDArray[np.int64]
INIT_MODES: tuple[str, ...] = ("zero", "least_squares")
PRECONDITIONERS: tuple[str, ...] = ("identity", "laplace")


def parameter_names(k: int) -> tuple[str, ...]:
    """k 関節のサンプリングベクトルの各成分の名前を返します。"""
    return REGISTRATION_PARAMETER_NAMES + tuple(f"dtheta{i + 1}" for i in range(k)) + ("sigma",)


def _readonly(values: ArrayLike) -> FloatArray:
    array = np.array(values, dtype=np.float64)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class RegistrationCorrection:
    """
    3 点位置合わせに左から掛ける 6 自由度の補正 T*(Θ₁) です。

    Parameters
    ----------
    x, y, z : float
        並進 (mm) です。
    alpha, beta, gamma : float
        ZYX オイラー角 (rad) です。α が Z、β が Y、γ が X 軸まわりの角度です。
    """

    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    alpha: float = 0.0
    beta: float = 0.0
    gamma: float = 0.0

    def __post_init__(self) -> None:
        if not all(math.isfinite(v) for v in self.as_tuple()):
            raise InvalidParameterError(f"Registration correction must be finite: {self.as_tuple()}")

    def as_tuple(self) -> tuple[float, float, float, float, float, float]:
        return (self.x, self.y, self.z, self.alpha, self.beta, self.gamma)


class DatasetRecord(NamedTuple):
    """データセットの 1 レコードです。"""

    q: JointConfig
    p_ref: FloatArray
    pose_index: int


@dataclass(frozen=True, eq=False)
class CalibrationDataset:
    """
    関節構成と参照センサーの計測点の組です。

    Parameters
    ----------
    configs : ArrayLike
        形状 (n, k) の関節構成 (rad) です。
    points : ArrayLike
        形状 (n, 3) の参照座標系 N での計測点 (mm) です。
    pose_indices : ArrayLike
        各レコードを生成した姿勢の番号です。
    marker_name : str
        センサーが追跡したツール点の名前です。
    chain_name : str
        構成を生成したチェーンの名前です。
    reference_frame : str
        参照座標系のラベルです。
    robot_frame : str
        ロボット基準座標系のラベルです。

    Raises
    ------
    EmptyDatasetError
        レコードが 1 つもない場合に発生します。
    DimensionMismatchError
        配列の形状が一致しない場合に発生します。
    """

    configs: FloatArray
    points: FloatArray
    pose_indices: IntArray
    marker_name: str
    chain_name: str = ""
    reference_frame: str = "N"
    robot_frame: str = "R"

    def __post_init__(self) -> None:
        configs = _readonly(self.configs)
        points = _readonly(self.points)
        indices = np.array(self.pose_indices, dtype=np.int64)
        indices.setflags(write=False)
        if configs.size == 0 or configs.ndim != 2:
            raise EmptyDatasetError("Calibration dataset has no records")
        n = configs.shape[0]
        if points.shape != (n, 3):
            raise DimensionMismatchError("reference points", 3 * n, int(points.size))
        if indices.shape != (n,):
            raise DimensionMismatchError("pose indices", n, int(indices.size))
        if not np.all(np.isfinite(points)):
            raise InvalidParameterError("Reference points must be finite")
        object.__setattr__(self, "configs", configs)
        object.__setattr__(self, "points", points)
        object.__setattr__(self, "pose_indices", indices)

    def __len__(self) -> int:
        return int(self.configs.shape[0])

    @property
    def k(self) -> int:
        return int(self.configs.shape[1])

    @property
    def records(self) -> Iterator[DatasetRecord]:
        for q, p, index in zip(self.configs, self.points, self.pose_indices, strict=True):
            yield DatasetRecord(q, p, int(index))

    def subset(self, rows: ArrayLike) -> CalibrationDataset:
        """指定した行だけを持つデータセットを返します。"""
        selected = np.asarray(rows, dtype=np.int64)
        return CalibrationDataset(
            configs=self.configs[selected],
            points=self.points[selected],
            pose_indices=self.pose_indices[selected],
            marker_name=self.marker_name,
            chain_name=self.chain_name,
            reference_frame=self.reference_frame,
            robot_frame=self.robot_frame,
        )


@dataclass(frozen=True, eq=False)
class ParameterVector:
    """
    MCMC の状態 Θ = {Θ₁, Θ₂} と雑音の大きさ σ です。

    Parameters
    ----------
    theta1 : RegistrationCorrection
        位置合わせの補正です。
    theta2 : ArrayLike
        k 個のゼロオフセット (rad) です。
    sigma : float
        等方ガウス誤差モデルの標準偏差 (mm) です。

    Raises
    ------
    InvalidParameterError
        σ ≤ 0 の場合に発生します。
    """

    theta1: RegistrationCorrection
    theta2: FloatArray
    sigma: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.sigma) and self.sigma > 0.0):
            raise InvalidParameterError(f"sigma must be positive, got {self.sigma}")
        object.__setattr__(self, "theta2", _readonly(self.theta2))

    @property
    def k(self) -> int:
        return int(self.theta2.shape[0])

    @classmethod
    def initial(cls, k: int, sigma: float = mcmc_defaults.INITIAL_SIGMA_MM) -> ParameterVector:
        """Θ = 0、σ = 初期値の状態を返します。"""
        return cls(RegistrationCorrection(), np.zeros(k), sigma)

    def to_sampling_vector(self) -> FloatArray:
        """固有の単位 (mm, deg) のサンプリングベクトルに変換します。"""
        t = self.theta1
        return np.concatenate(
            [
                [t.x, t.y, t.z],
                np.degrees([t.alpha, t.beta, t.gamma]),
                np.degrees(self.theta2),
                [self.sigma],
            ]
        )

    @classmethod
    def from_sampling_vector(cls, vector: ArrayLike) -> ParameterVector:
        """
        サンプリングベクトルからパラメーターを作ります。

        Raises
        ------
        InvalidParameterError
            σ ≤ 0 の場合に発生します。
        """
        v = np.asarray(vector, dtype=np.float64)
        if v.ndim != 1 or v.shape[0] < 8:
            raise DimensionMismatchError("parameter vector", 8, int(v.size))
        alpha, beta, gamma = np.radians(v[3:6])
        correction = RegistrationCorrection(
            float(v[0]), float(v[1]), float(v[2]), float(alpha), float(beta), float(gamma)
        )
        return cls(correction, np.radians(v[6:-1]), float(v[-1]))


@dataclass(frozen=True)
class MCMCConfig:
    """
    Metropolis サンプラーの設定です。

    Parameters
    ----------
    n_steps : int
        ステップ数です。
    burn_in : int
        要約で捨てる先頭のステップ数です。
    proposal_width : float
        一様提案 U(−w, w) の半幅です。前処理を使う場合は白色化座標での半幅です。
    seed : int
        乱数シードです。
    init : str
        初期値の決め方 ("zero" または "least_squares") です。
    preconditioner : str
        提案の前処理 ("identity" または "laplace") です。
    fixed_parameters : tuple[str, ...]
        提案幅 0 で初期値に固定するパラメーターの名前です。
    initial_sigma : float
        "zero" 初期化での σ の初期値 (mm) です。

    Raises
    ------
    SamplerConfigError
        n_steps > burn_in ≥ 0 を満たさない場合や、未知のモードが指定された場合に発生します。
    """

    n_steps: int = profile_config.PAPER_N_STEPS
    burn_in: int = int(profile_config.PAPER_N_STEPS * profile_config.PAPER_BURN_IN_FRACTION)
    proposal_width: float = mcmc_defaults.PROPOSAL_WIDTH
    seed: int = mcmc_defaults.SEED
    init: str = "zero"
    preconditioner: str = "identity"
    fixed_parameters: tuple[str, ...] = ()
    initial_sigma: float = mcmc_defaults.INITIAL_SIGMA_MM

    def __post_init__(self) -> None:
        if not (self.n_steps > self.burn_in >= 0):
            raise SamplerConfigError(
                f"Require n_steps > burn_in >= 0, got n_steps={self.n_steps}, burn_in={self.burn_in}"
            )
        if not (math.isfinite(self.proposal_width) and self.proposal_width > 0.0):
            raise SamplerConfigError(f"proposal_width must be positive, got {self.proposal_width}")
        if self.init not in INIT_MODES:
            raise SamplerConfigError(f"Unknown init mode '{self.init}' (expected one of {', '.join(INIT_MODES)})")
        if self.preconditioner not in PRECONDITIONERS:
            raise SamplerConfigError(
                f"Unknown preconditioner '{self.preconditioner}' (expected one of {', '.join(PRECONDITIONERS)})"
            )
        if not self.initial_sigma > 0.0:
            raise SamplerConfigError(f"initial_sigma must be positive, got {self.initial_sigma}")
        object.__setattr__(self, "fixed_parameters", tuple(self.fixed_parameters))

    @classmethod
    def for_profile(cls, profile: str, seed: int = mcmc_defaults.SEED) -> MCMCConfig:
        """
        実行プロファイルの既定設定を返します。

        Parameters
        ----------
        profile : str
            "ci" または "paper" です。
        seed : int
            乱数シードです。

        Returns
        -------
        MCMCConfig
            プロファイルの設定です。
        """
        if profile == "ci":
            n_steps = profile_config.CI_N_STEPS
            return cls(
                n_steps=n_steps,
                burn_in=int(n_steps * profile_config.CI_BURN_IN_FRACTION),
                proposal_width=mcmc_defaults.WHITENED_PROPOSAL_WIDTH,
                seed=seed,
                init="least_squares",
                preconditioner="laplace",
                fixed_parameters=("dtheta1",),
            )
        if profile == "paper":
            return cls(seed=seed)
        raise SamplerConfigError(f"Unknown profile '{profile}' (expected one of {', '.join(profile_config.PROFILES)})")


@dataclass(frozen=True, eq=False)
class PosteriorTrace:
    """
    Metropolis 連鎖の全ステップの記録です。

    Attributes
    ----------
    samples : FloatArray
        形状 (n_steps, m) のサンプリングベクトルです。行 i はステップ i の後の状態です。
    accepted : NDArray[np.bool_]
        各ステップで提案を受理したかどうかです。
    log_posterior : FloatArray
        各ステップの後の状態の対数事後確率です。
    parameter_names : tuple[str, ...]
        サンプリングベクトルの成分名です。
    seed, proposal_width, n_steps, burn_in
        実行時の設定です。
    """

    samples: FloatArray
    accepted: np.ndarray
    log_posterior: FloatArray
    parameter_names: tuple[str, ...]
    seed: int
    proposal_width: float
    n_steps: int
    burn_in: int
    fixed_parameters: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.samples.shape[0] != self.n_steps:
            raise DimensionMismatchError("trace samples", self.n_steps, int(self.samples.shape[0]))
        if self.samples.shape[1] != len(self.parameter_names):
            raise DimensionMismatchError("trace columns", len(self.parameter_names), int(self.samples.shape[1]))

    @property
    def acceptance_rate(self) -> float:
        return float(np.mean(self.accepted))


@dataclass(frozen=True, eq=False)
class CalibrationResult:
    """
    burn-in 後のサンプルから求めた推定値です。

    Attributes
    ----------
    mle : ParameterVector
        burn-in 後のサンプル平均です。
    mean_vector : FloatArray
        サンプル平均のサンプリングベクトル (mm, deg) です。
    std : FloatArray
        成分ごとの標準偏差 (mm, deg) です。
    post_burn_in_samples : FloatArray
        burn-in 後のサンプルです。
    parameter_names : tuple[str, ...]
        成分名です。
    acceptance_rate : float
        連鎖全体の受理率です。
    burn_in : int
        捨てたステップ数です。
    """

    mle: ParameterVector
    mean_vector: FloatArray
    std: FloatArray
    post_burn_in_samples: FloatArray
    parameter_names: tuple[str, ...]
    acceptance_rate: float = float("nan")
    burn_in: int = 0
    fixed_parameters: tuple[str, ...] = field(default_factory=tuple)

    @property
    def k(self) -> int:
        return self.mle.k

    @property
    def offsets_deg(self) -> FloatArray:
        """ゼロオフセットの推定値 (deg) です。"""
        return self.mean_vector[6:-1]

    @property
    def offsets_std_deg(self) -> FloatArray:
        return self.std[6:-1]

    def offset_samples_rad(self) -> FloatArray:
        """burn-in 後のゼロオフセットのサンプル (rad) を形状 (m, k) で返します。"""
        return np.radians(self.post_burn_in_samples[:, 6:-1])

    def correction_samples(self) -> list[RegistrationCorrection]:
        """burn-in 後の位置合わせ補正のサンプルを返します。"""
        rows = self.post_burn_in_samples
        angles = np.radians(rows[:, 3:6])
        return [
            RegistrationCorrection(float(r[0]), float(r[1]), float(r[2]), float(a[0]), float(a[1]), float(a[2]))
            for r, a in zip(rows, angles, strict=True)
        ]
