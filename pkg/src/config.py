"""remaster の設定定数を定義するモジュールです。

このモジュールは、ツールキット全体で使用される設定定数を定義します。
設定は論理的なグループごとにクラスとしてまとめられています。
角度は内部ではラジアン、入出力ではすべて度で扱い、長さは常にミリメートルです。
"""

import math
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Final


@dataclass(frozen=True)
class KinematicsConfig:
    """運動学に関連する設定定数です。

    Parameters
    ----------
    ROTATION_TOLERANCE: float
        回転行列の正規直交性 (RᵀR − I と det − 1) を判定する許容誤差です。
    GIMBAL_LOCK_TOLERANCE: float
        ZYX オイラー角の特異姿勢 (|θ| = π/2) を判定する許容誤差です。
    REFERENCE_CHAIN_NAME: str
        組み込みの 7 自由度 S-R-S 参照チェーンの名前です。
    REFERENCE_D_MM: tuple[float, ...]
        参照チェーンの各関節の d パラメーター (mm) です。
    REFERENCE_ALPHA_RAD: tuple[float, ...]
        参照チェーンの各関節の α パラメーター (rad) です。
    REFERENCE_LIMITS_DEG: tuple[float, ...]
        参照チェーンの関節可動範囲 (±deg) です。
    REFERENCE_TOOL_POINTS_MM: dict
        フランジ座標系でのマーカー位置 (mm) です。

    Notes
    -----
    参照チェーンは d1=340, d3=400, d5=400, d7=126 mm で α が ±π/2 で交互に並ぶ
    標準 (distal) D-H 表です。実機の D-H 表は公開されていないため、
    導出される期待値はすべてこの表に対して計算されます。

    """

    ROTATION_TOLERANCE: Final[float] = 1e-9
    GIMBAL_LOCK_TOLERANCE: Final[float] = 1e-9
    REFERENCE_CHAIN_NAME: Final[str] = "reference_srs"
    REFERENCE_D_MM: Final[tuple[float, ...]] = (340.0, 0.0, 400.0, 0.0, 400.0, 0.0, 126.0)
    REFERENCE_ALPHA_RAD: Final[tuple[float, ...]] = (
        -math.pi / 2,
        math.pi / 2,
        math.pi / 2,
        -math.pi / 2,
        -math.pi / 2,
        math.pi / 2,
        0.0,
    )
    REFERENCE_LIMITS_DEG: Final[tuple[float, ...]] = (170.0, 120.0, 170.0, 120.0, 170.0, 120.0, 175.0)
    # ツールプレート中心から 100 mm 離れた位置に SMR と SIR を反対側に取り付けます。
    REFERENCE_TOOL_POINTS_MM: Final[tuple[tuple[str, tuple[float, float, float]], ...]] = (
        ("flange", (0.0, 0.0, 0.0)),
        ("sir", (100.0, 0.0, 20.0)),
        ("smr", (-100.0, 0.0, 20.0)),
    )


@dataclass(frozen=True)
class IKConfig:
    """解析的逆運動学に関連する設定定数です。

    Parameters
    ----------
    SINGULAR_SINE_TOLERANCE: float
        中間の正弦値がこの値を下回る分岐を特異とみなします。
    ELBOW_REACH_TOLERANCE_MM: float
        手首中心距離が最大到達距離からこの範囲内なら肘を伸展 (q4 = 0) とみなします。
    DUPLICATE_TOLERANCE_RAD: float
        関節ごとの差がすべてこの値未満の解を重複とみなします。
    ROUND_TRIP_TRANSLATION_TOLERANCE_MM: float
        FK による検算で許容する並進誤差です。
    ROUND_TRIP_ROTATION_TOLERANCE: float
        FK による検算で許容する回転誤差 (フロベニウスノルム) です。
    DEFAULT_ARM_ANGLE_COUNT: int
        冗長自由度を解くアーム角の既定の分割数です。

    """

    SINGULAR_SINE_TOLERANCE: Final[float] = 1e-9
    ELBOW_REACH_TOLERANCE_MM: Final[float] = 1e-6
    DUPLICATE_TOLERANCE_RAD: Final[float] = 1e-9
    ROUND_TRIP_TRANSLATION_TOLERANCE_MM: Final[float] = 1e-6
    ROUND_TRIP_ROTATION_TOLERANCE: Final[float] = 1e-9
    DEFAULT_ARM_ANGLE_COUNT: Final[int] = 4


@dataclass(frozen=True)
class SamplerDefaults:
    """候補姿勢生成 (LHS) の既定値です。

    Parameters
    ----------
    N_POSES: int
        生成する候補姿勢の数です。
    N_KEEP_OPTIMIZATION: int
        最適化用に残す実行可能姿勢の数です。
    N_KEEP_VALIDATION: int
        検証用に残す実行可能姿勢の数です。
    R_RANGE_MM: tuple[float, float]
        XY 平面内の半径の範囲です。
    Z_RANGE_MM: tuple[float, float]
        高さの範囲です。
    SENSOR_ORIGIN_MM: tuple[float, float, float]
        ロボット基準座標系で表したセンサー原点です。
    MAX_RESAMPLE_ATTEMPTS: int
        退化した行を同じセルで再サンプリングする最大回数です。
    MAX_CONFIGS_PER_POSE: int
        1 つの姿勢から残す関節構成の最大数です。
    OPTIMIZATION_SEED: int
        最適化用姿勢の乱数シードです。
    VALIDATION_SEED: int
        検証用姿勢の乱数シードです。

    """

    N_POSES: Final[int] = 60
    N_KEEP_OPTIMIZATION: Final[int] = 36
    N_KEEP_VALIDATION: Final[int] = 32
    MAX_CONFIGS_PER_POSE: Final[int] = 5
    R_RANGE_MM: Final[tuple[float, float]] = (200.0, 500.0)
    Z_RANGE_MM: Final[tuple[float, float]] = (400.0, 800.0)
    THETA_Z_BASE_RANGE_RAD: Final[tuple[float, float]] = (0.0, 2.0 * math.pi)
    THETA_Z_TOOL_RANGE_RAD: Final[tuple[float, float]] = (0.0, 2.0 * math.pi)
    SENSOR_ORIGIN_MM: Final[tuple[float, float, float]] = (1800.0, 200.0, 600.0)
    MAX_RESAMPLE_ATTEMPTS: Final[int] = 10
    PARALLEL_TOLERANCE: Final[float] = 1e-9
    OPTIMIZATION_SEED: Final[int] = 20190601
    VALIDATION_SEED: Final[int] = 20190602


@dataclass(frozen=True)
class MCMCDefaults:
    """Metropolis サンプラーの既定値です。

    Parameters
    ----------
    PROPOSAL_WIDTH: float
        一様提案分布 U(−w, w) の半幅です (角度は度、長さと σ は mm)。
    INITIAL_SIGMA_MM: float
        σ の初期値です。
    WHITENED_PROPOSAL_WIDTH: float
        ラプラス前処理を使う場合の白色化座標での半幅です。
    SEED: int
        既定の乱数シードです。

    """

    PROPOSAL_WIDTH: Final[float] = 0.0125
    INITIAL_SIGMA_MM: Final[float] = 1.0
    WHITENED_PROPOSAL_WIDTH: Final[float] = 1.0
    SEED: Final[int] = 1750
    HISTOGRAM_BINS: Final[int] = 40


@dataclass(frozen=True)
class ProfileConfig:
    """実行プロファイル (ci / paper) ごとの MCMC 設定です。

    Notes
    -----
    ci プロファイルは短い連鎖で収束するよう最小二乗の初期値とラプラス前処理を使い、
    ベース関節のオフセットをゲージとして固定します。paper プロファイルはゼロ初期値、
    恒等前処理、幅 0.0125 の一様提案で 2×10⁵ ステップを実行します。

    """

    CI_N_STEPS: Final[int] = 20_000
    CI_BURN_IN_FRACTION: Final[float] = 0.75
    PAPER_N_STEPS: Final[int] = 200_000
    PAPER_BURN_IN_FRACTION: Final[float] = 0.875
    PROFILES: Final[tuple[str, ...]] = ("ci", "paper")


@dataclass(frozen=True)
class SceneDefaults:
    """合成シーン (シミュレーター) の既定値です。

    Parameters
    ----------
    TRUE_OFFSETS_DEG: tuple[float, ...]
        模擬実機に注入するゼロオフセット (deg) です。
    MOTION_CAPTURE_NOISE_MM: float
        モーションキャプチャーの等方ノイズ σ です。
    LASER_TRACKER_NOISE_MM: float
        レーザートラッカーの等方ノイズ σ です。
    REGISTRATION_NOISE_MM: float
        3 点位置合わせに使う点に加える追加ノイズです。

    """

    TRUE_OFFSETS_DEG: Final[tuple[float, ...]] = (0.477, -0.192, 0.139, 0.099, 0.392, -0.114, 0.936)
    MOTION_CAPTURE_NOISE_MM: Final[float] = 0.1
    LASER_TRACKER_NOISE_MM: Final[float] = 0.05
    REGISTRATION_NOISE_MM: Final[float] = 0.5
    MOTION_CAPTURE_ORIGIN_MM: Final[tuple[float, float, float]] = (1800.0, 200.0, 900.0)
    MOTION_CAPTURE_ROTATION_ZYX_DEG: Final[tuple[float, float, float]] = (165.0, 5.0, -3.0)
    LASER_TRACKER_ORIGIN_MM: Final[tuple[float, float, float]] = (1800.0, 200.0, 600.0)
    LASER_TRACKER_ROTATION_ZYX_DEG: Final[tuple[float, float, float]] = (170.0, -4.0, 2.0)
    SEED: Final[int] = 7


@dataclass(frozen=True)
class MetricsDefaults:
    """精度指標に関連する既定値です。

    Parameters
    ----------
    N_DRAWS: int
        理論精度で使う事後サンプルの数です。
    N_RANDOM_CONFIGS: int
        作業空間全体の評価に使うランダム関節構成の数です。
    INTERVAL_PERCENTILES: tuple[float, float]
        95 % 区間の下限と上限のパーセンタイルです。

    """

    N_DRAWS: Final[int] = 2000
    N_RANDOM_CONFIGS: Final[int] = 1000
    INTERVAL_PERCENTILES: Final[tuple[float, float]] = (2.5, 97.5)
    THEORETICAL_SEED: Final[int] = 2000
    RANDOM_CONFIG_SEED: Final[int] = 1000


@dataclass(frozen=True)
class FileConfig:
    """ファイル操作に関連する設定定数です。

    Parameters
    ----------
    APP_DATA_DIR: str
        ツールキットのデータディレクトリです。
    DATASET_FORMAT_VERSION: str
        データセットファイルのフォーマットバージョンです。

    Notes
    -----
    出力ファイル名はすべてここで定義され、run-all はこれらの名前で
    出力ディレクトリにファイルを書き出します。

    """

    APP_DATA_DIR: Final[str] = str(Path(os.getenv("REMASTER_HOME", str(Path.home() / ".remaster"))))
    DATASET_FORMAT_VERSION: Final[str] = "1"
    TRACE_FORMAT_VERSION: Final[str] = "1"
    POSES_OPTIMIZATION_FILE: Final[str] = "poses_optimization.txt"
    POSES_VALIDATION_FILE: Final[str] = "poses_validation.txt"
    CONFIGS_OPTIMIZATION_FILE: Final[str] = "configs_optimization.txt"
    CONFIGS_VALIDATION_FILE: Final[str] = "configs_validation.txt"
    DATASET_OPTIMIZATION_FILE: Final[str] = "dataset_optimization.txt"
    DATASET_VALIDATION_FILE: Final[str] = "dataset_validation.txt"
    TRACE_FILE: Final[str] = "trace.txt"
    HISTOGRAM_FILE: Final[str] = "histograms.txt"
    CALIBRATION_REPORT_FILE: Final[str] = "calibration.txt"
    CALIBRATION_JSON_FILE: Final[str] = "calibration.json"
    METRICS_REPORT_FILE: Final[str] = "metrics.txt"
    METRICS_JSON_FILE: Final[str] = "metrics.json"
    EXPERIMENT_REPORT_FILE: Final[str] = "experiment.txt"
    EXPERIMENT_JSON_FILE: Final[str] = "experiment.json"
    ANGLE_DECIMALS: Final[int] = 12
    LENGTH_DECIMALS: Final[int] = 9
    REPORT_DECIMALS: Final[int] = 3


@dataclass(frozen=True)
class LoggingConfig:
    """ロギングに関連する設定定数です。"""

    LOG_DIRECTORY: Final[str] = str(Path(FileConfig.APP_DATA_DIR) / "logs")
    LOG_FILE: Final[str] = str(Path(LOG_DIRECTORY) / "remaster.log")


# 各設定クラスのインスタンスを作成します。
kinematics_config = KinematicsConfig()
ik_config = IKConfig()
sampler_defaults = SamplerDefaults()
mcmc_defaults = MCMCDefaults()
profile_config = ProfileConfig()
scene_defaults = SceneDefaults()
metrics_defaults = MetricsDefaults()
file_config = FileConfig()
logging_config = LoggingConfig()


@dataclass(frozen=True)
class AppConfig:
    """アプリケーション全般の設定定数です。

    Parameters
    ----------
    APP_NAME: str
        アプリケーション名です。
    EXIT_OK: int
        正常終了コードです。
    EXIT_UNEXPECTED: int
        予期しない例外による終了コードです。
    EXIT_DOMAIN_ERROR: int
        入力や設定の誤りによる終了コードです。

    """

    APP_NAME: Final[str] = "remaster"
    EXIT_OK: Final[int] = 0
    EXIT_UNEXPECTED: Final[int] = 1
    EXIT_DOMAIN_ERROR: Final[int] = 2


# アプリケーション設定のインスタンスを作成します。
app_config = AppConfig()

# エラーメッセージの定数です。
ERROR_FILE_NOT_FOUND: Final[str] = "File not found: {filepath}"
ERROR_LOAD_FAILED: Final[str] = "Failed to load file: {filepath}"
ERROR_SAVE_FAILED: Final[str] = "Failed to save file: {filepath}"
