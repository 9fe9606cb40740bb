"""remaster の例外クラスを定義するモジュールです。

このモジュールは、ツールキット固有の例外クラスを定義します。
各例外クラスは特定のエラー状況に対応し、明確なエラーメッセージを提供します。
"""


class RemasterError(Exception):
    """
    ツールキットに関連するエラーの基底クラスです。

    Parameters
    ----------
    message : str
        エラーメッセージです。

    Notes
    -----
    CLI はこのクラスを入力や設定の誤りとして扱い、終了コード 2 を返します。
    具体的なエラーは、このクラスを継承した個別の例外クラスで表現されます。
    """

    def __init__(self, message: str) -> None:
        self.message = message
        super().__init__(self.message)


class KinematicsError(RemasterError):
    """運動学計算に関連するエラーの基底クラスです。"""


class DimensionMismatchError(KinematicsError):
    """
    ベクトルや表の次元が一致しない場合のエラーです。

    Parameters
    ----------
    what : str
        対象の説明です。
    expected : int
        期待される長さです。
    actual : int
        実際の長さです。
    """

    def __init__(self, what: str, expected: int, actual: int) -> None:
        self.expected = expected
        self.actual = actual
        super().__init__(f"Dimension mismatch for {what}: expected {expected}, got {actual}")


class JointLimitError(KinematicsError):
    """
    関節角が可動範囲外の場合のエラーです。

    Parameters
    ----------
    joint_index : int
        関節番号 (0 始まり) です。
    value : float
        関節角 (rad) です。
    lower : float
        下限 (rad) です。
    upper : float
        上限 (rad) です。
    """

    def __init__(self, joint_index: int, value: float, lower: float, upper: float) -> None:
        self.joint_index = joint_index
        self.value = value
        super().__init__(
            f"Joint {joint_index + 1} angle {value:.6f} rad outside limits [{lower:.6f}, {upper:.6f}]"
        )


class UnknownToolPointError(KinematicsError):
    """
    指定された名前のツール点がチェーンに存在しない場合のエラーです。

    Parameters
    ----------
    point_name : str
        要求されたツール点の名前です。
    available : list[str]
        定義済みのツール点の名前です。
    """

    def __init__(self, point_name: str, available: list[str]) -> None:
        self.point_name = point_name
        super().__init__(f"Unknown tool point '{point_name}' (available: {', '.join(sorted(available))})")


class RotationError(KinematicsError):
    """
    回転行列が正規直交でない場合のエラーです。

    Parameters
    ----------
    message : str
        エラーの詳細メッセージです。
    """


class InvalidChainError(KinematicsError):
    """D-H チェーンの定義が不変条件を満たさない場合のエラーです。"""


class IKError(KinematicsError):
    """逆運動学に関連するエラーの基底クラスです。"""


class UnreachableTargetError(IKError):
    """
    目標姿勢に到達できない場合のエラーです。

    Parameters
    ----------
    distance : float
        肩から手首中心までの距離 (mm) です。
    reach : float
        上腕と前腕の長さの和 (mm) です。
    """

    def __init__(self, distance: float, reach: float) -> None:
        self.distance = distance
        self.reach = reach
        super().__init__(f"Target unreachable: wrist center at {distance:.6f} mm, reach {reach:.6f} mm")


class UnsupportedTopologyError(IKError):
    """
    解析的逆運動学が対応していないチェーン構成の場合のエラーです。

    Parameters
    ----------
    reason : str
        不一致の理由です。
    """

    def __init__(self, reason: str) -> None:
        super().__init__(f"Unsupported chain topology for S-R-S inverse kinematics: {reason}")


class DegeneratePoseError(RemasterError):
    """
    センサー方向の姿勢が構成できない場合のエラーです。

    Notes
    -----
    接近方向が基準 Z 軸と平行になる場合や、位置がセンサー原点と一致する場合に発生し、
    呼び出し側に再サンプリングを促します。
    """


class RegistrationError(RemasterError):
    """位置合わせに関連するエラーの基底クラスです。"""


class CollinearPointsError(RegistrationError):
    """
    3 点が同一直線上にある場合のエラーです。

    Parameters
    ----------
    area : float
        3 点が作る三角形の面積 (mm²) です。
    frame : str
        対象の座標系のラベルです。
    """

    def __init__(self, area: float, frame: str) -> None:
        self.area = area
        super().__init__(f"Registration points are collinear in frame {frame} (triangle area {area:.3e} mm^2)")


class CalibrationError(RemasterError):
    """校正 (事後分布とサンプリング) に関連するエラーの基底クラスです。"""


class InvalidParameterError(CalibrationError):
    """パラメーターベクトルが不正な場合 (σ ≤ 0 など) のエラーです。"""


class SamplerConfigError(CalibrationError):
    """サンプラーの設定が不正な場合のエラーです。"""


class EmptyDatasetError(CalibrationError):
    """データセットが空の場合のエラーです。"""


class MetricsError(RemasterError):
    """精度指標に関連するエラーの基底クラスです。"""


class EmptyMetricError(MetricsError):
    """
    指標を計算する値が一つもない場合のエラーです。

    Parameters
    ----------
    metric_kind : str
        指標の種類です。
    """

    def __init__(self, metric_kind: str) -> None:
        self.metric_kind = metric_kind
        super().__init__(f"No values available to compute the {metric_kind} metric")


class DatasetFormatError(RemasterError):
    """
    データセットやトレースのファイル形式が不正な場合のエラーです。

    Parameters
    ----------
    message : str
        エラーの詳細メッセージです。
    filepath : str | None
        対象ファイルのパスです。
    line_number : int | None
        問題のある行番号 (1 始まり) です。
    """

    def __init__(self, message: str, filepath: str | None = None, line_number: int | None = None) -> None:
        if line_number is not None:
            message = f"{message} (line {line_number})"
        if filepath:
            message = f"{message} (file: {filepath})"
        super().__init__(message)


class SettingsError(RemasterError):
    """
    設定ファイルの読み込みや保存に関連するエラーです。

    Parameters
    ----------
    message : str
        エラーの詳細メッセージです。
    filepath : str, optional
        設定ファイルのパスです。

    Notes
    -----
    このエラーは、シーン、チェーン、サンプラー設定の読み込み時や、
    必須キーの欠落、値の型の誤りがあった場合に発生します。
    """

    def __init__(self, message: str, filepath: str | None = None) -> None:
        if filepath:
            message = f"{message} (settings file: {filepath})"
        super().__init__(message)
