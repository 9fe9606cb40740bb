"""データセット、姿勢、関節構成、トレース、ヒストグラムのテキストファイルを読み書きするモジュールです。

数値は固定小数点で書き出すので、読み込んで再び書き出すとバイト単位で同じファイルになります。
"""

from __future__ import annotations

import io
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np

from ..config import file_config, mcmc_defaults
from ..exceptions import DatasetFormatError
from ..logger import get_logger
from ..models.calibration import CalibrationDataset, CalibrationResult, PosteriorTrace
from ..models.kinematics import JointConfig
from ..models.sampling import PoseSet
from ..utils import ensure_directory
from .kinematics import rotation_to_euler_zyx

logger = get_logger(__name__)

_ANGLE = f".{file_config.ANGLE_DECIMALS}f"
_LENGTH = f".{file_config.LENGTH_DECIMALS}f"


def _write_text(filepath: str | Path, text: str) -> Path:
    path = Path(filepath)
    ensure_directory(path.parent)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    return path


def _read_lines(filepath: str | Path) -> list[str]:
    try:
        with open(filepath, encoding="utf-8") as f:
            return f.read().splitlines()
    except FileNotFoundError as e:
        raise DatasetFormatError("File not found", str(filepath)) from e
    except (OSError, UnicodeDecodeError) as e:
        raise DatasetFormatError(f"Cannot read file: {e}", str(filepath)) from e


def _parse_header(lines: list[str], filepath: str | Path) -> tuple[dict[str, str], list[tuple[int, str]]]:
    """'# key: value' 形式のヘッダーとデータ行 (行番号付き) に分けます。"""
    header: dict[str, str] = {}
    body: list[tuple[int, str]] = []
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            key, sep, value = stripped.lstrip("#").partition(":")
            if sep:
                header[key.strip()] = value.strip()
            continue
        body.append((number, stripped))
    if header.get("format_version") is None:
        raise DatasetFormatError("Missing format_version header", str(filepath))
    return header, body


def _check_version(header: dict[str, str], expected: str, filepath: str | Path) -> None:
    version = header["format_version"]
    if version != expected:
        raise DatasetFormatError(f"Unsupported format version '{version}' (expected '{expected}')", str(filepath))


def _parse_floats(fields: list[str], filepath: str | Path, number: int) -> list[float]:
    try:
        values = [float(v) for v in fields]
    except ValueError as e:
        raise DatasetFormatError(f"Invalid number: {e}", str(filepath), number) from e
    if not all(math.isfinite(v) for v in values):
        raise DatasetFormatError("Non-finite value", str(filepath), number)
    return values


def _parse_index(field: str, filepath: str | Path, number: int) -> int:
    try:
        return int(field)
    except ValueError as e:
        raise DatasetFormatError(f"Invalid pose index '{field}'", str(filepath), number) from e


def format_dataset(dataset: CalibrationDataset) -> str:
    """データセットをファイルの内容となる文字列に変換します。"""
    k = dataset.k
    joint_columns = " ".join(f"q{i + 1}" for i in range(k))
    lines = [
        "# remaster calibration dataset",
        f"# format_version: {file_config.DATASET_FORMAT_VERSION}",
        f"# chain: {dataset.chain_name}",
        f"# marker: {dataset.marker_name}",
        f"# frames: {dataset.reference_frame} {dataset.robot_frame}",
        f"# joints: {k}",
        f"# columns: pose_index {joint_columns} x y z",
        "# units: rad mm",
    ]
    for record in dataset.records:
        q = " ".join(format(v, _ANGLE) for v in record.q)
        p = " ".join(format(v, _LENGTH) for v in record.p_ref)
        lines.append(f"{record.pose_index} {q} {p}")
    return "\n".join(lines) + "\n"


def write_dataset(dataset: CalibrationDataset, filepath: str | Path) -> Path:
    """
    データセットをテキストファイルに書き出します。

    Parameters
    ----------
    dataset : CalibrationDataset
        書き出すデータセットです。
    filepath : str | Path
        出力先のパスです。

    Returns
    -------
    Path
        書き出したファイルのパスです。
    """
    path = _write_text(filepath, format_dataset(dataset))
    logger.info(f"Wrote dataset with {len(dataset)} records to {path}")
    return path


def read_dataset(filepath: str | Path) -> CalibrationDataset:
    """
    テキストファイルからデータセットを読み込みます。

    Parameters
    ----------
    filepath : str | Path
        データセットファイルのパスです。

    Returns
    -------
    CalibrationDataset
        読み込んだデータセットです。

    Raises
    ------
    DatasetFormatError
        ヘッダーの欠落、列数の不一致、数値の解析失敗があった場合に発生します。
    """
    header, body = _parse_header(_read_lines(filepath), filepath)
    _check_version(header, file_config.DATASET_FORMAT_VERSION, filepath)
    for key in ("chain", "marker", "frames", "joints"):
        if key not in header:
            raise DatasetFormatError(f"Missing '{key}' header", str(filepath))
    try:
        k = int(header["joints"])
    except ValueError as e:
        raise DatasetFormatError(f"Invalid joints header '{header['joints']}'", str(filepath)) from e
    frames = header["frames"].split()
    if len(frames) != 2:
        raise DatasetFormatError("frames header must name two frames", str(filepath))
    if not body:
        raise DatasetFormatError("Dataset has no records", str(filepath))

    indices: list[int] = []
    configs: list[list[float]] = []
    points: list[list[float]] = []
    for number, line in body:
        fields = line.split()
        if len(fields) != 1 + k + 3:
            raise DatasetFormatError(f"Expected {1 + k + 3} columns, got {len(fields)}", str(filepath), number)
        indices.append(_parse_index(fields[0], filepath, number))
        values = _parse_floats(fields[1:], filepath, number)
        configs.append(values[:k])
        points.append(values[k:])
    logger.info(f"Read dataset with {len(body)} records from {filepath}")
    return CalibrationDataset(
        configs=np.array(configs),
        points=np.array(points),
        pose_indices=np.array(indices),
        marker_name=header["marker"],
        chain_name=header["chain"],
        reference_frame=frames[0],
        robot_frame=frames[1],
    )


def write_configs(configs: Sequence[tuple[int, JointConfig]], filepath: str | Path, chain_name: str = "") -> Path:
    """(姿勢番号, 関節構成) のリストをテキストファイルに書き出します。"""
    k = len(configs[0][1]) if configs else 0
    joint_columns = " ".join(f"q{i + 1}" for i in range(k))
    lines = [
        "# remaster joint configurations",
        f"# format_version: {file_config.DATASET_FORMAT_VERSION}",
        f"# chain: {chain_name}",
        f"# joints: {k}",
        f"# columns: pose_index {joint_columns}",
        "# units: rad",
    ]
    for index, q in configs:
        lines.append(f"{index} " + " ".join(format(float(v), _ANGLE) for v in q))
    path = _write_text(filepath, "\n".join(lines) + "\n")
    logger.info(f"Wrote {len(configs)} joint configurations to {path}")
    return path


def read_configs(filepath: str | Path) -> list[tuple[int, JointConfig]]:
    """
    関節構成ファイルを読み込みます。

    Raises
    ------
    DatasetFormatError
        形式が不正な場合に発生します。
    """
    header, body = _parse_header(_read_lines(filepath), filepath)
    _check_version(header, file_config.DATASET_FORMAT_VERSION, filepath)
    configs: list[tuple[int, JointConfig]] = []
    width: int | None = None
    for number, line in body:
        fields = line.split()
        if width is None:
            width = len(fields)
        if len(fields) != width or width < 2:
            raise DatasetFormatError(f"Inconsistent column count {len(fields)}", str(filepath), number)
        q = np.array(_parse_floats(fields[1:], filepath, number))
        configs.append((_parse_index(fields[0], filepath, number), q))
    if not configs:
        raise DatasetFormatError("Configuration file has no records", str(filepath))
    return configs


def write_poses(pose_set: PoseSet, filepath: str | Path) -> Path:
    """
    候補姿勢をテキストファイルに書き出します。

    Notes
    -----
    各行は姿勢番号、位置 (mm)、ZYX オイラー角 γ, θ, φ (deg)、
    生成に使った (ᴿθ_z [rad], r [mm], ᴿz_d [mm], ᵀθ_z [rad]) です。
    """
    lines = [
        "# remaster candidate poses",
        f"# format_version: {file_config.DATASET_FORMAT_VERSION}",
        f"# generated: {pose_set.n_generated}",
        f"# degenerate: {pose_set.n_degenerate}",
        f"# resampled: {pose_set.n_resampled}",
        f"# infeasible: {pose_set.n_infeasible}",
        "# columns: pose_index x y z gamma theta phi theta_z_base r z_d theta_z_tool",
        "# units: mm deg (rad mm mm rad)",
    ]
    for index, candidate in enumerate(pose_set.candidates):
        euler = np.degrees(rotation_to_euler_zyx(candidate.pose.rotation))
        xyz = " ".join(format(float(v), _LENGTH) for v in candidate.pose.translation)
        angles = " ".join(format(float(v), _ANGLE) for v in euler)
        base, r, z, tool = candidate.lhs_coords
        lhs = f"{base:{_ANGLE}} {r:{_LENGTH}} {z:{_LENGTH}} {tool:{_ANGLE}}"
        lines.append(f"{index} {xyz} {angles} {lhs}")
    path = _write_text(filepath, "\n".join(lines) + "\n")
    logger.info(f"Wrote {len(pose_set.candidates)} poses to {path}")
    return path


def write_trace(trace: PosteriorTrace, filepath: str | Path) -> Path:
    """
    MCMC のトレースを列形式のテキストファイルに書き出します。

    Notes
    -----
    1 行が 1 ステップで、列はステップ番号、受理フラグ、各パラメーター
    (mm, deg)、対数事後確率です。値は往復で変わらない桁数で書き出します。
    """
    columns = ["step", "accepted", *trace.parameter_names, "log_posterior"]
    header = "\n".join(
        [
            f"format_version: {file_config.TRACE_FORMAT_VERSION}",
            f"seed: {trace.seed}",
            f"proposal_width: {trace.proposal_width!r}",
            f"n_steps: {trace.n_steps}",
            f"burn_in: {trace.burn_in}",
            f"fixed_parameters: {' '.join(trace.fixed_parameters)}",
            " ".join(columns),
        ]
    )
    table = np.column_stack(
        [np.arange(trace.n_steps), trace.accepted.astype(np.int64), trace.samples, trace.log_posterior]
    )
    fmt = ["%d", "%d"] + ["%.17g"] * (len(columns) - 2)
    buffer = io.StringIO()
    np.savetxt(buffer, table, fmt=fmt, header=header, comments="# ")
    path = _write_text(filepath, buffer.getvalue())
    logger.info(f"Wrote trace with {trace.n_steps} steps to {path}")
    return path


def read_trace(filepath: str | Path) -> PosteriorTrace:
    """
    write_trace で書き出したトレースを読み込みます。

    Raises
    ------
    DatasetFormatError
        ヘッダーや列数が不正な場合に発生します。
    """
    lines = _read_lines(filepath)
    header, body = _parse_header(lines, filepath)
    _check_version(header, file_config.TRACE_FORMAT_VERSION, filepath)
    column_lines = [line.lstrip("#").split() for line in lines if line.startswith("# step ")]
    if not column_lines:
        raise DatasetFormatError("Missing column header", str(filepath))
    columns = column_lines[0]
    try:
        table = np.loadtxt(io.StringIO("\n".join(line for _, line in body)), ndmin=2)
        seed = int(header["seed"])
        proposal_width = float(header["proposal_width"])
        n_steps = int(header["n_steps"])
        burn_in = int(header["burn_in"])
    except (KeyError, ValueError) as e:
        raise DatasetFormatError(f"Invalid trace file: {e}", str(filepath)) from e
    if table.shape[1] != len(columns):
        raise DatasetFormatError(f"Expected {len(columns)} columns, got {table.shape[1]}", str(filepath))
    return PosteriorTrace(
        samples=table[:, 2:-1],
        accepted=table[:, 1].astype(bool),
        log_posterior=table[:, -1],
        parameter_names=tuple(columns[2:-1]),
        seed=seed,
        proposal_width=proposal_width,
        n_steps=n_steps,
        burn_in=burn_in,
        fixed_parameters=tuple(header.get("fixed_parameters", "").split()),
    )


def write_histograms(
    result: CalibrationResult, filepath: str | Path, bins: int = mcmc_defaults.HISTOGRAM_BINS
) -> Path:
    """
    burn-in 後のゼロオフセットのサンプルをパラメーターごとのヒストグラムとして書き出します。

    Parameters
    ----------
    result : CalibrationResult
        校正結果です。
    filepath : str | Path
        出力先のパスです。
    bins : int
        ビンの数です。

    Returns
    -------
    Path
        書き出したファイルのパスです。
    """
    names = result.parameter_names[6:-1]
    samples = result.post_burn_in_samples[:, 6:-1]
    lines = [
        "# remaster posterior histograms",
        f"# format_version: {file_config.TRACE_FORMAT_VERSION}",
        f"# bins: {bins}",
        "# columns: parameter bin_left bin_right count",
        "# units: deg",
    ]
    for j, name in enumerate(names):
        counts, edges = np.histogram(samples[:, j], bins=bins)
        for count, left, right in zip(counts, edges[:-1], edges[1:], strict=True):
            lines.append(f"{name} {left:{_ANGLE}} {right:{_ANGLE}} {int(count)}")
    path = _write_text(filepath, "\n".join(lines) + "\n")
    logger.info(f"Wrote histograms for {len(names)} parameters to {path}")
    return path
