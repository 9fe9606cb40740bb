"""校正結果と精度指標を表形式のテキストと JSON に書き出すモジュールです。

同じ入力からは常に同じバイト列を書き出します (時刻やパスは含めません)。
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Mapping
from pathlib import Path
from typing import Any

import numpy as np

from ..config import file_config
from ..logger import get_logger
from ..models.calibration import CalibrationResult
from ..models.metrics import AccuracySummary
from ..models.scene import ExperimentReport, OffsetComparison
from ..utils import ensure_directory

logger = get_logger(__name__)

_LENGTH_PARAMETERS = frozenset({"x", "y", "z", "sigma"})

MetricRow = tuple[str, str, AccuracySummary]


def _number(value: float, decimals: int = file_config.REPORT_DECIMALS) -> str:
    text = f"{value:.{decimals}f}"
    # -0.000 は 0.000 と書きます。
    return text[1:] if text.startswith("-") and float(text) == 0.0 else text


def _table(headers: list[str], rows: Iterable[list[str]]) -> list[str]:
    body = [list(row) for row in rows]
    widths = [max([len(header)] + [len(row[i]) for row in body]) for i, header in enumerate(headers)]
    lines = ["  ".join(h.ljust(w) for h, w in zip(headers, widths, strict=True)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in body:
        cells = [cell.rjust(w) if i else cell.ljust(w) for i, (cell, w) in enumerate(zip(row, widths, strict=True))]
        lines.append("  ".join(cells))
    return lines


def _unit(name: str) -> str:
    return "mm" if name in _LENGTH_PARAMETERS else "deg"


def format_calibration_table(result: CalibrationResult, title: str = "Calibration") -> str:
    """
    推定値と標準偏差をパラメーターごとの表にします。

    Parameters
    ----------
    result : CalibrationResult
        校正結果です。
    title : str
        表の見出しです。

    Returns
    -------
    str
        表のテキストです。角度は deg、長さは mm です。
    """
    rows = []
    for name, mean, std in zip(result.parameter_names, result.mean_vector, result.std, strict=True):
        fixed = " (fixed)" if name in result.fixed_parameters else ""
        rows.append([name + fixed, _unit(name), _number(mean), _number(std)])
    lines = [f"# {title}", ""]
    lines += _table(["parameter", "unit", "mle", "std"], rows)
    lines += ["", f"acceptance_rate  {_number(result.acceptance_rate)}", f"burn_in          {result.burn_in}"]
    return "\n".join(lines) + "\n"


def calibration_to_dict(result: CalibrationResult) -> dict[str, Any]:
    """校正結果を JSON に書き出せる辞書にします。"""
    return {
        "parameters": [
            {"name": name, "unit": _unit(name), "mle": float(mean), "std": float(std)}
            for name, mean, std in zip(result.parameter_names, result.mean_vector, result.std, strict=True)
        ],
        "acceptance_rate": result.acceptance_rate,
        "burn_in": result.burn_in,
        "n_samples": int(result.post_burn_in_samples.shape[0]),
        "fixed_parameters": list(result.fixed_parameters),
    }


def format_metrics_table(rows: Iterable[MetricRow], title: str = "Accuracy") -> str:
    """
    精度指標を (指標, ラベル, 平均, 95% 区間) の表にします。

    Parameters
    ----------
    rows : Iterable[MetricRow]
        (指標名, ラベル, 要約) の組です。
    title : str
        表の見出しです。

    Returns
    -------
    str
        表のテキストです。値はすべて mm です。
    """
    table_rows = [
        [metric, label, _number(s.mean), f"[{_number(s.interval_low)}, {_number(s.interval_high)}]", str(s.n)]
        for metric, label, s in rows
    ]
    lines = [f"# {title}", ""]
    lines += _table(["metric", "label", "mean_mm", "interval_95_mm", "n"], table_rows)
    return "\n".join(lines) + "\n"


def metric_rows(summaries: Mapping[str, Mapping[str, AccuracySummary]], stage: str) -> list[MetricRow]:
    """データセットごとの指標を表の行にします。"""
    return [
        (kind, f"{dataset}/{stage}", summary)
        for dataset, by_kind in summaries.items()
        for kind, summary in by_kind.items()
    ]


def format_comparison_table(comparisons: list[OffsetComparison], label_a: str, label_b: str) -> str:
    """2 つのセンサーの推定値の比較表を作ります。"""
    rows = [
        [
            c.name,
            _number(c.mean_a),
            _number(c.std_a),
            _number(c.mean_b),
            _number(c.std_b),
            _number(c.difference),
            "yes" if c.agrees else "no",
        ]
        for c in comparisons
    ]
    headers = ["parameter", f"{label_a}_mle", f"{label_a}_std", f"{label_b}_mle", f"{label_b}_std"]
    headers += ["difference", "agrees"]
    lines = [f"# Sensor comparison ({label_a} vs {label_b}, deg)", ""]
    lines += _table(headers, rows)
    return "\n".join(lines) + "\n"


def format_experiment_report(report: ExperimentReport) -> str:
    """
    実験レポートを表形式のテキストにします。

    Returns
    -------
    str
        校正結果、ゼロオフセットの回復、校正前後の指標、理論精度の表です。
    """
    sections = [
        f"# Experiment: scene {report.scene_label}, profile {report.profile}\n",
        format_calibration_table(report.calibration),
    ]
    names = report.calibration.parameter_names[6:-1]
    recovery_rows = [
        [name, _number(injected), _number(aligned), _number(std), _number(error)]
        for name, injected, aligned, std, error in zip(
            names,
            report.injected_offsets_deg,
            report.gauge_aligned_offsets_deg,
            report.gauge_aligned_std_deg,
            report.recovery_errors_deg,
            strict=True,
        )
    ]
    sections.append(
        "\n".join(
            ["# Zero-offset recovery (gauge aligned, deg)", ""]
            + _table(["parameter", "injected", "estimate", "std", "abs_error"], recovery_rows)
        )
        + "\n"
    )
    rows = metric_rows(report.metrics_before, "before") + metric_rows(report.metrics_after, "after")
    sections.append(format_metrics_table(rows, "Relative and post-registration accuracy"))
    theoretical_rows = [(key.rsplit("/", 1)[1], key.rsplit("/", 1)[0], s) for key, s in report.theoretical.items()]
    sections.append(format_metrics_table(theoretical_rows, "Theoretical accuracy"))
    share_rows = [[key, _number(share)] for key, share in report.offsets_only_share.items()]
    share_lines = ["# Zero-offset share of theoretical error", ""] + _table(["label", "share"], share_rows)
    sections.append("\n".join(share_lines) + "\n")
    sections.append(
        "\n".join(["# Counts", ""] + _table(["item", "value"], [[k, str(v)] for k, v in report.counts.items()])) + "\n"
    )
    if report.sensor_comparison:
        sections.append(format_comparison_table(report.sensor_comparison, report.scene_label, report.comparison_label))
    return "\n".join(sections)


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def write_text(text: str, filepath: str | Path) -> Path:
    """テキストのレポートを書き出します。"""
    path = Path(filepath)
    ensure_directory(path.parent)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    logger.info(f"Wrote report {path}")
    return path


def write_json(data: Mapping[str, Any], filepath: str | Path) -> Path:
    """構造化したレポートを JSON で書き出します。"""
    path = Path(filepath)
    ensure_directory(path.parent)
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(data, f, indent=2, ensure_ascii=False, default=_json_default)
        f.write("\n")
    logger.info(f"Wrote report {path}")
    return path
