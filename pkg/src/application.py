"""remaster のコマンドラインアプリケーションのメインモジュールです。

このモジュールは、サブコマンドごとにサービスとコントローラーを呼び出し、
結果をファイルに書き出すアプリケーションクラスを提供します。
"""

from __future__ import annotations

import argparse
from collections.abc import Callable, Sequence
from dataclasses import replace
from pathlib import Path

from .config import app_config, file_config, profile_config
from .controllers.experiment_controller import OPTIMIZATION, VALIDATION, ExperimentController, nominal_parameters
from .error_handler import ErrorHandler, get_error_handler, setup_global_exception_handling
from .logger import get_logger, set_verbosity
from .models.calibration import CalibrationDataset, MCMCConfig
from .models.sampling import SamplerConfig
from .models.scene import SceneConfig
from .models.settings import BUILTIN_SCENES, ConfigRepository
from .services import dataset_io, reports
from .services.calibration import summarize
from .services.simulator import SceneSimulator
from .utils import output_path
from .version import __version__

logger = get_logger(__name__)


def build_parser() -> argparse.ArgumentParser:
    """サブコマンドを持つ引数パーサーを作ります。"""
    parser = argparse.ArgumentParser(
        prog=app_config.APP_NAME, description="ロボット関節のゼロオフセット校正ツールキットです。"
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--verbose", action="store_true", help="DEBUG ログを標準エラーにも出力します。")
    subparsers = parser.add_subparsers(dest="command", required=True)

    def add_scene(sub: argparse.ArgumentParser) -> None:
        sub.add_argument(
            "--scene",
            default=BUILTIN_SCENES[0],
            help=f"シーンの YAML ファイル、または組み込みシーン名 ({', '.join(BUILTIN_SCENES)}) です。",
        )

    def add_profile(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--profile", choices=profile_config.PROFILES, default="ci", help="MCMC のプロファイルです。")
        sub.add_argument("--mcmc", help="プロファイルの既定値を上書きする MCMC 設定の YAML ファイルです。")

    sub = subparsers.add_parser("generate-poses", help="最適化用と検証用の姿勢と関節構成を生成します。")
    add_scene(sub)
    sub.add_argument("--sampler", help="姿勢生成設定の YAML ファイルです。")
    sub.add_argument("--seed", type=int, help="姿勢生成のシードです。")
    sub.add_argument("--out", required=True, help="出力ディレクトリです。")

    sub = subparsers.add_parser("simulate", help="関節構成ファイルから計測データセットを模擬します。")
    add_scene(sub)
    sub.add_argument("--configs", required=True, help="関節構成ファイルです。")
    sub.add_argument("--stream", default=OPTIMIZATION, help="雑音の系列名です。")
    sub.add_argument("--seed", type=int, help="シーンの雑音のシードです。")
    sub.add_argument("--out", required=True, help="出力するデータセットファイルです。")

    sub = subparsers.add_parser("calibrate", help="データセットからゼロオフセットを推定します。")
    add_scene(sub)
    add_profile(sub)
    sub.add_argument("--dataset", required=True, help="最適化用データセットです。")
    sub.add_argument("--seed", type=int, help="MCMC のシードです。")
    sub.add_argument("--out", required=True, help="出力ディレクトリです。")

    sub = subparsers.add_parser("evaluate", help="校正前後の精度を評価します。")
    add_scene(sub)
    sub.add_argument("--dataset", required=True, help="評価するデータセットです。")
    sub.add_argument("--calibration", required=True, help="calibrate が書き出したトレースファイルです。")
    sub.add_argument("--out", required=True, help="出力ディレクトリです。")

    sub = subparsers.add_parser("validate", help="最適化用データセットで求めた校正を検証用データセットで評価します。")
    add_scene(sub)
    sub.add_argument("--dataset", required=True, help="検証用データセットです。")
    sub.add_argument("--registration-dataset", required=True, help="位置合わせに使った最適化用データセットです。")
    sub.add_argument("--calibration", required=True, help="calibrate が書き出したトレースファイルです。")
    sub.add_argument("--out", required=True, help="出力ディレクトリです。")

    sub = subparsers.add_parser("run-all", help="姿勢生成から評価までをまとめて実行します。")
    add_scene(sub)
    add_profile(sub)
    sub.add_argument("--sampler", help="姿勢生成設定の YAML ファイルです。")
    sub.add_argument("--seed", type=int, help="シーン、姿勢生成、MCMC のシードをまとめて上書きします。")
    sub.add_argument("--compare-sensor", help="同じロボットを校正して比べる 2 つ目のシーンです。")
    sub.add_argument("--out", required=True, help="出力ディレクトリです。")
    return parser


class CalibrationApplication:
    """
    コマンドラインアプリケーションのメインクラスです。

    Parameters
    ----------
    args : argparse.Namespace
        解析済みの引数です。
    error_handler : ErrorHandler | None
        エラーハンドラーです。None の場合はグローバルなものを使います。
    repository : ConfigRepository | None
        設定ファイルのリポジトリです。
    controller : ExperimentController | None
        実験のコントローラーです。
    """

    def __init__(
        self,
        args: argparse.Namespace,
        error_handler: ErrorHandler | None = None,
        repository: ConfigRepository | None = None,
        controller: ExperimentController | None = None,
    ) -> None:
        self.args = args
        self.error_handler = error_handler or get_error_handler()
        self.repository = repository or ConfigRepository()
        self.controller = controller or ExperimentController()
        self._commands: dict[str, Callable[[], None]] = {
            "generate-poses": self.generate_poses,
            "simulate": self.simulate,
            "calibrate": self.calibrate,
            "evaluate": self.evaluate,
            "validate": self.validate,
            "run-all": self.run_all,
        }

    def run(self) -> int:
        """
        サブコマンドを実行します。

        Returns
        -------
        int
            終了コードです。ドメインのエラーは 2、予期しない例外は 1 です。
        """
        command = self.args.command
        logger.info(f"Running command '{command}'")
        try:
            self._commands[command]()
        except Exception as e:
            return self.error_handler.handle_error(e, context=command)
        logger.info(f"Command '{command}' finished")
        return app_config.EXIT_OK

    # 設定の読み込みです。
    def _scene(self) -> SceneConfig:
        scene = self.repository.load_scene(self.args.scene)
        seed = getattr(self.args, "seed", None)
        if seed is not None and self.args.command in ("simulate", "run-all"):
            scene = replace(scene, seed=seed)
        return scene

    def _sampler(self, scene: SceneConfig) -> SamplerConfig:
        path = getattr(self.args, "sampler", None)
        config = self.repository.load_sampler(path) if path else self.controller.default_sampler_config(scene)
        if self.args.seed is not None:
            config = replace(config, seed=self.args.seed)
        return config

    def _mcmc(self) -> MCMCConfig:
        if self.args.mcmc:
            config = self.repository.load_mcmc(self.args.mcmc, self.args.profile)
        else:
            config = MCMCConfig.for_profile(self.args.profile)
        if self.args.seed is not None:
            config = replace(config, seed=self.args.seed)
        return config

    # サブコマンドです。
    def generate_poses(self) -> None:
        scene = self._scene()
        config = self._sampler(scene)
        out = Path(self.args.out)
        configs = {OPTIMIZATION: config, VALIDATION: self.controller.validation_config(config)}
        files = {
            OPTIMIZATION: (file_config.POSES_OPTIMIZATION_FILE, file_config.CONFIGS_OPTIMIZATION_FILE),
            VALIDATION: (file_config.POSES_VALIDATION_FILE, file_config.CONFIGS_VALIDATION_FILE),
        }
        for name, sampler_config in configs.items():
            prepared = self.controller.prepare_poses(scene.chain_nominal, sampler_config)
            poses_file, configs_file = files[name]
            dataset_io.write_poses(prepared.pose_set, output_path(out, poses_file))
            dataset_io.write_configs(prepared.configs, output_path(out, configs_file), scene.chain_nominal.name)

    def simulate(self) -> None:
        scene = self._scene()
        configs = dataset_io.read_configs(self.args.configs)
        dataset = SceneSimulator(scene).build_dataset(configs, stream=self.args.stream)
        dataset_io.write_dataset(dataset, self.args.out)

    def calibrate(self) -> None:
        scene = self._scene()
        dataset = dataset_io.read_dataset(self.args.dataset)
        run = self.controller.calibrate(scene, dataset, self._mcmc())
        out = Path(self.args.out)
        dataset_io.write_trace(run.trace, output_path(out, file_config.TRACE_FILE))
        dataset_io.write_histograms(run.result, output_path(out, file_config.HISTOGRAM_FILE))
        reports.write_text(
            reports.format_calibration_table(run.result), output_path(out, file_config.CALIBRATION_REPORT_FILE)
        )
        data = reports.calibration_to_dict(run.result)
        data["registration_triple"] = list(run.registration_triple)
        reports.write_json(data, output_path(out, file_config.CALIBRATION_JSON_FILE))

    def _write_metrics(
        self, scene: SceneConfig, dataset: CalibrationDataset, registration: CalibrationDataset
    ) -> None:
        result = summarize(dataset_io.read_trace(self.args.calibration))
        initial, _ = SceneSimulator(scene).initial_registration(registration)
        chain = scene.chain_nominal
        label = Path(self.args.dataset).stem
        before = self.controller.dataset_metrics(chain, dataset, initial, nominal_parameters(chain, result.mle.sigma))
        after = self.controller.dataset_metrics(chain, dataset, initial, result.mle)
        rows = reports.metric_rows({label: before}, "before") + reports.metric_rows({label: after}, "after")
        out = Path(self.args.out)
        reports.write_text(reports.format_metrics_table(rows), output_path(out, file_config.METRICS_REPORT_FILE))
        data = {
            "dataset": label,
            "before": {kind: s.as_dict() for kind, s in before.items()},
            "after": {kind: s.as_dict() for kind, s in after.items()},
        }
        reports.write_json(data, output_path(out, file_config.METRICS_JSON_FILE))

    def evaluate(self) -> None:
        scene = self._scene()
        dataset = dataset_io.read_dataset(self.args.dataset)
        self._write_metrics(scene, dataset, dataset)

    def validate(self) -> None:
        scene = self._scene()
        dataset = dataset_io.read_dataset(self.args.dataset)
        registration = dataset_io.read_dataset(self.args.registration_dataset)
        self._write_metrics(scene, dataset, registration)

    def run_all(self) -> None:
        scene = self._scene()
        sampler_config = self._sampler(scene)
        mcmc_config = self._mcmc()
        if self.args.compare_sensor:
            other = self.repository.load_scene(self.args.compare_sensor)
            if self.args.seed is not None:
                other = replace(other, seed=self.args.seed)
            run, _, _ = self.controller.compare_scenes(scene, other, sampler_config, mcmc_config, self.args.profile)
        else:
            run = self.controller.run(scene, sampler_config, mcmc_config, self.args.profile)

        out = Path(self.args.out)
        files = {
            OPTIMIZATION: (
                file_config.POSES_OPTIMIZATION_FILE,
                file_config.CONFIGS_OPTIMIZATION_FILE,
                file_config.DATASET_OPTIMIZATION_FILE,
            ),
            VALIDATION: (
                file_config.POSES_VALIDATION_FILE,
                file_config.CONFIGS_VALIDATION_FILE,
                file_config.DATASET_VALIDATION_FILE,
            ),
        }
        for name, (poses_file, configs_file, dataset_file) in files.items():
            dataset_io.write_poses(run.poses[name].pose_set, output_path(out, poses_file))
            dataset_io.write_configs(run.poses[name].configs, output_path(out, configs_file), scene.chain_nominal.name)
            dataset_io.write_dataset(run.datasets[name], output_path(out, dataset_file))
        result = run.calibration.result
        dataset_io.write_trace(run.calibration.trace, output_path(out, file_config.TRACE_FILE))
        dataset_io.write_histograms(result, output_path(out, file_config.HISTOGRAM_FILE))
        calibration_text = reports.format_calibration_table(result)
        reports.write_text(calibration_text, output_path(out, file_config.CALIBRATION_REPORT_FILE))
        reports.write_json(reports.calibration_to_dict(result), output_path(out, file_config.CALIBRATION_JSON_FILE))
        reports.write_text(
            reports.format_experiment_report(run.report), output_path(out, file_config.EXPERIMENT_REPORT_FILE)
        )
        reports.write_json(run.report.as_dict(), output_path(out, file_config.EXPERIMENT_JSON_FILE))


def main(argv: Sequence[str] | None = None) -> int:
    """
    コマンドラインのエントリーポイントです。

    Parameters
    ----------
    argv : Sequence[str] | None
        引数です。None の場合は sys.argv を使います。

    Returns
    -------
    int
        終了コードです。
    """
    args = build_parser().parse_args(argv)
    set_verbosity(args.verbose)
    setup_global_exception_handling()
    return CalibrationApplication(args).run()
