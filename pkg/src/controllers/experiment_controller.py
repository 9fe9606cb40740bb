"""合成シーンでの校正実験全体を制御するコントローラーです。

このモジュールは、姿勢生成から逆運動学、計測の模擬、位置合わせ、
MCMC による校正、精度評価までを順番に実行します。
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from ..common import LoggingMixin, ProgressMixin
from ..config import metrics_defaults, sampler_defaults
from ..models.calibration import (
    CalibrationDataset,
    CalibrationResult,
    MCMCConfig,
    ParameterVector,
    PosteriorTrace,
    RegistrationCorrection,
)
from ..models.ik import EnumerationDiagnostics
from ..models.kinematics import DHChain, JointConfig, RigidTransform
from ..models.metrics import AccuracySummary
from ..models.sampling import PoseSet, SamplerConfig
from ..models.scene import ExperimentReport, OffsetComparison, SceneConfig
from ..services.calibration import metropolis_sample, residual_matrix, summarize
from ..services.ik import default_arm_angles, enumerate_configurations_with_diagnostics, thin_configurations
from ..services.metrics import (
    BASELINES,
    clusters_by_pose,
    offsets_only_share,
    post_registration_accuracy,
    random_configs,
    relative_accuracy,
    theoretical_accuracy,
)
from ..services.pose_sampler import generate_pose_set
from ..services.simulator import SceneSimulator, compare_sensors, gauge_aligned_offsets, tool_points_for

OPTIMIZATION = "optimization"
VALIDATION = "validation"


def nominal_parameters(chain: DHChain, sigma: float = 1.0) -> ParameterVector:
    """補正なしの位置合わせとチェーンの名目オフセットからなる校正前のパラメーターを返します。"""
    return ParameterVector(RegistrationCorrection(), chain.offsets, sigma)


@dataclass
class PreparedPoses:
    """生成した姿勢とその関節構成です。"""

    pose_set: PoseSet
    configs: list[tuple[int, JointConfig]]
    diagnostics: EnumerationDiagnostics


@dataclass
class CalibrationRun:
    """位置合わせと MCMC の結果です。"""

    initial_transform: RigidTransform
    registration_triple: tuple[int, int, int]
    trace: PosteriorTrace
    result: CalibrationResult


@dataclass
class ExperimentRun:
    """
    実験の中間生成物とレポートです。

    Attributes
    ----------
    poses : dict[str, PreparedPoses]
        "optimization" と "validation" の姿勢です。
    datasets : dict[str, CalibrationDataset]
        模擬計測したデータセットです。
    calibration : CalibrationRun
        校正の結果です。
    report : ExperimentReport
        実験のレポートです。
    """

    poses: dict[str, PreparedPoses]
    datasets: dict[str, CalibrationDataset]
    calibration: CalibrationRun
    report: ExperimentReport


class ExperimentController(LoggingMixin, ProgressMixin):
    """
    合成シーンでの校正実験を実行するコントローラーです。

    Parameters
    ----------
    n_draws : int
        理論精度で事後サンプルから引く数です。
    n_random_configs : int
        理論精度を評価するランダム構成の数です。
    theoretical_seed : int
        理論精度の乱数シードです。
    random_config_seed : int
        ランダム構成の乱数シードです。
    """

    def __init__(
        self,
        n_draws: int = metrics_defaults.N_DRAWS,
        n_random_configs: int = metrics_defaults.N_RANDOM_CONFIGS,
        theoretical_seed: int = metrics_defaults.THEORETICAL_SEED,
        random_config_seed: int = metrics_defaults.RANDOM_CONFIG_SEED,
    ) -> None:
        super().__init__()
        self.n_draws = n_draws
        self.n_random_configs = n_random_configs
        self.theoretical_seed = theoretical_seed
        self.random_config_seed = random_config_seed

    @staticmethod
    def default_sampler_config(scene: SceneConfig, seed: int | None = None) -> SamplerConfig:
        """ツールがシーンのセンサーを向く既定の姿勢生成設定を返します。"""
        origin = tuple(float(v) for v in scene.true_sensor_pose.translation)
        return SamplerConfig(
            sensor_origin=(origin[0], origin[1], origin[2]),
            seed=sampler_defaults.OPTIMIZATION_SEED if seed is None else seed,
        )

    @staticmethod
    def validation_config(config: SamplerConfig) -> SamplerConfig:
        """最適化用の設定から、シードと残す数だけを変えた検証用の設定を作ります。"""
        return replace(config, seed=config.seed + 1, n_keep=sampler_defaults.N_KEEP_VALIDATION)

    def prepare_poses(self, chain: DHChain, config: SamplerConfig) -> PreparedPoses:
        """
        候補姿勢を生成し、すべての分岐の関節構成を列挙して姿勢ごとに間引きます。

        Parameters
        ----------
        chain : DHChain
            名目上のロボットモデルです。
        config : SamplerConfig
            姿勢生成の設定です。

        Returns
        -------
        PreparedPoses
            姿勢と関節構成です。
        """
        pose_set = generate_pose_set(config, chain)
        arm_angles = default_arm_angles(config.arm_angle_count)
        configs, diagnostics = enumerate_configurations_with_diagnostics(chain, pose_set.poses, arm_angles)
        configs = thin_configurations(configs, config.max_configs_per_pose)
        self.log_info(
            f"Prepared {len(pose_set.candidates)} poses and {len(configs)} configurations (seed {config.seed})"
        )
        return PreparedPoses(pose_set, configs, diagnostics)

    def calibrate(self, scene: SceneConfig, dataset: CalibrationDataset, mcmc_config: MCMCConfig) -> CalibrationRun:
        """
        初期位置合わせを求め、事後分布からサンプリングして要約します。

        Parameters
        ----------
        scene : SceneConfig
            合成シーンです。
        dataset : CalibrationDataset
            最適化用のデータセットです。
        mcmc_config : MCMCConfig
            サンプラーの設定です。

        Returns
        -------
        CalibrationRun
            位置合わせと校正の結果です。
        """
        simulator = SceneSimulator(scene)
        initial, triple = simulator.initial_registration(dataset)
        self.report_progress("calibration", 0, mcmc_config.n_steps)
        trace = metropolis_sample(dataset, scene.chain_nominal, initial, mcmc_config)
        result = summarize(trace)
        self.report_progress("calibration", mcmc_config.n_steps, mcmc_config.n_steps)
        self.log_info(f"Calibration finished: acceptance rate {result.acceptance_rate:.3f}")
        return CalibrationRun(initial, triple, trace, result)

    @staticmethod
    def dataset_metrics(
        chain: DHChain,
        dataset: CalibrationDataset,
        initial_transform: RigidTransform,
        params: ParameterVector,
    ) -> dict[str, AccuracySummary]:
        """
        あるパラメーターでのデータセットの相対精度と位置合わせ後の絶対精度を求めます。

        Parameters
        ----------
        chain : DHChain
            名目上のロボットモデルです。
        dataset : CalibrationDataset
            評価するデータセットです。
        initial_transform : RigidTransform
            初期変換 ᴺᵣT です。
        params : ParameterVector
            位置合わせ補正とゼロオフセットです。

        Returns
        -------
        dict[str, AccuracySummary]
            "relative" と "post_registration" の要約です。
        """
        robot_points = tool_points_for(chain.with_offsets(params.theta2), dataset)
        clusters = clusters_by_pose(dataset.pose_indices, dataset.points, robot_points)
        residuals = residual_matrix(dataset, chain, initial_transform, params)
        return {
            "relative": relative_accuracy(clusters),
            "post_registration": post_registration_accuracy(residuals),
        }

    def theoretical_metrics(
        self, scene: SceneConfig, result: CalibrationResult, optimization_configs: list[JointConfig]
    ) -> tuple[dict[str, AccuracySummary], dict[str, float]]:
        """
        最適化用の構成とランダム構成について、両方の基準で理論精度を求めます。

        Returns
        -------
        tuple[dict[str, AccuracySummary], dict[str, float]]
            "構成集合/基準/種類" をキーとする要約と、"構成集合/基準" をキーとする
            ゼロオフセット由来の割合です。
        """
        chain = scene.chain_nominal
        config_sets = {
            OPTIMIZATION: np.array(optimization_configs),
            "random": np.array(random_configs(chain, self.n_random_configs, self.random_config_seed)),
        }
        summaries: dict[str, AccuracySummary] = {}
        shares: dict[str, float] = {}
        for set_name, configs in config_sets.items():
            for baseline in BASELINES:
                full, offsets_only = (
                    theoretical_accuracy(
                        chain,
                        result,
                        configs,
                        n_draws=self.n_draws,
                        include_isotropic_noise=include_noise,
                        baseline=baseline,
                        point_name=scene.marker,
                        seed=self.theoretical_seed,
                    )
                    for include_noise in (True, False)
                )
                summaries[f"{set_name}/{baseline}/full"] = full
                summaries[f"{set_name}/{baseline}/offsets_only"] = offsets_only
                shares[f"{set_name}/{baseline}"] = offsets_only_share(full, offsets_only)
                self.log_debug(f"Theoretical {set_name}/{baseline}: full {full.mean:.4f} mm")
        return summaries, shares

    def run(
        self, scene: SceneConfig, sampler_config: SamplerConfig, mcmc_config: MCMCConfig, profile: str = "custom"
    ) -> ExperimentRun:
        """
        実験全体を実行し、中間生成物とレポートを返します。

        Parameters
        ----------
        scene : SceneConfig
            合成シーンです。
        sampler_config : SamplerConfig
            最適化用の姿勢生成の設定です。検証用はシードに 1 を足して作ります。
        mcmc_config : MCMCConfig
            サンプラーの設定です。
        profile : str
            レポートに記録するプロファイル名です。

        Returns
        -------
        ExperimentRun
            実験の中間生成物とレポートです。

        Notes
        -----
        検証用データセットの校正後の指標には、最適化用データセットだけで
        求めたパラメーターを使います。途中で失敗した場合は例外をそのまま伝え、
        部分的なレポートは作りません。
        """
        chain = scene.chain_nominal
        simulator = SceneSimulator(scene)
        sampler_configs = {OPTIMIZATION: sampler_config, VALIDATION: self.validation_config(sampler_config)}

        poses: dict[str, PreparedPoses] = {}
        datasets: dict[str, CalibrationDataset] = {}
        for step, (name, config) in enumerate(sampler_configs.items()):
            self.report_progress("poses", step, len(sampler_configs))
            poses[name] = self.prepare_poses(chain, config)
            datasets[name] = simulator.build_dataset(poses[name].configs, stream=name)

        calibration = self.calibrate(scene, datasets[OPTIMIZATION], mcmc_config)
        result = calibration.result
        nominal = nominal_parameters(chain, result.mle.sigma)
        metrics_before = {
            name: self.dataset_metrics(chain, dataset, calibration.initial_transform, nominal)
            for name, dataset in datasets.items()
        }
        metrics_after = {
            name: self.dataset_metrics(chain, dataset, calibration.initial_transform, result.mle)
            for name, dataset in datasets.items()
        }
        theoretical, shares = self.theoretical_metrics(scene, result, [q for _, q in poses[OPTIMIZATION].configs])
        aligned_mean, aligned_std, _ = gauge_aligned_offsets(result, calibration.initial_transform, scene)

        diagnostics = poses[OPTIMIZATION].diagnostics.branches.as_dict()
        for key, value in poses[VALIDATION].diagnostics.branches.as_dict().items():
            diagnostics[key] = diagnostics.get(key, 0) + value
        report = ExperimentReport(
            scene_label=scene.label,
            profile=profile,
            seeds={
                "scene": scene.seed,
                "sampler_optimization": sampler_configs[OPTIMIZATION].seed,
                "sampler_validation": sampler_configs[VALIDATION].seed,
                "mcmc": mcmc_config.seed,
                "theoretical": self.theoretical_seed,
                "random_configs": self.random_config_seed,
            },
            counts={
                "poses_optimization": len(poses[OPTIMIZATION].pose_set.candidates),
                "poses_validation": len(poses[VALIDATION].pose_set.candidates),
                "configs_optimization": len(datasets[OPTIMIZATION]),
                "configs_validation": len(datasets[VALIDATION]),
                "skipped_poses": len(poses[OPTIMIZATION].diagnostics.skipped_poses)
                + len(poses[VALIDATION].diagnostics.skipped_poses),
                "n_steps": mcmc_config.n_steps,
                "burn_in": mcmc_config.burn_in,
            },
            calibration=result,
            metrics_before=metrics_before,
            metrics_after=metrics_after,
            theoretical=theoretical,
            offsets_only_share=shares,
            injected_offsets_deg=np.array(scene.true_offsets_deg),
            gauge_aligned_offsets_deg=aligned_mean,
            gauge_aligned_std_deg=aligned_std,
            registration_triple=calibration.registration_triple,
            ik_diagnostics=diagnostics,
        )
        self.log_info(f"Experiment on scene '{scene.label}' finished")
        return ExperimentRun(poses, datasets, calibration, report)

    def run_experiment(
        self, scene: SceneConfig, sampler_config: SamplerConfig, mcmc_config: MCMCConfig, profile: str = "custom"
    ) -> ExperimentReport:
        """実験全体を実行してレポートを返します。"""
        return self.run(scene, sampler_config, mcmc_config, profile).report

    def compare_scenes(
        self,
        scene_a: SceneConfig,
        scene_b: SceneConfig,
        sampler_config: SamplerConfig,
        mcmc_config: MCMCConfig,
        profile: str = "custom",
    ) -> tuple[ExperimentRun, ExperimentRun, list[OffsetComparison]]:
        """
        同じロボットを 2 つのセンサーで校正し、ゼロオフセットの推定値を比べます。

        Notes
        -----
        ベース関節のオフセットは位置合わせと区別できないので、ゲージを揃えた値で比べます。
        """
        run_a = self.run(scene_a, sampler_config, mcmc_config, profile)
        run_b = self.run(scene_b, sampler_config, mcmc_config, profile)
        names = run_a.report.calibration.parameter_names[6:-1]
        comparisons = compare_sensors(
            names,
            run_a.report.gauge_aligned_offsets_deg,
            run_a.report.gauge_aligned_std_deg,
            run_b.report.gauge_aligned_offsets_deg,
            run_b.report.gauge_aligned_std_deg,
        )
        run_a.report.sensor_comparison = comparisons
        run_a.report.comparison_label = scene_b.label
        agree = sum(c.agrees for c in comparisons)
        self.log_info(f"Sensors '{scene_a.label}' and '{scene_b.label}' agree on {agree}/{len(comparisons)} offsets")
        return run_a, run_b, comparisons
