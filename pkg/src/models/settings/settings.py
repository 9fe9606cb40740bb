"""チェーン、シーン、サンプラー、MCMC の設定ファイル (YAML) を読み書きするモジュールです。"""

from __future__ import annotations

import math
from collections.abc import Mapping
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from ...config import (
    ERROR_FILE_NOT_FOUND,
    ERROR_LOAD_FAILED,
    ERROR_SAVE_FAILED,
    kinematics_config,
    profile_config,
    scene_defaults,
)
from ...exceptions import RemasterError, SettingsError
from ...logger import get_logger
from ..calibration import MCMCConfig
from ..kinematics import DHChain, DHJoint, RigidTransform
from ..sampling import SamplerConfig
from ..scene import SceneConfig

logger = get_logger(__name__)

BUILTIN_SCENES: tuple[str, ...] = ("motion_capture", "laser_tracker")

_SCENE_KEYS = frozenset(
    {
        "preset",
        "chain",
        "true_offsets_deg",
        "sensor",
        "marker",
        "sensor_noise_sigma_mm",
        "registration_noise_sigma_mm",
        "seed",
        "label",
    }
)
_SAMPLER_KEYS = {
    "n_poses": "n_poses",
    "n_keep": "n_keep",
    "r_range_mm": "r_range",
    "z_range_mm": "z_range",
    "theta_z_base_range_rad": "theta_z_base_range",
    "theta_z_tool_range_rad": "theta_z_tool_range",
    "sensor_origin_mm": "sensor_origin",
    "seed": "seed",
    "arm_angle_count": "arm_angle_count",
    "max_configs_per_pose": "max_configs_per_pose",
}
_CHAIN_KEYS = frozenset({"name", "joints", "zero_offsets_deg", "tool_points_mm"})
_JOINT_KEYS = frozenset({"a_mm", "alpha_rad", "d_mm", "theta_home_rad", "limits_rad", "kind"})
_MCMC_KEYS = frozenset(
    {"n_steps", "burn_in", "proposal_width", "seed", "init", "preconditioner", "fixed_parameters", "initial_sigma_mm"}
)


def _float_list(values: Any, length: int | None, what: str) -> list[float]:
    try:
        result = [float(v) for v in values]
    except (TypeError, ValueError) as e:
        raise SettingsError(f"'{what}' must be a list of numbers") from e
    if length is not None and len(result) != length:
        raise SettingsError(f"'{what}' must have {length} values, got {len(result)}")
    return result


def _check_keys(data: Mapping[str, Any], allowed: frozenset[str] | set[str], what: str) -> None:
    unknown = sorted(set(data) - set(allowed))
    if unknown:
        raise SettingsError(f"Unknown {what} keys: {', '.join(unknown)}")


def _rotation_from_zyx_deg(angles: list[float]) -> np.ndarray:
    from ...services.kinematics import euler_zyx_to_rotation

    gamma, theta, phi = (math.radians(v) for v in angles)
    return euler_zyx_to_rotation(gamma, theta, phi)


def _rotation_to_zyx_deg(rotation: np.ndarray) -> list[float]:
    from ...services.kinematics import rotation_to_euler_zyx

    return [math.degrees(v) for v in rotation_to_euler_zyx(rotation)]


class ConfigRepository:
    """設定ファイルのディスクへの読み書きを処理するクラスです。

    Notes
    -----
    読み込みは ``yaml.safe_load``、書き出しは ``yaml.safe_dump`` を使います。
    組み込みのシーン名 (``motion_capture``, ``laser_tracker``) はファイルの代わりに指定できます。
    """

    @staticmethod
    def load_yaml(filepath: str | Path) -> dict[str, Any]:
        """YAML ファイルを辞書として読み込みます。

        Raises
        ------
        SettingsError
            ファイルが存在しない場合や YAML として解析できない場合に発生します。
        """
        path = Path(filepath)
        if not path.exists():
            raise SettingsError(ERROR_FILE_NOT_FOUND.format(filepath=path))
        try:
            with path.open("r", encoding="utf-8") as f:
                data = yaml.safe_load(f)
        except (OSError, yaml.YAMLError) as e:
            raise SettingsError(f"{ERROR_LOAD_FAILED.format(filepath=path)}: {e}", str(path)) from e
        if data is None:
            return {}
        if not isinstance(data, dict):
            raise SettingsError("Top level of a configuration file must be a mapping", str(path))
        return data

    @staticmethod
    def save_yaml(data: Mapping[str, Any], filepath: str | Path) -> Path:
        """辞書を YAML ファイルに保存します。

        Raises
        ------
        SettingsError
            ファイルが保存できない場合に発生します。
        """
        path = Path(filepath)
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            with path.open("w", encoding="utf-8", newline="\n") as f:
                yaml.safe_dump(dict(data), f, sort_keys=False, allow_unicode=True)
        except (OSError, yaml.YAMLError) as e:
            raise SettingsError(f"{ERROR_SAVE_FAILED.format(filepath=path)}: {e}", str(path)) from e
        logger.info(f"Saved configuration to {path}")
        return path

    # チェーンです。
    @staticmethod
    def chain_from_dict(data: Mapping[str, Any]) -> DHChain:
        """
        辞書からチェーンを作ります。

        Parameters
        ----------
        data : Mapping[str, Any]
            ``builtin`` キーで組み込みチェーンを指定するか、``name``, ``joints``,
            ``zero_offsets_deg``, ``tool_points_mm`` を持つ辞書です。

        Returns
        -------
        DHChain
            作成したチェーンです。

        Raises
        ------
        SettingsError
            キーや値が不正な場合に発生します。
        """
        if "builtin" in data:
            name = data["builtin"]
            if name != kinematics_config.REFERENCE_CHAIN_NAME:
                raise SettingsError(f"Unknown builtin chain '{name}'")
            from ...services.kinematics import reference_chain

            chain = reference_chain()
            if "zero_offsets_deg" in data:
                offsets = _float_list(data["zero_offsets_deg"], chain.k, "zero_offsets_deg")
                chain = chain.with_offsets(np.radians(offsets))
            return chain

        _check_keys(data, _CHAIN_KEYS, "chain")
        joints_data = data.get("joints")
        if not isinstance(joints_data, list) or not joints_data:
            raise SettingsError("Chain needs a non-empty 'joints' list")
        joints = []
        limits = []
        try:
            for entry in joints_data:
                _check_keys(entry, _JOINT_KEYS, "joint")
                joints.append(
                    DHJoint(
                        a=float(entry.get("a_mm", 0.0)),
                        alpha=float(entry["alpha_rad"]),
                        d=float(entry.get("d_mm", 0.0)),
                        theta_home=float(entry.get("theta_home_rad", 0.0)),
                        joint_kind=str(entry.get("kind", "revolute")),
                    )
                )
                limits.append(_float_list(entry["limits_rad"], 2, "limits_rad"))
            k = len(joints)
            offsets = data.get("zero_offsets_deg", [0.0] * k)
            tool_points = data.get("tool_points_mm", {"flange": [0.0, 0.0, 0.0]})
            return DHChain(
                joints=tuple(joints),
                joint_limits=np.array(limits),
                tool_points={str(n): _float_list(p, 3, f"tool point {n}") for n, p in tool_points.items()},
                zero_offsets=np.radians(_float_list(offsets, k, "zero_offsets_deg")),
                name=str(data.get("name", "chain")),
            )
        except KeyError as e:
            raise SettingsError(f"Missing chain key {e}") from e
        except (TypeError, ValueError, AttributeError) as e:
            raise SettingsError(f"Malformed chain entry: {e}") from e
        except SettingsError:
            raise
        except RemasterError as e:
            raise SettingsError(f"Invalid chain: {e.message}") from e

    @staticmethod
    def chain_to_dict(chain: DHChain) -> dict[str, Any]:
        """チェーンを設定ファイルの辞書に変換します。"""
        return {
            "name": chain.name,
            "joints": [
                {
                    "a_mm": float(joint.a),
                    "alpha_rad": float(joint.alpha),
                    "d_mm": float(joint.d),
                    "theta_home_rad": float(joint.theta_home),
                    "limits_rad": [float(v) for v in limits],
                }
                for joint, limits in zip(chain.joints, chain.joint_limits, strict=True)
            ],
            "zero_offsets_deg": [float(v) for v in np.degrees(chain.offsets)],
            "tool_points_mm": {name: [float(v) for v in point] for name, point in chain.tool_points.items()},
        }

    def load_chain(self, filepath: str | Path) -> DHChain:
        return self.chain_from_dict(self.load_yaml(filepath))

    def save_chain(self, chain: DHChain, filepath: str | Path) -> Path:
        return self.save_yaml(self.chain_to_dict(chain), filepath)

    # シーンです。
    @staticmethod
    def builtin_scene_dict(name: str) -> dict[str, Any]:
        """組み込みシーンの設定辞書を返します。

        Raises
        ------
        SettingsError
            未知のシーン名の場合に発生します。
        """
        if name == "motion_capture":
            origin = scene_defaults.MOTION_CAPTURE_ORIGIN_MM
            rotation = scene_defaults.MOTION_CAPTURE_ROTATION_ZYX_DEG
            marker = "sir"
            noise = scene_defaults.MOTION_CAPTURE_NOISE_MM
        elif name == "laser_tracker":
            origin = scene_defaults.LASER_TRACKER_ORIGIN_MM
            rotation = scene_defaults.LASER_TRACKER_ROTATION_ZYX_DEG
            marker = "smr"
            noise = scene_defaults.LASER_TRACKER_NOISE_MM
        else:
            raise SettingsError(f"Unknown builtin scene '{name}' (expected one of {', '.join(BUILTIN_SCENES)})")
        return {
            "label": name,
            "chain": {"builtin": kinematics_config.REFERENCE_CHAIN_NAME},
            "true_offsets_deg": list(scene_defaults.TRUE_OFFSETS_DEG),
            "sensor": {"rotation_zyx_deg": list(rotation), "translation_mm": list(origin)},
            "marker": marker,
            "sensor_noise_sigma_mm": noise,
            "registration_noise_sigma_mm": scene_defaults.REGISTRATION_NOISE_MM,
            "seed": scene_defaults.SEED,
        }

    def builtin_scene(self, name: str) -> SceneConfig:
        return self.scene_from_dict(self.builtin_scene_dict(name))

    def scene_from_dict(self, data: Mapping[str, Any], filepath: str | Path | None = None) -> SceneConfig:
        """
        辞書からシーンを作ります。

        Notes
        -----
        ``preset`` キーがある場合は組み込みシーンを土台にして、ほかのキーで上書きします。
        """
        source = str(filepath) if filepath is not None else None
        _check_keys(data, _SCENE_KEYS, "scene")
        merged: dict[str, Any] = {}
        if "preset" in data:
            merged.update(self.builtin_scene_dict(str(data["preset"])))
        merged.update({key: value for key, value in data.items() if key != "preset"})
        try:
            chain_data = merged.get("chain", {"builtin": kinematics_config.REFERENCE_CHAIN_NAME})
            if isinstance(chain_data, str):
                chain_data = {"builtin": chain_data}
            chain = self.chain_from_dict(chain_data)
            sensor = merged["sensor"]
            _check_keys(sensor, frozenset({"rotation_zyx_deg", "translation_mm"}), "sensor")
            pose = RigidTransform(
                _rotation_from_zyx_deg(_float_list(sensor["rotation_zyx_deg"], 3, "rotation_zyx_deg")),
                np.array(_float_list(sensor["translation_mm"], 3, "translation_mm")),
            )
            offsets = _float_list(merged.get("true_offsets_deg", [0.0] * chain.k), chain.k, "true_offsets_deg")
            return SceneConfig(
                chain_nominal=chain,
                true_offsets_deg=tuple(offsets),
                true_sensor_pose=pose,
                marker=str(merged["marker"]),
                sensor_noise_sigma=float(merged["sensor_noise_sigma_mm"]),
                registration_noise_sigma=float(merged.get("registration_noise_sigma_mm", 0.0)),
                seed=int(merged.get("seed", scene_defaults.SEED)),
                label=str(merged.get("label", "scene")),
            )
        except KeyError as e:
            raise SettingsError(f"Missing scene key {e}", source) from e
        except (TypeError, ValueError, AttributeError) as e:
            raise SettingsError(f"Malformed scene: {e}", source) from e
        except SettingsError as e:
            raise SettingsError(e.message, source) from e
        except RemasterError as e:
            raise SettingsError(f"Invalid scene: {e.message}", source) from e

    def scene_to_dict(self, scene: SceneConfig) -> dict[str, Any]:
        """シーンを設定ファイルの辞書に変換します。"""
        pose = scene.true_sensor_pose
        return {
            "label": scene.label,
            "chain": self.chain_to_dict(scene.chain_nominal),
            "true_offsets_deg": list(scene.true_offsets_deg),
            "sensor": {
                "rotation_zyx_deg": _rotation_to_zyx_deg(pose.rotation),
                "translation_mm": [float(v) for v in pose.translation],
            },
            "marker": scene.marker,
            "sensor_noise_sigma_mm": float(scene.sensor_noise_sigma),
            "registration_noise_sigma_mm": float(scene.registration_noise_sigma),
            "seed": int(scene.seed),
        }

    def load_scene(self, source: str | Path) -> SceneConfig:
        """
        シーンを読み込みます。

        Parameters
        ----------
        source : str | Path
            YAML ファイルのパス、または組み込みシーンの名前です。

        Returns
        -------
        SceneConfig
            読み込んだシーンです。
        """
        if str(source) in BUILTIN_SCENES and not Path(source).exists():
            return self.builtin_scene(str(source))
        return self.scene_from_dict(self.load_yaml(source), source)

    def save_scene(self, scene: SceneConfig, filepath: str | Path) -> Path:
        return self.save_yaml(self.scene_to_dict(scene), filepath)

    # サンプラーです。
    @staticmethod
    def sampler_from_dict(data: Mapping[str, Any], filepath: str | Path | None = None) -> SamplerConfig:
        """辞書から姿勢生成の設定を作ります。省略したキーは既定値です。"""
        source = str(filepath) if filepath is not None else None
        _check_keys(data, set(_SAMPLER_KEYS), "sampler")
        kwargs: dict[str, Any] = {}
        try:
            for key, field_name in _SAMPLER_KEYS.items():
                if key not in data:
                    continue
                value = data[key]
                if key.endswith("_range_mm") or key.endswith("_range_rad"):
                    kwargs[field_name] = tuple(_float_list(value, 2, key))
                elif key == "sensor_origin_mm":
                    kwargs[field_name] = tuple(_float_list(value, 3, key))
                else:
                    kwargs[field_name] = int(value)
            return SamplerConfig(**kwargs)
        except (TypeError, ValueError) as e:
            raise SettingsError(f"Malformed sampler settings: {e}", source) from e
        except SettingsError as e:
            raise SettingsError(e.message, source) from e

    @staticmethod
    def sampler_to_dict(config: SamplerConfig) -> dict[str, Any]:
        data: dict[str, Any] = {}
        for key, name in _SAMPLER_KEYS.items():
            value = getattr(config, name)
            data[key] = [float(v) for v in value] if isinstance(value, tuple) else value
        return data

    def load_sampler(self, filepath: str | Path) -> SamplerConfig:
        return self.sampler_from_dict(self.load_yaml(filepath), filepath)

    def save_sampler(self, config: SamplerConfig, filepath: str | Path) -> Path:
        return self.save_yaml(self.sampler_to_dict(config), filepath)

    # MCMC です。
    @staticmethod
    def mcmc_from_dict(
        data: Mapping[str, Any], profile: str = "ci", filepath: str | Path | None = None
    ) -> MCMCConfig:
        """
        プロファイルの既定値を土台に、辞書のキーで上書きした MCMC 設定を作ります。

        Raises
        ------
        SettingsError
            キーが不明な場合に発生します。
        SamplerConfigError
            値の組み合わせが不正な場合に発生します。
        """
        source = str(filepath) if filepath is not None else None
        if profile not in profile_config.PROFILES:
            raise SettingsError(f"Unknown profile '{profile}' (expected one of {', '.join(profile_config.PROFILES)})")
        _check_keys(data, _MCMC_KEYS, "mcmc")
        base = MCMCConfig.for_profile(profile, seed=int(data.get("seed", MCMCConfig().seed)))
        try:
            n_steps = int(data.get("n_steps", base.n_steps))
            if "burn_in" in data:
                burn_in = int(data["burn_in"])
            else:
                burn_in = int(n_steps * base.burn_in / base.n_steps)
            return MCMCConfig(
                n_steps=n_steps,
                burn_in=burn_in,
                proposal_width=float(data.get("proposal_width", base.proposal_width)),
                seed=base.seed,
                init=str(data.get("init", base.init)),
                preconditioner=str(data.get("preconditioner", base.preconditioner)),
                fixed_parameters=tuple(str(v) for v in data.get("fixed_parameters", base.fixed_parameters)),
                initial_sigma=float(data.get("initial_sigma_mm", base.initial_sigma)),
            )
        except (TypeError, ValueError) as e:
            raise SettingsError(f"Malformed mcmc settings: {e}", source) from e

    @staticmethod
    def mcmc_to_dict(config: MCMCConfig) -> dict[str, Any]:
        return {
            "n_steps": config.n_steps,
            "burn_in": config.burn_in,
            "proposal_width": config.proposal_width,
            "seed": config.seed,
            "init": config.init,
            "preconditioner": config.preconditioner,
            "fixed_parameters": list(config.fixed_parameters),
            "initial_sigma_mm": config.initial_sigma,
        }

    def load_mcmc(self, filepath: str | Path, profile: str = "ci") -> MCMCConfig:
        return self.mcmc_from_dict(self.load_yaml(filepath), profile, filepath)
