"""誤差行列、コスト、事後分布と、その Metropolis サンプリングを扱うモジュールです。

事後分布は p(Θ, σ | D) ∝ σ^(−3n−2)·exp(−E/2σ²) (Jeffreys 事前分布) で、
σ^(−3n−2) は n ≈ 170 で倍精度の範囲を外れるため、常に対数で評価します。
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike
from scipy.optimize import least_squares

from ..exceptions import DimensionMismatchError, InvalidParameterError, SamplerConfigError
from ..logger import get_logger
from ..models.calibration import (
    CalibrationDataset,
    CalibrationResult,
    MCMCConfig,
    ParameterVector,
    PosteriorTrace,
    RegistrationCorrection,
    parameter_names,
)
from ..models.kinematics import DHChain, FloatArray, RigidTransform
from .kinematics import tool_points_batch
from .registration import corrected_transform
from .sampler import MetropolisSampler

logger = get_logger(__name__)

_SINGULAR_VALUE_FLOOR = 1e-12


def residual_matrix(
    dataset: CalibrationDataset, chain: DHChain, initial_transform: RigidTransform, params: ParameterVector
) -> FloatArray:
    """
    誤差行列 E = ᴺP_ref − ᴺP_robot を返します。

    Parameters
    ----------
    dataset : CalibrationDataset
        校正データセットです。
    chain : DHChain
        名目上のロボットモデルです。ゼロオフセットは params.theta2 で置き換えます。
    initial_transform : RigidTransform
        初期変換 ᴺᵣT です。
    params : ParameterVector
        評価するパラメーターです。

    Returns
    -------
    FloatArray
        形状 (n, 3) の誤差 (mm) です。

    Raises
    ------
    DimensionMismatchError
        関節数とゼロオフセットの数、またはデータセットの列数が一致しない場合に発生します。
    """
    if params.k != chain.k:
        raise DimensionMismatchError("zero offsets", chain.k, params.k)
    if dataset.k != chain.k:
        raise DimensionMismatchError("dataset joint configuration", chain.k, dataset.k)
    robot_points = tool_points_batch(chain.with_offsets(params.theta2), dataset.configs, dataset.marker_name)
    mapped = corrected_transform(initial_transform, params.theta1).apply(robot_points)
    return dataset.points - mapped


def cost(residuals: ArrayLike) -> float:
    """
    コスト Σ EᵢEᵢᵀ (mm²) を返します。

    Notes
    -----
    math.fsum で丸め誤差なしに合計するので、結果は行の並びや分割に依存しません。
    """
    e = np.asarray(residuals, dtype=np.float64)
    return math.fsum(np.square(e).ravel().tolist())


def log_posterior_from_cost(cost_value: float, n: int, sigma: float) -> float:
    """
    コストから対数事後確率 (−3n−2)·ln σ − E/(2σ²) を返します。

    Raises
    ------
    InvalidParameterError
        σ ≤ 0 の場合に発生します。
    """
    if not sigma > 0.0:
        raise InvalidParameterError(f"sigma must be positive, got {sigma}")
    return (-3.0 * n - 2.0) * math.log(sigma) - cost_value / (2.0 * sigma * sigma)


def log_posterior(
    dataset: CalibrationDataset, chain: DHChain, initial_transform: RigidTransform, params: ParameterVector
) -> float:
    """
    対数事後確率を返します (比例定数は除きます)。

    Parameters
    ----------
    dataset : CalibrationDataset
        校正データセットです。
    chain : DHChain
        名目上のロボットモデルです。
    initial_transform : RigidTransform
        初期変換 ᴺᵣT です。
    params : ParameterVector
        評価するパラメーターです。

    Returns
    -------
    float
        対数事後確率です。
    """
    e = residual_matrix(dataset, chain, initial_transform, params)
    return log_posterior_from_cost(cost(e), len(dataset), params.sigma)


class CalibrationPosterior:
    """
    サンプリングベクトル (mm, deg) を受け取る対数事後確率です。

    σ ≤ 0 のベクトルには -inf を返すので、サンプラーはその提案を必ず棄却します。
    """

    def __init__(self, dataset: CalibrationDataset, chain: DHChain, initial_transform: RigidTransform) -> None:
        if dataset.k != chain.k:
            raise DimensionMismatchError("dataset joint configuration", chain.k, dataset.k)
        self._dataset = dataset
        self._chain = chain
        self._initial = initial_transform
        self._n = len(dataset)

    def residuals(self, vector: ArrayLike) -> FloatArray:
        """σ を除いたサンプリングベクトルの誤差行列を返します。"""
        v = np.asarray(vector, dtype=np.float64)
        alpha, beta, gamma = np.radians(v[3:6])
        correction = RegistrationCorrection(
            float(v[0]), float(v[1]), float(v[2]), float(alpha), float(beta), float(gamma)
        )
        chain = self._chain.with_offsets(np.radians(v[6 : 6 + self._chain.k]))
        robot_points = tool_points_batch(chain, self._dataset.configs, self._dataset.marker_name)
        return self._dataset.points - corrected_transform(self._initial, correction).apply(robot_points)

    def __call__(self, vector: FloatArray) -> float:
        sigma = float(vector[-1])
        if not sigma > 0.0:
            return -math.inf
        return log_posterior_from_cost(cost(self.residuals(vector)), self._n, sigma)


def free_parameter_mask(names: tuple[str, ...], fixed: tuple[str, ...]) -> np.ndarray:
    """
    固定しないパラメーターのマスクを返します。

    Raises
    ------
    SamplerConfigError
        未知のパラメーター名が指定された場合に発生します。
    """
    unknown = sorted(set(fixed) - set(names))
    if unknown:
        raise SamplerConfigError(f"Unknown fixed parameters: {', '.join(unknown)}")
    return np.array([name not in fixed for name in names])


def least_squares_fit(
    posterior: CalibrationPosterior, start: FloatArray, free: np.ndarray
) -> tuple[FloatArray, FloatArray, float]:
    """
    σ を除くパラメーターを最小二乗で当てはめます。

    Parameters
    ----------
    posterior : CalibrationPosterior
        誤差行列の計算に使う事後分布です。
    start : FloatArray
        σ を含むサンプリングベクトルの初期値です。固定成分はこの値のまま残ります。
    free : np.ndarray
        σ を含む各成分を動かすかどうかです。

    Returns
    -------
    tuple[FloatArray, FloatArray, float]
        最適値 (σ は推定値 √(E/3n) に置き換え)、自由成分についてのヤコビアン、σ の推定値です。
    """
    free_model = free[:-1]
    base = np.array(start, dtype=np.float64)

    def fun(x_free: FloatArray) -> FloatArray:
        vector = base.copy()
        vector[:-1][free_model] = x_free
        return posterior.residuals(vector).ravel()

    fit = least_squares(fun, base[:-1][free_model], method="trf", x_scale="jac")
    optimum = base.copy()
    optimum[:-1][free_model] = fit.x
    n_rows = fit.fun.shape[0]
    sigma_hat = math.sqrt(max(cost(fit.fun), 1e-300) / n_rows)
    optimum[-1] = sigma_hat
    logger.info(
        f"Least-squares warm start: cost {cost(fit.fun):.6f} mm^2, sigma {sigma_hat:.6f} mm ({fit.nfev} evaluations)"
    )
    return optimum, np.asarray(fit.jac, dtype=np.float64), sigma_hat


def laplace_factor(jacobian: FloatArray, sigma_hat: float, free: np.ndarray) -> FloatArray:
    """
    ラプラス近似の共分散 σ̂²(JᵀJ)⁻¹ の平方根を提案の前処理行列として返します。

    Parameters
    ----------
    jacobian : FloatArray
        自由成分 (σ を除く) についての誤差のヤコビアンです。
    sigma_hat : float
        σ の推定値 (mm) です。
    free : np.ndarray
        σ を含む各成分を動かすかどうかです。

    Returns
    -------
    FloatArray
        形状 (d, m) の行列 L で、L·Lᵀ が近似共分散になります。固定成分の行は 0 です。

    Notes
    -----
    J = U·S·Vᵀ から L = σ̂·V·S⁻¹ とします。σ の標準偏差は σ̂/√(2·3n) で近似します。
    """
    d = free.shape[0]
    free_model = np.flatnonzero(free[:-1])
    _, singular_values, vt = np.linalg.svd(jacobian, full_matrices=False)
    floor = max(float(singular_values[0]) * _SINGULAR_VALUE_FLOOR, np.finfo(float).tiny)
    block = sigma_hat * vt.T / np.maximum(singular_values, floor)

    columns = block.shape[1] + (1 if free[-1] else 0)
    factor = np.zeros((d, columns))
    factor[free_model, : block.shape[1]] = block
    if free[-1]:
        factor[-1, -1] = sigma_hat / math.sqrt(2.0 * jacobian.shape[0])
    return factor


def metropolis_sample(
    dataset: CalibrationDataset,
    chain: DHChain,
    initial_transform: RigidTransform,
    config: MCMCConfig,
    initial: ParameterVector | None = None,
) -> PosteriorTrace:
    """
    事後分布から Metropolis 法でサンプリングします。

    Parameters
    ----------
    dataset : CalibrationDataset
        校正データセットです。
    chain : DHChain
        名目上のロボットモデルです。
    initial_transform : RigidTransform
        初期変換 ᴺᵣT です。
    config : MCMCConfig
        サンプラーの設定です。
    initial : ParameterVector | None
        初期状態です。None の場合は Θ = 0、σ = config.initial_sigma です。

    Returns
    -------
    PosteriorTrace
        全ステップの記録です。

    Raises
    ------
    SamplerConfigError
        設定が不正な場合に発生します。

    Notes
    -----
    全パラメーターを同時に提案します。σ ≤ 0 の提案は棄却として記録されます。
    結果は seed だけで決まります。
    """
    names = parameter_names(chain.k)
    free = free_parameter_mask(names, config.fixed_parameters)
    posterior = CalibrationPosterior(dataset, chain, initial_transform)
    if initial is None:
        initial = ParameterVector.initial(chain.k, config.initial_sigma)
    start = initial.to_sampling_vector()
    if initial.k != chain.k:
        raise DimensionMismatchError("zero offsets", chain.k, initial.k)

    if config.init == "least_squares" or config.preconditioner == "laplace":
        optimum, jacobian, sigma_hat = least_squares_fit(posterior, start, free)
        if config.init == "least_squares":
            start = optimum
        if config.preconditioner == "laplace":
            factor = laplace_factor(jacobian, sigma_hat, free)
        else:
            factor = np.eye(len(names))[:, free]
    else:
        factor = np.eye(len(names))[:, free]

    sampler = MetropolisSampler(posterior, config.proposal_width, config.seed, factor)
    samples, accepted, log_values = sampler.run(start, config.n_steps)
    return PosteriorTrace(
        samples=samples,
        accepted=accepted,
        log_posterior=log_values,
        parameter_names=names,
        seed=config.seed,
        proposal_width=config.proposal_width,
        n_steps=config.n_steps,
        burn_in=config.burn_in,
        fixed_parameters=config.fixed_parameters,
    )


def summarize(trace: PosteriorTrace, burn_in: int | None = None) -> CalibrationResult:
    """
    burn-in 後のサンプルの平均と標準偏差を求めます。

    Parameters
    ----------
    trace : PosteriorTrace
        サンプラーの記録です。
    burn_in : int | None
        捨てる先頭のステップ数です。None の場合は trace.burn_in を使います。

    Returns
    -------
    CalibrationResult
        平均を推定値とする結果です。

    Raises
    ------
    SamplerConfigError
        burn_in が 0 以上 n_steps 未満でない場合に発生します。
    """
    cut = trace.burn_in if burn_in is None else burn_in
    if not 0 <= cut < trace.n_steps:
        raise SamplerConfigError(f"burn_in must satisfy 0 <= burn_in < {trace.n_steps}, got {cut}")
    retained = trace.samples[cut:]
    constant = np.ptp(retained, axis=0) == 0.0
    # 一定の成分は丸め誤差なしにその値を平均とします。
    mean = np.where(constant, retained[0], retained.mean(axis=0))
    std = retained.std(axis=0, ddof=1) if retained.shape[0] > 1 else np.zeros(retained.shape[1])
    std = np.where(constant, 0.0, std)
    return CalibrationResult(
        mle=ParameterVector.from_sampling_vector(mean),
        mean_vector=mean,
        std=std,
        post_burn_in_samples=retained,
        parameter_names=trace.parameter_names,
        acceptance_rate=trace.acceptance_rate,
        burn_in=cut,
        fixed_parameters=trace.fixed_parameters,
    )
