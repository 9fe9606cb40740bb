"""誤差行列、対数事後確率、Metropolis サンプリングと要約をテストします。"""

import math
from dataclasses import replace

import numpy as np
import pytest

from src.exceptions import InvalidParameterError, SamplerConfigError
from src.models.calibration import (
    MCMCConfig,
    ParameterVector,
    PosteriorTrace,
    RegistrationCorrection,
    parameter_names,
)
from src.services.calibration import (
    CalibrationPosterior,
    cost,
    free_parameter_mask,
    laplace_factor,
    least_squares_fit,
    log_posterior,
    log_posterior_from_cost,
    metropolis_sample,
    residual_matrix,
    summarize,
)
from src.services.simulator import SceneSimulator, build_dataset, ground_truth_parameters

from .helpers import TRUE_OFFSETS_DEG, indexed, interior_configs, make_scene


def scene_dataset(scene, n: int = 30, seed: int = 21):
    configs = interior_configs(scene.chain_nominal, n, seed)
    dataset = build_dataset(scene, indexed(configs))
    initial, _ = SceneSimulator(scene).initial_registration(dataset)
    return dataset, initial


def test_closed_loop_residual_is_zero(noiseless_scene):
    """真のパラメーターでは雑音のないデータの誤差が 0 になることをテストします。"""
    dataset, initial = scene_dataset(noiseless_scene)
    params = ground_truth_parameters(noiseless_scene, initial, 0.1)
    e = residual_matrix(dataset, noiseless_scene.chain_nominal, initial, params)
    assert e.shape == (len(dataset), 3)
    assert np.max(np.abs(e)) < 1e-9, f"誤差が 0 になりません: {np.max(np.abs(e))}"


@pytest.mark.parametrize("marker", ["flange", "sir"])
def test_last_joint_offset_moves_only_off_axis_markers(chain, marker):
    """第 7 関節のオフセットで軸から離れたマーカーだけが弦の長さだけ動くことをテストします。"""
    scene = make_scene(offsets_deg=(0.0,) * 7, marker=marker)
    configs = interior_configs(chain, 12, seed=4)
    dataset = build_dataset(scene, indexed(configs))
    delta = math.radians(0.477)
    params = ParameterVector(RegistrationCorrection(), [0.0] * 6 + [delta], 0.1)
    e = residual_matrix(dataset, chain, scene.robot_to_sensor, params)
    norms = np.linalg.norm(e, axis=1)
    expected = 0.0 if marker == "flange" else 2.0 * 100.0 * math.sin(delta / 2.0)
    np.testing.assert_allclose(norms, expected, atol=1e-9)


def test_cost_examples(rng):
    """コストの具体例と二重ループでの計算との一致をテストします。"""
    assert cost(np.zeros((4, 3))) == 0.0
    assert cost([[3.0, 4.0, 0.0]]) == 25.0
    e = rng.normal(0.0, 0.2, (50, 3))
    expected = 0.0
    for row in e:
        for value in row:
            expected += value * value
    assert cost(e) == pytest.approx(expected, rel=1e-12)


def test_log_posterior_examples():
    """対数事後確率の具体例をテストします。"""
    assert log_posterior_from_cost(0.0, 1, 1.0) == 0.0
    assert log_posterior_from_cost(8.0, 2, 2.0) == pytest.approx(-8.0 * math.log(2.0) - 1.0, rel=1e-14)


def test_log_posterior_ratio_matches_direct_form(rng):
    """対数形式の差が直接計算した確率の比と一致することをテストします。"""
    n = 5
    for _ in range(100):
        e1, e2 = rng.uniform(0.0, 10.0, 2)
        s1, s2 = rng.uniform(0.5, 2.0, 2)
        direct = (s1 ** (-3 * n - 2) * math.exp(-e1 / (2 * s1 * s1))) / (
            s2 ** (-3 * n - 2) * math.exp(-e2 / (2 * s2 * s2))
        )
        via_log = math.exp(log_posterior_from_cost(e1, n, s1) - log_posterior_from_cost(e2, n, s2))
        assert via_log == pytest.approx(direct, rel=1e-10)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_log_posterior_ratio_over_records_matches_direct_form(n):
    """1 から 3 レコードで、2 点の事後確率の比が σ^(−3n−2)·exp(−E/2σ²) の比と一致することをテストします。"""
    scene = make_scene(noise=0.1)
    dataset, initial = scene_dataset(scene, n=3, seed=30 + n)
    dataset = dataset.subset(np.arange(n))
    chain = scene.chain_nominal
    center = ground_truth_parameters(scene, initial, 1.0).to_sampling_vector()
    scale = np.r_[np.full(3, 0.05), np.full(10, 0.001), 0.0]
    rng = np.random.default_rng(100 + n)
    for _ in range(20):
        pair = []
        for _ in range(2):
            vector = center + rng.normal(0.0, scale)
            vector[-1] = rng.uniform(0.5, 2.0)
            pair.append(ParameterVector.from_sampling_vector(vector))
        direct = []
        for params in pair:
            e = residual_matrix(dataset, chain, initial, params)
            energy = float(np.sum(e * e))
            direct.append(params.sigma ** (-3 * n - 2) * math.exp(-energy / (2.0 * params.sigma**2)))
        via_log = math.exp(
            log_posterior(dataset, chain, initial, pair[0]) - log_posterior(dataset, chain, initial, pair[1])
        )
        expected = direct[0] / direct[1]
        assert abs(via_log - expected) <= 1e-10 * expected, f"比の相対誤差が大きすぎます: {via_log} と {expected}"


def test_log_form_survives_where_direct_form_overflows():
    """n = 170, σ = 0.1 で直接形式はオーバーフローしても対数形式は有限であることをテストします。"""
    n = 170
    with np.errstate(over="ignore"):
        direct = np.power(np.float64(0.1), -3 * n - 2)
    assert np.isinf(direct)
    assert math.isfinite(log_posterior_from_cost(10.0, n, 0.1))


def test_non_positive_sigma():
    """σ ≤ 0 はエラー、サンプリング用の関数では -inf になることをテストします。"""
    with pytest.raises(InvalidParameterError):
        log_posterior_from_cost(1.0, 3, 0.0)
    with pytest.raises(InvalidParameterError):
        ParameterVector(RegistrationCorrection(), np.zeros(7), -1.0)
    scene = make_scene()
    dataset, initial = scene_dataset(scene, n=6)
    posterior = CalibrationPosterior(dataset, scene.chain_nominal, initial)
    vector = ParameterVector.initial(7).to_sampling_vector()
    vector[-1] = 0.0
    assert posterior(vector) == -math.inf


def test_posterior_matches_log_posterior(noiseless_scene):
    """サンプリングベクトル版と ParameterVector 版の対数事後確率が一致することをテストします。"""
    dataset, initial = scene_dataset(noiseless_scene, n=9)
    params = ParameterVector(
        RegistrationCorrection(0.3, -0.2, 0.1, 0.001, -0.002, 0.003), np.radians(TRUE_OFFSETS_DEG), 0.4
    )
    posterior = CalibrationPosterior(dataset, noiseless_scene.chain_nominal, initial)
    expected = log_posterior(dataset, noiseless_scene.chain_nominal, initial, params)
    assert posterior(params.to_sampling_vector()) == pytest.approx(expected, rel=1e-12)


def test_parameter_vector_units():
    """サンプリングベクトルが mm と度で並ぶことをテストします。"""
    params = ParameterVector(RegistrationCorrection(1.0, 2.0, 3.0, math.pi / 2, 0.0, -math.pi / 4), [math.pi] * 7, 0.5)
    vector = params.to_sampling_vector()
    np.testing.assert_allclose(vector[:6], [1.0, 2.0, 3.0, 90.0, 0.0, -45.0])
    np.testing.assert_allclose(vector[6:13], 180.0)
    assert vector[13] == 0.5
    back = ParameterVector.from_sampling_vector(vector)
    np.testing.assert_allclose(back.theta2, params.theta2, rtol=1e-15)


def test_free_parameter_mask():
    names = parameter_names(7)
    mask = free_parameter_mask(names, ("dtheta1",))
    assert mask.sum() == len(names) - 1
    assert not mask[names.index("dtheta1")]
    with pytest.raises(SamplerConfigError):
        free_parameter_mask(names, ("dtheta9",))


def test_laplace_factor_covariance():
    """前処理行列 L·Lᵀ が σ̂²(JᵀJ)⁻¹ と σ の近似分散になることをテストします。"""
    jacobian = np.array([[2.0, 0.0], [0.0, 4.0], [0.0, 0.0]])
    free = np.array([True, False, True, True])
    factor = laplace_factor(jacobian, 1.0, free)
    covariance = factor @ factor.T
    np.testing.assert_allclose(covariance, np.diag([0.25, 0.0, 1.0 / 16.0, 1.0 / 6.0]), atol=1e-15)


def test_least_squares_recovers_offsets(noiseless_scene):
    """雑音のないデータで最小二乗がベース以外のゼロオフセットを復元することをテストします。"""
    dataset, initial = scene_dataset(noiseless_scene, n=30)
    names = parameter_names(7)
    free = free_parameter_mask(names, ("dtheta1",))
    posterior = CalibrationPosterior(dataset, noiseless_scene.chain_nominal, initial)
    optimum, _, sigma_hat = least_squares_fit(posterior, ParameterVector.initial(7).to_sampling_vector(), free)
    np.testing.assert_allclose(optimum[7:13], TRUE_OFFSETS_DEG[1:], atol=1e-4)
    assert optimum[6] == 0.0
    assert sigma_hat < 1e-6


def test_laplace_spread_shrinks_with_more_data():
    """レコードを増やすと近似共分散が小さくなることをテストします。"""
    scene = make_scene(noise=0.1)
    dataset, initial = scene_dataset(scene, n=150, seed=5)
    names = parameter_names(7)
    free = free_parameter_mask(names, ("dtheta1",))
    start = ParameterVector.initial(7).to_sampling_vector()
    variances = []
    for rows in (np.arange(50), np.arange(150)):
        posterior = CalibrationPosterior(dataset.subset(rows), scene.chain_nominal, initial)
        _, jacobian, sigma_hat = least_squares_fit(posterior, start, free)
        factor = laplace_factor(jacobian, sigma_hat, free)
        variances.append(np.sum(factor**2, axis=1))
    assert np.all(variances[1][7:13] < variances[0][7:13])


def small_run(seed: int) -> PosteriorTrace:
    scene = make_scene(noise=0.1)
    dataset, initial = scene_dataset(scene, n=24)
    config = MCMCConfig(n_steps=300, burn_in=100, proposal_width=0.0125, seed=seed)
    return metropolis_sample(dataset, scene.chain_nominal, initial, config)


def test_metropolis_sample_is_deterministic():
    """同じシードなら連鎖全体がビット単位で一致することをテストします。"""
    a = small_run(3)
    b = small_run(3)
    c = small_run(4)
    assert np.array_equal(a.samples, b.samples)
    assert np.array_equal(a.accepted, b.accepted)
    assert not np.array_equal(a.samples, c.samples)
    assert a.samples.shape == (300, 14)
    assert a.parameter_names == parameter_names(7)


def test_metropolis_sample_keeps_fixed_parameter():
    """固定したパラメーターは連鎖全体で初期値のままであることをテストします。"""
    scene = make_scene(noise=0.1)
    dataset, initial = scene_dataset(scene, n=24)
    config = MCMCConfig(
        n_steps=300,
        burn_in=100,
        proposal_width=1.0,
        seed=3,
        init="least_squares",
        preconditioner="laplace",
        fixed_parameters=("dtheta1",),
    )
    trace = metropolis_sample(dataset, scene.chain_nominal, initial, config)
    assert np.all(trace.samples[:, 6] == 0.0)
    assert 0.0 < trace.acceptance_rate < 1.0
    assert trace.fixed_parameters == ("dtheta1",)


def test_sampled_spread_shrinks_with_more_records():
    """CI プロファイルで 50 から 170 レコードに増やすと各オフセットの事後標準偏差が広がらないことをテストします。"""
    scene = make_scene(noise=0.1)
    config = replace(MCMCConfig.for_profile("ci"), n_steps=4000, burn_in=1000)
    spreads = {}
    for n in (50, 170):
        dataset, initial = scene_dataset(scene, n=n, seed=8)
        trace = metropolis_sample(dataset, scene.chain_nominal, initial, config)
        spreads[n] = summarize(trace).offsets_std_deg
    for name, small, large in zip(parameter_names(7)[7:13], spreads[50][1:], spreads[170][1:], strict=True):
        assert large <= 1.1 * small, f"{name} の標準偏差が {small:.5f} から {large:.5f} deg に広がりました"


def make_trace(samples: np.ndarray, burn_in: int) -> PosteriorTrace:
    n_steps = samples.shape[0]
    return PosteriorTrace(
        samples=samples,
        accepted=np.ones(n_steps, dtype=bool),
        log_posterior=np.zeros(n_steps),
        parameter_names=parameter_names(7),
        seed=0,
        proposal_width=0.0125,
        n_steps=n_steps,
        burn_in=burn_in,
    )


def test_summarize_constant_trace():
    """一定のトレースでは平均がその値そのもので、標準偏差が 0 になることをテストします。"""
    row = np.array([0.1, 0.2, 0.3, 0.01, 0.02, 0.03] + list(TRUE_OFFSETS_DEG) + [0.1])
    result = summarize(make_trace(np.tile(row, (10, 1)), burn_in=2))
    assert np.array_equal(result.mean_vector, row)
    assert np.all(result.std == 0.0)
    assert result.post_burn_in_samples.shape == (8, 14)
    np.testing.assert_array_equal(result.offsets_deg, TRUE_OFFSETS_DEG)


def test_summarize_statistics(rng):
    """burn-in 後のサンプルの平均と不偏標準偏差を返すことをテストします。"""
    samples = rng.normal(1.0, 0.5, (400, 14))
    samples[:, -1] = 0.2
    result = summarize(make_trace(samples, burn_in=100))
    retained = samples[100:]
    np.testing.assert_allclose(result.mean_vector[:-1], retained[:, :-1].mean(axis=0), rtol=1e-12)
    np.testing.assert_allclose(result.std[:-1], retained[:, :-1].std(axis=0, ddof=1), rtol=1e-12)
    assert result.mle.sigma == 0.2
    assert summarize(make_trace(samples, burn_in=100), burn_in=0).post_burn_in_samples.shape == (400, 14)


@pytest.mark.parametrize("burn_in", [-1, 400])
def test_summarize_rejects_bad_burn_in(rng, burn_in):
    samples = rng.normal(0.0, 1.0, (400, 14))
    samples[:, -1] = 1.0
    with pytest.raises(SamplerConfigError):
        summarize(make_trace(samples, burn_in=100), burn_in=burn_in)


def test_mcmc_config_validation():
    """不正な MCMC 設定がエラーになることをテストします。"""
    with pytest.raises(SamplerConfigError):
        MCMCConfig(n_steps=10, burn_in=10)
    with pytest.raises(SamplerConfigError):
        MCMCConfig(n_steps=10, burn_in=2, proposal_width=0.0)
    with pytest.raises(SamplerConfigError):
        MCMCConfig(n_steps=10, burn_in=2, init="random")
    with pytest.raises(SamplerConfigError):
        MCMCConfig(n_steps=10, burn_in=2, preconditioner="adaptive")
    with pytest.raises(SamplerConfigError):
        MCMCConfig.for_profile("nightly")


def test_mcmc_profiles():
    """ci と paper のプロファイルの既定値をテストします。"""
    ci = MCMCConfig.for_profile("ci")
    assert (ci.n_steps, ci.burn_in, ci.proposal_width) == (20_000, 15_000, 1.0)
    assert (ci.init, ci.preconditioner, ci.fixed_parameters) == ("least_squares", "laplace", ("dtheta1",))
    paper = MCMCConfig.for_profile("paper", seed=9)
    assert (paper.n_steps, paper.burn_in, paper.proposal_width) == (200_000, 175_000, 0.0125)
    assert (paper.init, paper.preconditioner, paper.fixed_parameters, paper.seed) == ("zero", "identity", (), 9)
