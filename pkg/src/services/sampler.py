"""対数密度を対象とする Metropolis サンプラーです。

提案は x' = x + L·u (u ~ U(−w, w)ᵐ) で、L は固定の前処理行列です。
提案分布は対称なので受理確率は min(1, exp(Δ)) で、比較はすべて対数空間で行います。
"""

from __future__ import annotations

import math

import numpy as np
from numpy.typing import ArrayLike

from ..common import LogDensity, LoggingMixin, ProgressMixin
from ..exceptions import SamplerConfigError
from ..models.kinematics import FloatArray

_PROGRESS_INTERVAL = 10_000


class MetropolisSampler(LoggingMixin, ProgressMixin):
    """
    固定の一様ボックス提案を使う Metropolis サンプラーです。

    Parameters
    ----------
    log_density : LogDensity
        状態ベクトルの対数密度です。許容範囲外では -inf を返します。
    proposal_width : float
        一様提案の半幅 w です。
    seed : int
        乱数シードです。
    proposal_factor : ArrayLike | None
        形状 (d, m) の前処理行列 L です。None の場合は単位行列です。
        固定したい成分は L の行を 0 にします。
    """

    def __init__(
        self,
        log_density: LogDensity,
        proposal_width: float,
        seed: int,
        proposal_factor: ArrayLike | None = None,
    ) -> None:
        super().__init__()
        if not (math.isfinite(proposal_width) and proposal_width > 0.0):
            raise SamplerConfigError(f"proposal_width must be positive, got {proposal_width}")
        self._log_density = log_density
        self._width = float(proposal_width)
        self._seed = seed
        self._factor = None if proposal_factor is None else np.asarray(proposal_factor, dtype=np.float64)

    def run(self, initial: ArrayLike, n_steps: int) -> tuple[FloatArray, np.ndarray, FloatArray]:
        """
        連鎖を実行します。

        Parameters
        ----------
        initial : ArrayLike
            初期状態です。
        n_steps : int
            ステップ数です。

        Returns
        -------
        tuple[FloatArray, np.ndarray, FloatArray]
            各ステップ後の状態 (n_steps, d)、受理フラグ、対数密度です。

        Raises
        ------
        SamplerConfigError
            初期状態の対数密度が有限でない場合、またはステップ数が 1 未満の場合に発生します。
        """
        if n_steps < 1:
            raise SamplerConfigError(f"n_steps must be positive, got {n_steps}")
        current = np.array(initial, dtype=np.float64)
        d = current.shape[0]
        factor = np.eye(d) if self._factor is None else self._factor
        if factor.shape[0] != d:
            raise SamplerConfigError(f"Proposal factor has {factor.shape[0]} rows for a {d}-dimensional state")
        m = factor.shape[1]
        current_log = float(self._log_density(current))
        if not math.isfinite(current_log):
            raise SamplerConfigError("Initial state has a non-finite log density")

        rng = np.random.default_rng(self._seed)
        samples = np.empty((n_steps, d))
        accepted = np.zeros(n_steps, dtype=bool)
        log_values = np.empty(n_steps)
        for step in range(n_steps):
            proposal = current + factor @ rng.uniform(-self._width, self._width, size=m)
            proposal_log = float(self._log_density(proposal))
            # 1 − U(0, 1) は (0, 1] に入るので対数が常に定義されます。
            log_u = math.log(1.0 - rng.random())
            if log_u < proposal_log - current_log:
                current, current_log = proposal, proposal_log
                accepted[step] = True
            samples[step] = current
            log_values[step] = current_log
            if (step + 1) % _PROGRESS_INTERVAL == 0:
                self.report_progress("metropolis", step + 1, n_steps)

        self.log_info(f"Finished {n_steps} steps (seed {self._seed}), acceptance rate {accepted.mean():.3f}")
        return samples, accepted, log_values
