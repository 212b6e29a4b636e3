"""격자 탐색 기반 Hamiltonian 평가기

𝒰 × 𝒟 위의 최적화는 꼭짓점을 항상 포함하는 샘플 격자의 전수 탐색으로 합니다.
argmin/argmax 동점은 가장 낮은 격자 인덱스가 이깁니다.
"""

import logging
from typing import Optional, Tuple

import numpy as np

from models.system import ReducedSystem
from utils.exceptions import NumericalError
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")


class HamiltonianEvaluator:
    """축약 모델의 min-max / max-min Hamiltonian 평가기

    격자 전체 평가 시 노드별 𝒰×𝒟 격자의 F 값을 한 번만 계산해 캐시합니다.
    동역학이 시간에 의존하지 않으므로 캐시 사용 여부와 무관하게 결과는 동일합니다.
    """

    def __init__(self, red: ReducedSystem):
        """
        Args:
            red: 축약 모델 (또는 결합 SP 동역학을 감싼 일반 모델)
        """
        self.red = red
        self.u_lattice = red.u_set.lattice()
        self.d_lattice = red.d_set.lattice()
        self._grid_cache: Optional[np.ndarray] = None

    # ------------------------------------------------------------------
    # 단일 지점
    # ------------------------------------------------------------------
    def payoff_table(self, z, lam) -> np.ndarray:
        """λᵀF(z, u_i, d_j) 표, shape (|𝒰 격자|, |𝒟 격자|)"""
        z = ArrayValidator.vector(z, self.red.n_z, "z")
        lam = ArrayValidator.vector(lam, self.red.n_z, "lambda")
        table = np.empty((len(self.u_lattice), len(self.d_lattice)))
        for i, u in enumerate(self.u_lattice):
            for j, d in enumerate(self.d_lattice):
                value = np.asarray(self.red.F(z, u, d), dtype=float)
                if not np.all(np.isfinite(value)):
                    logger.error(f"비유한 F 값: z={z}, u={u}, d={d}")
                    raise NumericalError(
                        "non-finite F evaluation",
                        details={"z": z.tolist(), "u": u.tolist(), "d": d.tolist()}
                    )
                table[i, j] = lam @ value
        return table

    def hamiltonian_minmax(self, z, lam) -> float:
        """H(z, λ) = min_u max_d λᵀF(z, u, d)"""
        return float(self.payoff_table(z, lam).max(axis=1).min())

    def hamiltonian_maxmin(self, z, lam) -> float:
        """max_d min_u λᵀF(z, u, d)"""
        return float(self.payoff_table(z, lam).min(axis=0).max())

    def minmax_control(self, z, lam) -> Tuple[np.ndarray, float]:
        """min-max 최적화 제어 u*와 그때의 값 (동점은 낮은 인덱스)"""
        inner = self.payoff_table(z, lam).max(axis=1)
        index = int(np.argmin(inner))
        return self.u_lattice[index].copy(), float(inner[index])

    def worst_disturbance(self, z, lam, u) -> np.ndarray:
        """주어진 u에 대해 λᵀF를 최대화하는 외란 (동점은 낮은 인덱스)"""
        z = ArrayValidator.vector(z, self.red.n_z, "z")
        lam = ArrayValidator.vector(lam, self.red.n_z, "lambda")
        u = ArrayValidator.vector(u, self.red.n_u, "u")
        values = np.array([lam @ np.asarray(self.red.F(z, u, d), dtype=float) for d in self.d_lattice])
        return self.d_lattice[int(np.argmax(values))].copy()

    # ------------------------------------------------------------------
    # 격자 전체 (HJ 솔버용)
    # ------------------------------------------------------------------
    def bind_grid(self, states: np.ndarray) -> np.ndarray:
        """노드별 격자 F 값을 계산해 캐시, shape (|𝒰|, |𝒟|, n_dims, *shape)"""
        cache = np.empty((len(self.u_lattice), len(self.d_lattice)) + states.shape)
        for i, u in enumerate(self.u_lattice):
            for j, d in enumerate(self.d_lattice):
                cache[i, j] = np.broadcast_to(self.red.F(states, u, d), states.shape)
        if not np.all(np.isfinite(cache)):
            bad = np.argwhere(~np.isfinite(cache))[0]
            raise NumericalError(
                "non-finite F evaluation on grid",
                details={
                    "z": states[(slice(None),) + tuple(bad[3:])].tolist(),
                    "u": self.u_lattice[bad[0]].tolist(),
                    "d": self.d_lattice[bad[1]].tolist(),
                }
            )
        logger.debug(f"격자 F 캐시 생성: {cache.shape}")
        self._grid_cache = cache
        return cache

    def _bound_cache(self) -> np.ndarray:
        if self._grid_cache is None:
            raise RuntimeError("bind_grid()를 먼저 호출해야 합니다")
        return self._grid_cache

    def grid_hamiltonian(self, p: np.ndarray) -> np.ndarray:
        """노드별 H(z, p) = min_u max_d pᵀF, shape (*shape)"""
        values = np.einsum("ijk...,k...->ij...", self._bound_cache(), p)
        return values.max(axis=1).min(axis=0)

    def grid_dissipation(self) -> np.ndarray:
        """노드별 Lax-Friedrichs 소산 계수 αᵢ(z) = max |Fᵢ|, shape (n_dims, *shape)"""
        return np.abs(self._bound_cache()).max(axis=(0, 1))
