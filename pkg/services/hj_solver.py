"""시간 의존 Hamilton-Jacobi-Isaacs PDE 레벨셋 솔버

가치 함수 V(t, z) = sup_γ inf_u ℓ(z(0))는 순방향 시간에서 ∂ₜv + H(z, ∇v) = 0,
v(0, ·) = ℓ를 만족합니다. 역방향 시간 τ = −t로 쓰면 ∂_τ v = H(z, ∇v)이고,
각 양해(explicit) 스텝은 Δτ·Ĥ를 더합니다. 단조 국소 Lax-Friedrichs 수치 Hamiltonian:

    Ĥ = H(z, (p⁻ + p⁺)/2) + Σᵢ αᵢ(z) (pᵢ⁺ − pᵢ⁻)/2,   αᵢ(z) = max_{𝒰×𝒟 격자} |Fᵢ(z, u, d)|

시간 간격은 Δτ ≤ CFL / Σᵢ (αᵢ^max / Δxᵢ)이며 마지막 스텝은 t_final에 정확히 맞춥니다.

고스트 셀은 경계 노드 값을 복사합니다 (법선 방향 기울기 0). 매 스텝 이산 최대 원리
min ℓ − tol ≤ V ≤ max ℓ + tol을 검사하고 위반하면 MaximumPrincipleError를 발생시킵니다.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from config.settings import DEFAULT_CFL, MAX_FULL_DIMS, MIN_TIME_STEP, OVERSHOOT_TOL
from models.grid import Grid
from models.payoff import PayoffFn
from models.system import ReducedSystem, SPSystem
from models.value_field import ValueField
from services.dynamics_service import DynamicsService
from services.hamiltonian import HamiltonianEvaluator
from utils.exceptions import (
    ConfigurationError, DimensionError, DivergenceError, MaximumPrincipleError, ProgressError,
    SPReachError
)
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")

SCHEMES = ("euler", "rk2")


@dataclass
class SolveOptions:
    """HJ 솔버 옵션"""
    cfl: float = DEFAULT_CFL
    scheme: str = "euler"
    track_extremes: bool = True
    snapshot_times: Sequence[float] = field(default_factory=tuple)
    allow_high_dim: bool = False
    overshoot_tol: float = OVERSHOOT_TOL

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"알 수 없는 시간 적분: {self.scheme} (허용: {SCHEMES})",
                                     details={"field": "scheme"})
        if not 0 < self.cfl <= 1:
            raise ConfigurationError(f"CFL은 (0, 1] 범위여야 합니다: {self.cfl}", details={"field": "cfl"})

    def to_dict(self):
        return {
            "cfl": self.cfl,
            "scheme": self.scheme,
            "track_extremes": self.track_extremes,
            "snapshot_times": [float(t) for t in self.snapshot_times],
        }


class HJSolver:
    """축약/전체 가치 함수 솔버"""

    def __init__(self, options: Optional[SolveOptions] = None):
        """
        Args:
            options: 솔버 옵션 (None이면 기본값)
        """
        self.options = options or SolveOptions()

    def solve_reduced_value(
        self,
        red: ReducedSystem,
        ell: PayoffFn,
        grid: Grid,
        t_final: float
    ) -> ValueField:
        """축약 가치 함수 V̄(t_final, ·) 계산"""
        if grid.n_dims != red.n_z:
            raise DimensionError(
                f"격자 차원 {grid.n_dims}이 n_z={red.n_z}와 다릅니다",
                details={"field": "grid", "expected": red.n_z, "actual": grid.n_dims}
            )
        if ell.n_dims != red.n_z:
            raise DimensionError(
                f"보상 함수 차원 {ell.n_dims}이 n_z={red.n_z}와 다릅니다",
                details={"field": "payoff", "expected": red.n_z, "actual": ell.n_dims}
            )
        return self._solve(red, ell, grid, t_final, provenance="reduced", n_slow=red.n_z)

    def solve_full_value(
        self,
        sys: SPSystem,
        eps: float,
        ell: PayoffFn,
        grid: Grid,
        t_final: float
    ) -> ValueField:
        """결합 (z, y) 격자에서 V_ε(t_final, ·) 계산 (ℓ은 z에만 의존)"""
        eps = ArrayValidator.positive(eps, "eps")
        n_total = sys.n_z + sys.n_y
        if n_total > MAX_FULL_DIMS and not self.options.allow_high_dim:
            logger.error(f"전체 시스템 차원 {n_total} > {MAX_FULL_DIMS}")
            raise ConfigurationError(
                f"full solve is limited to n_z + n_y <= {MAX_FULL_DIMS} (got {n_total}); "
                "set allow_high_dim to override",
                details={"field": "allow_high_dim", "n_dims": n_total}
            )
        if grid.n_dims != n_total:
            raise DimensionError(
                f"격자 차원 {grid.n_dims}이 n_z + n_y = {n_total}와 다릅니다",
                details={"field": "grid", "expected": n_total, "actual": grid.n_dims}
            )
        if ell.n_dims != sys.n_z:
            raise DimensionError(
                f"보상 함수 차원 {ell.n_dims}이 n_z={sys.n_z}와 다릅니다",
                details={"field": "payoff", "expected": sys.n_z, "actual": ell.n_dims}
            )
        joint = DynamicsService.joint_system(sys, eps)
        field_ = self._solve(joint, ell, grid, t_final, provenance="full", n_slow=sys.n_z)
        field_.metadata["eps"] = eps
        return field_

    # ------------------------------------------------------------------
    # 내부 구현
    # ------------------------------------------------------------------
    def _solve(
        self,
        red: ReducedSystem,
        ell: PayoffFn,
        grid: Grid,
        t_final: float,
        provenance: str,
        n_slow: int
    ) -> ValueField:
        t_final = ArrayValidator.non_positive(t_final, "t_final")
        opts = self.options
        start = time.perf_counter()

        states = grid.states
        values = np.array(ell.on_grid(states), dtype=float)
        ArrayValidator.finite(values, "payoff")
        ell_min, ell_max = float(values.min()), float(values.max())

        running_min = values.copy() if opts.track_extremes else None
        running_max = values.copy() if opts.track_extremes else None
        snapshots: List[ValueField] = []
        horizon = -t_final

        stops = sorted({-float(s) for s in opts.snapshot_times if t_final < s < 0} | {horizon})
        wanted = {-float(s) for s in opts.snapshot_times}
        if 0.0 in wanted:
            snapshots.append(self._make_field(grid, 0.0, values, running_min, running_max,
                                              provenance, n_slow, {}))

        step = 0
        dt_max = 0.0
        if horizon > 0:
            evaluator = HamiltonianEvaluator(red)
            evaluator.bind_grid(states)
            dissipation = evaluator.grid_dissipation()
            spacing = grid.spacing
            rate = float(sum(dissipation[i].max() / spacing[i] for i in range(grid.n_dims)))
            dt_max = opts.cfl / rate if rate > 0 else horizon
            if dt_max < MIN_TIME_STEP:
                logger.error(f"CFL 시간 간격이 너무 작음: {dt_max:.3e}")
                raise ProgressError(
                    f"CFL time step underflow ({dt_max:.3e} < {MIN_TIME_STEP})",
                    details={"dt": dt_max, "rate": rate}
                )
            logger.info(
                f"HJ 풀이 시작 ({provenance}, {red.name}): 격자 {grid.shape}, "
                f"t_final={t_final}, Δτ≤{dt_max:.3e}, 스킴={opts.scheme}"
            )

            def rhs(v: np.ndarray) -> np.ndarray:
                return self._numerical_hamiltonian(v, evaluator, dissipation, spacing)

            tau = 0.0
            for stop in stops:
                while stop - tau > MIN_TIME_STEP * max(1.0, stop):
                    dt = min(dt_max, stop - tau)
                    if opts.scheme == "euler":
                        values = values + dt * rhs(values)
                    else:
                        stage = values + dt * rhs(values)
                        values = 0.5 * (values + stage + dt * rhs(stage))
                    tau = tau + dt
                    step += 1

                    if not np.all(np.isfinite(values)):
                        logger.error(f"HJ 풀이 발산: 스텝 {step}, t={-tau}")
                        raise DivergenceError(
                            f"non-finite values at step {step}",
                            details={"step": step, "t": -tau}
                        )
                    low, high = float(values.min()), float(values.max())
                    if low < ell_min - opts.overshoot_tol or high > ell_max + opts.overshoot_tol:
                        logger.error(
                            f"이산 최대 원리 위반: 스텝 {step}, t={-tau:.6g}, 값 범위 [{low:.4g}, {high:.4g}], "
                            f"ℓ 범위 [{ell_min:.4g}, {ell_max:.4g}]"
                        )
                        raise MaximumPrincipleError(
                            f"discrete maximum principle violated at step {step}",
                            details={"step": step, "t": -tau, "min": low, "max": high,
                                     "payoff_min": ell_min, "payoff_max": ell_max,
                                     "tolerance": opts.overshoot_tol}
                        )
                    if running_min is not None:
                        np.minimum(running_min, values, out=running_min)
                        np.maximum(running_max, values, out=running_max)
                    if step % 1000 == 0:
                        logger.debug(f"스텝 {step}: t={-tau:.6f}")
                tau = stop
                if stop in wanted and stop != horizon:
                    snapshots.append(self._make_field(grid, -stop, values, running_min, running_max,
                                                      provenance, n_slow, {"steps": step}))

        elapsed = time.perf_counter() - start
        metadata = {
            "system": red.name,
            "options": opts.to_dict(),
            "steps": step,
            "dt_max": dt_max,
            "cfl": opts.cfl,
            "max_principle_ok": True,
            "value_range": [float(values.min()), float(values.max())],
        }
        logger.info(f"HJ 풀이 완료: {step} 스텝, {elapsed:.2f}초")
        return self._make_field(grid, t_final if horizon > 0 else 0.0, values, running_min,
                                running_max, provenance, n_slow, metadata,
                                snapshots=tuple(sorted(snapshots, key=lambda s: -s.time)))

    @staticmethod
    def _make_field(grid, t, values, running_min, running_max, provenance, n_slow, metadata,
                    snapshots=()) -> ValueField:
        return ValueField(
            grid=grid,
            time=float(t),
            values=values.copy(),
            running_min=None if running_min is None else running_min.copy(),
            running_max=None if running_max is None else running_max.copy(),
            provenance=provenance,
            n_slow=n_slow,
            metadata=dict(metadata),
            snapshots=snapshots,
        )

    @staticmethod
    def _numerical_hamiltonian(
        values: np.ndarray,
        evaluator: HamiltonianEvaluator,
        dissipation: np.ndarray,
        spacing: np.ndarray
    ) -> np.ndarray:
        """국소 Lax-Friedrichs 수치 Hamiltonian (역방향 시간 우변)"""
        n_dims = values.ndim
        p_mean = np.empty((n_dims,) + values.shape)
        result = np.zeros(values.shape)
        for axis in range(n_dims):
            padded = _fill_ghost(values, axis)
            diffs = np.diff(padded, axis=axis) / spacing[axis]
            p_minus = np.take(diffs, np.arange(0, values.shape[axis]), axis=axis)
            p_plus = np.take(diffs, np.arange(1, values.shape[axis] + 1), axis=axis)
            p_mean[axis] = 0.5 * (p_minus + p_plus)
            result += 0.5 * dissipation[axis] * (p_plus - p_minus)
        result += evaluator.grid_hamiltonian(p_mean)
        return result


def _fill_ghost(values: np.ndarray, axis: int) -> np.ndarray:
    """한 겹의 고스트 셀을 경계 노드 값으로 채운 배열

    경계 노드에서 바깥쪽 단측 기울기가 0이 되어 국소 LF 갱신의 모든 이웃 가중치가
    CFL ≤ 1에서 음이 아닙니다.
    """
    pad = [(0, 0)] * values.ndim
    pad[axis] = (1, 1)
    return np.pad(values, pad, mode="edge")


def value_gap(full_field: ValueField, reduced_field: ValueField) -> float:
    """sup |V_ε − V̄| (V̄를 y 방향으로 확장해 공유 격자 노드에서 비교)"""
    if full_field.provenance != "full" or reduced_field.provenance != "reduced":
        raise ConfigurationError("value_gap에는 전체 필드와 축약 필드가 필요합니다",
                                 details={"field": "provenance"})
    n_z = full_field.n_slow
    z_dims = list(range(n_z))
    if reduced_field.grid.n_dims != n_z or not full_field.grid.same_axes(reduced_field.grid, z_dims, z_dims):
        raise ConfigurationError("z 축 격자가 일치하지 않습니다", details={"field": "grid"})
    extra = full_field.values.ndim - n_z
    broadcast = reduced_field.values.reshape(reduced_field.values.shape + (1,) * extra)
    return float(np.max(np.abs(full_field.values - broadcast)))


def epsilon_sweep(
    solver: HJSolver,
    sys: SPSystem,
    eps_values: Sequence[float],
    ell: PayoffFn,
    full_grid: Grid,
    reduced_field: ValueField,
    t_final: float
) -> List[dict]:
    """ε 값별 sup |V_ε − V̄| (ε → 0 수렴 경향 확인)"""
    results = []
    for eps in eps_values:
        try:
            full = solver.solve_full_value(sys, eps, ell, full_grid, t_final)
        except SPReachError:
            raise
        except Exception as e:
            raise DivergenceError(f"ε={eps} 전체 풀이 실패: {e}", original_error=e)
        gap = value_gap(full, reduced_field)
        logger.info(f"ε={eps:g}: sup|V_ε − V̄| = {gap:.6f}")
        results.append({"eps": float(eps), "gap": gap})
    return results
