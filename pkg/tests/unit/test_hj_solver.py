"""HJSolver 단위 테스트

1차원 해석해 비교, 종단 조건, 스냅샷/running 극값, 차원 제한을 테스트합니다.
"""

import numpy as np
import pytest

from models.box_set import BoxSet
from models.grid import Grid
from models.system import SPSystem, broadcast_batch
from models.value_field import ValueField
from services.dynamics_service import DynamicsService
from services.hj_solver import HJSolver, SolveOptions, value_gap
from services.model_catalog import make_genetic_circuit, make_integrator, make_mrn
from services.payoff_builder import build_payoff_box
from utils.exceptions import (
    ConfigurationError, DimensionError, DomainError, MaximumPrincipleError, NumericalError
)


def _integrator_problem(nodes: int = 401):
    """ż = u, 𝒰 = [−1, 1], 𝒟 = {0}, ℓ = min(|z| − 0.25, 3)"""
    red = DynamicsService.derive_reduced(make_integrator())
    ell = build_payoff_box([-0.25], [0.25], slope=1.0, cap=3.0)
    grid = Grid((nodes,), (-1.0,), (1.0,))
    return red, ell, grid


def _exact_integrator_value(z: np.ndarray, t: float) -> np.ndarray:
    return np.minimum(np.maximum(np.abs(z) + t, 0.0) - 0.25, 3.0)


class TestAnalyticOracle:
    """1차원 제어 eikonal 문제 해석해 비교"""

    @pytest.mark.parametrize("scheme, tolerance", [("euler", 0.02), ("rk2", 0.025)])
    def test_integrator_matches_analytic_value(self, scheme, tolerance):
        """401 노드, t = −0.5에서 최대 오차: Euler ≤ 0.02, RK2 ≤ 0.025"""
        red, ell, grid = _integrator_problem()
        solver = HJSolver(SolveOptions(scheme=scheme))

        field = solver.solve_reduced_value(red, ell, grid, -0.5)
        error = np.max(np.abs(field.values - _exact_integrator_value(grid.axis(0), -0.5)))

        assert field.time == -0.5
        assert error <= tolerance, f"최대 오차 {error:.4f}"

    def test_grid_refinement_reduces_error(self):
        """노드 수를 두 배로 할 때마다 최대 오차가 1.4 ~ 2.6배 감소"""
        errors = []
        for nodes in (101, 201, 401):
            red, ell, grid = _integrator_problem(nodes)
            field = HJSolver().solve_reduced_value(red, ell, grid, -0.5)
            errors.append(np.max(np.abs(field.values - _exact_integrator_value(grid.axis(0), -0.5))))

        ratios = [coarse / fine for coarse, fine in zip(errors, errors[1:])]

        assert all(1.4 <= r <= 2.6 for r in ratios), f"오차 {errors}, 비율 {ratios}"

    def test_flat_region_value(self):
        """z = 0.25에서 정확한 값 −0.25"""
        red, ell, grid = _integrator_problem()

        field = HJSolver().solve_reduced_value(red, ell, grid, -0.5)

        assert field.values[250] == pytest.approx(-0.25, abs=0.02)

    def test_symmetric_problem_gives_even_field(self):
        """대칭 보상과 대칭 동역학이면 필드도 짝함수"""
        red, ell, grid = _integrator_problem(201)

        field = HJSolver().solve_reduced_value(red, ell, grid, -0.3)

        assert np.max(np.abs(field.values - field.values[::-1])) <= 1e-10


class TestTerminalCondition:
    """종단 조건 테스트"""

    def test_zero_horizon_returns_payoff(self):
        """t = 0이면 노드의 ℓ 값 그대로"""
        red, ell, grid = _integrator_problem(41)

        field = HJSolver().solve_reduced_value(red, ell, grid, 0.0)

        assert np.array_equal(field.values, ell.on_grid(grid.states))
        assert np.array_equal(field.running_min, field.values)
        assert np.array_equal(field.running_max, field.values)
        assert field.metadata["steps"] == 0

    def test_positive_time_raises(self):
        """t_final > 0은 DomainError"""
        red, ell, grid = _integrator_problem(41)

        with pytest.raises(DomainError):
            HJSolver().solve_reduced_value(red, ell, grid, 0.1)


class TestRunningExtremes:
    """running 극값과 스냅샷 테스트"""

    def setup_method(self):
        """각 테스트 전에 실행"""
        self.red = DynamicsService.derive_reduced(make_genetic_circuit())
        self.ell = build_payoff_box([0.25], [0.75], slope=10.0, cap=3.0)
        self.grid = Grid((101,), (0.0,), (1.0,))

    def test_extremes_bracket_values(self):
        """running_min ≤ values ≤ running_max"""
        field = HJSolver().solve_reduced_value(self.red, self.ell, self.grid, -0.5)

        assert field.has_extremes
        assert np.all(field.running_min <= field.values)
        assert np.all(field.values <= field.running_max)

    def test_snapshots_are_stored(self):
        """요청한 시각의 스냅샷 (t_final 제외, 시간 내림차순)"""
        solver = HJSolver(SolveOptions(snapshot_times=(0.0, -0.25, -0.5)))

        field = solver.solve_reduced_value(self.red, self.ell, self.grid, -0.5)

        assert [s.time for s in field.snapshots] == [0.0, -0.25]
        assert np.array_equal(field.snapshots[0].values, self.ell.on_grid(self.grid.states))
        assert np.all(field.running_min <= field.snapshots[1].running_min)

    def test_snapshot_matches_direct_solve(self):
        """t = −0.25 스냅샷은 t_final = −0.25 풀이와 같음"""
        snapped = HJSolver(SolveOptions(snapshot_times=(-0.25,))).solve_reduced_value(
            self.red, self.ell, self.grid, -0.5
        )
        direct = HJSolver().solve_reduced_value(self.red, self.ell, self.grid, -0.25)

        assert np.allclose(snapped.snapshots[0].values, direct.values, rtol=0, atol=1e-12)

    def test_extremes_can_be_disabled(self):
        """track_extremes=False"""
        field = HJSolver(SolveOptions(track_extremes=False)).solve_reduced_value(
            self.red, self.ell, self.grid, -0.1
        )

        assert not field.has_extremes

    def test_discrete_maximum_principle(self):
        """값은 ℓ 범위 안 (허용 오차 1e−3)"""
        field = HJSolver().solve_reduced_value(self.red, self.ell, self.grid, -0.5)

        assert field.metadata["max_principle_ok"]
        assert field.values.min() >= -2.5 - 1e-3
        assert field.values.max() <= 3.0 + 1e-3


def _constant_drift_system() -> SPSystem:
    """ż = (1, 1, 1): 모든 경계가 유출 경계, 빠른 상태는 분리"""
    return SPSystem(
        name="constant_drift", n_z=3, n_y=1,
        f=lambda z, u, d: np.ones_like(z),
        g=lambda z, u, d: np.zeros((1,) + np.shape(z)[1:]),
        M=lambda z: broadcast_batch(np.zeros((3, 1)), np.shape(z)[1:]),
        A=lambda z, u, d: broadcast_batch([[-1.0]], np.shape(z)[1:]),
        u_set=BoxSet((0.0,), (0.0,)), d_set=BoxSet((0.0,), (0.0,)),
    )


def _linear_ghost(values: np.ndarray, axis: int) -> np.ndarray:
    """선형 외삽 고스트 (유출 경계에서 단조성이 깨지는 채움)"""
    first = np.take(values, [0], axis=axis)
    second = np.take(values, [1], axis=axis)
    last = np.take(values, [-1], axis=axis)
    before_last = np.take(values, [-2], axis=axis)
    return np.concatenate([2.0 * first - second, values, 2.0 * last - before_last], axis=axis)


class TestMaximumPrinciple:
    """3차원 이산 최대 원리 테스트"""

    def setup_method(self):
        """각 테스트 전에 실행"""
        self.grid = Grid.uniform(3, 21, -1.0, 1.0)
        self.ell = build_payoff_box([-0.2] * 3, [0.2] * 3, slope=1.0, cap=10.0)
        self.red = DynamicsService.derive_reduced(_constant_drift_system())

    def test_outflow_boundary_stays_in_payoff_range(self):
        """모든 경계가 유출이어도 값은 격자 위 ℓ 범위 안"""
        ell_values = self.ell.on_grid(self.grid.states)

        field = HJSolver().solve_reduced_value(self.red, self.ell, self.grid, -0.2)

        assert field.metadata["max_principle_ok"]
        assert field.values.min() >= ell_values.min() - 1e-12
        assert field.values.max() <= ell_values.max() + 1e-12
        low, high = field.metadata["value_range"]
        assert low == pytest.approx(field.values.min())
        assert high == pytest.approx(field.values.max())

    def test_violation_raises_inside_step_loop(self, monkeypatch):
        """단조성이 깨진 경계 채움이면 첫 위반 스텝에서 MaximumPrincipleError"""
        monkeypatch.setattr("services.hj_solver._fill_ghost", _linear_ghost)

        with pytest.raises(MaximumPrincipleError) as exc_info:
            HJSolver().solve_reduced_value(self.red, self.ell, self.grid, -0.2)

        details = exc_info.value.details
        assert details["max"] > details["payoff_max"] + details["tolerance"]
        assert -0.2 <= details["t"] < 0.0
        assert isinstance(exc_info.value, NumericalError)

    def test_mrn_reduced_solve_respects_payoff_range(self):
        """대사 반응 네트워크 3차원 축약 풀이: min ℓ − 1e−3 ≤ V̄ ≤ max ℓ + 1e−3"""
        sys = make_mrn([("m1", "m2", 1.0), ("m2", "p", 1.0)], seed=7)
        red = DynamicsService.derive_reduced(sys)
        ell = build_payoff_box([None, 0.4, 0.4], [None, 0.6, 0.6], slope=10.0, cap=4.0, free_dims=[0])
        grid = Grid.uniform(3, 11, 0.0, 1.0)
        ell_values = ell.on_grid(grid.states)

        field = HJSolver().solve_reduced_value(red, ell, grid, -0.5)

        assert field.metadata["max_principle_ok"]
        assert field.values.min() >= ell_values.min() - 1e-3
        assert field.values.max() <= ell_values.max() + 1e-3


class TestGuards:
    """입력 검증 테스트"""

    def test_grid_dimension_mismatch(self):
        """격자 차원 ≠ n_z"""
        red = DynamicsService.derive_reduced(make_genetic_circuit())
        ell = build_payoff_box([0.25], [0.75], slope=10.0, cap=3.0)

        with pytest.raises(DimensionError):
            HJSolver().solve_reduced_value(red, ell, Grid.uniform(2, 5, 0.0, 1.0), -0.1)

    def test_full_solve_dimension_limit(self):
        """n_z + n_y > 3이면 allow_high_dim 없이 ConfigurationError"""
        sys = make_mrn([("m1", "m2", 1.0), ("m2", "p", 1.0)])
        ell = build_payoff_box([None, 0.4, 0.4], [None, 0.6, 0.6], slope=10.0, cap=4.0, free_dims=[0])

        with pytest.raises(ConfigurationError) as exc_info:
            HJSolver().solve_full_value(sys, 0.1, ell, Grid.uniform(5, 3, 0.0, 1.0), -0.1)

        assert exc_info.value.details["field"] == "allow_high_dim"

    def test_unknown_scheme(self):
        """알 수 없는 시간 적분"""
        with pytest.raises(ConfigurationError):
            SolveOptions(scheme="rk9")


class TestFullSolve:
    """전체 (z, y) 풀이 테스트"""

    def test_decoupled_fast_state_matches_reduced(self):
        """빠른 상태가 분리된 적분기: V_ε는 y에 무관하고 V̄에 가까움"""
        sys = make_integrator()
        ell = build_payoff_box([-0.25], [0.25], slope=1.0, cap=3.0)
        solver = HJSolver()
        reduced = solver.solve_reduced_value(DynamicsService.derive_reduced(sys), ell,
                                             Grid((41,), (-1.0,), (1.0,)), -0.3)

        full = solver.solve_full_value(sys, 0.5, ell, Grid((41, 11), (-1.0, -1.0), (1.0, 1.0)), -0.3)

        assert full.provenance == "full"
        assert full.n_slow == 1
        assert full.metadata["eps"] == 0.5
        # 검증: y 방향으로 일정
        assert np.max(np.abs(full.values - full.values[:, :1])) <= 1e-12
        # 시간 간격이 달라 수치 확산만큼 차이
        assert value_gap(full, reduced) <= 0.1

    def test_value_gap_requires_matching_axes(self):
        """z 축이 다른 필드 비교는 ConfigurationError"""
        reduced = ValueField(grid=Grid((5,), (0.0,), (1.0,)), time=0.0, values=np.zeros(5))
        full = ValueField(grid=Grid((7, 3), (0.0, 0.0), (1.0, 1.0)), time=0.0, values=np.zeros((7, 3)),
                          provenance="full", n_slow=1)

        with pytest.raises(ConfigurationError):
            value_gap(full, reduced)
