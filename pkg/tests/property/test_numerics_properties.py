"""수치 구성 요소 속성 기반 테스트

상자 격자, 종단 보상, Hamiltonian, 보간의 보편적 속성을 검증합니다.
"""

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from models.box_set import BoxSet
from models.grid import Grid
from models.system import ReducedSystem
from models.value_field import ValueField
from services.dynamics_service import DynamicsService
from services.field_sampler import interpolate_value
from services.hamiltonian import HamiltonianEvaluator
from services.model_catalog import make_genetic_circuit
from services.payoff_builder import build_payoff_box

bounded = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)


@st.composite
def boxes(draw, max_dim=3):
    dim = draw(st.integers(1, max_dim))
    lower, upper = [], []
    for _ in range(dim):
        a, b = draw(bounded), draw(bounded)
        lower.append(min(a, b))
        upper.append(max(a, b))
    return BoxSet(tuple(lower), tuple(upper), draw(st.integers(2, 4)))


class TestBoxSetProperties:
    """상자 집합 속성"""

    @settings(max_examples=100)
    @given(boxes())
    def test_lattice_contains_vertices(self, box):
        """샘플 격자는 모든 꼭짓점을 포함하고 상자 안에 있음"""
        lattice = box.lattice()
        points = {tuple(p) for p in lattice}

        assert {tuple(v) for v in box.vertices()} <= points
        assert all(box.contains(p) for p in lattice)


class TestPayoffProperties:
    """종단 보상 속성"""

    @settings(max_examples=100)
    @given(bounded, st.floats(min_value=0.1, max_value=5.0), st.floats(min_value=0.1, max_value=20.0),
           st.floats(min_value=0.1, max_value=10.0), bounded)
    def test_sign_matches_target_membership(self, center, half_width, slope, cap, z):
        """목표 경계에서 떨어진 점: 안이면 ℓ < 0, 밖이면 ℓ > 0, 항상 ℓ ≤ cap"""
        lower, upper = center - half_width, center + half_width
        assume(min(abs(z - lower), abs(z - upper)) > 1e-6)
        ell = build_payoff_box([lower], [upper], slope=slope, cap=cap)

        value = float(ell([z]))

        assert value <= cap
        if lower < z < upper:
            assert value < 0
        else:
            assert value > 0


class TestHamiltonianProperties:
    """Hamiltonian 속성"""

    def setup_method(self):
        """각 테스트 전에 실행"""
        self.evaluator = HamiltonianEvaluator(DynamicsService.derive_reduced(make_genetic_circuit()))

    @settings(max_examples=100)
    @given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=-3.0, max_value=3.0),
           st.floats(min_value=0.1, max_value=10.0))
    def test_positive_homogeneity(self, z, lam, scale):
        """H(z, cλ) = c H(z, λ), c > 0"""
        base = self.evaluator.hamiltonian_minmax([z], [lam])
        scaled = self.evaluator.hamiltonian_minmax([z], [scale * lam])

        assert scaled == pytest.approx(scale * base, rel=1e-9, abs=1e-12)

    @settings(max_examples=100)
    @given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=-3.0, max_value=3.0))
    def test_maxmin_not_above_minmax(self, z, lam):
        """max-min ≤ min-max (격자 위 항상 성립)"""
        assert self.evaluator.hamiltonian_maxmin([z], [lam]) <= self.evaluator.hamiltonian_minmax([z], [lam])

    @settings(max_examples=100)
    @given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=-3.0, max_value=3.0))
    def test_control_refinement_never_increases_minmax(self, z, lam):
        """𝒰 격자를 2 → 3 → 5로 세분해도 min-max는 증가하지 않음"""
        values = []
        for samples in (2, 3, 5):
            red = ReducedSystem(
                n_z=1,
                F=lambda z, u, d: (u[0] - z) ** 2 - d[0],
                u_set=BoxSet((0.0,), (1.0,), samples),
                d_set=BoxSet((0.0,), (1.0,), 3),
                name="quadratic-control",
            )
            values.append(HamiltonianEvaluator(red).hamiltonian_minmax([z], [lam]))

        assert values[1] <= values[0] + 1e-12
        assert values[2] <= values[1] + 1e-12


class TestInterpolationProperties:
    """보간 속성"""

    @settings(max_examples=100)
    @given(st.integers(3, 12), st.integers(3, 12), st.data())
    def test_interpolation_at_nodes(self, nx, ny, data):
        """노드에서 보간 값 = 저장 값"""
        grid = Grid((nx, ny), (-1.0, 0.0), (1.0, 2.0))
        values = np.random.default_rng(nx * 31 + ny).standard_normal(grid.shape)
        field = ValueField(grid=grid, time=0.0, values=values)
        i = data.draw(st.integers(0, nx - 1))
        j = data.draw(st.integers(0, ny - 1))

        node = [grid.axis(0)[i], grid.axis(1)[j]]

        assert interpolate_value(field, node) == pytest.approx(values[i, j], abs=1e-12)
