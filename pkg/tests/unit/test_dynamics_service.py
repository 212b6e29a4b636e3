"""DynamicsService / ModelCatalog 단위 테스트

SP 우변 평가, 축약 모델 유도, 모델 기술 문서 처리를 테스트합니다.
"""

import numpy as np
import pytest

from models.box_set import BoxSet
from models.system import matvec
from services.dynamics_service import DynamicsService
from services.model_catalog import (
    ModelCatalog, build_mrn_matrices, make_genetic_circuit, make_mrn, random_mrn_adjacency
)
from utils.exceptions import ConfigurationError, DimensionError, DomainError, ValidationError


class TestEvalSpRhs:
    """SP 시스템 우변 평가 테스트"""

    def setup_method(self):
        """각 테스트 전에 실행"""
        self.sys = make_genetic_circuit(alpha=1.0)

    def test_genetic_circuit_quasi_steady_state(self):
        """QSS 점 (z=0.5, y=0.8, u=1, d=(1,1,1))에서 ż=0.3, ẏ=0"""
        zdot, ydot = DynamicsService.eval_sp_rhs(self.sys, 0.1, [0.5], [0.8], [1.0], [1.0, 1.0, 1.0])

        assert zdot == pytest.approx([0.3], abs=1e-12)
        assert ydot == pytest.approx([0.0], abs=1e-12)

    def test_fast_rate_scales_with_inverse_eps(self):
        """ẏ는 1/ε에 비례"""
        _, ydot_1 = DynamicsService.eval_sp_rhs(self.sys, 1.0, [0.5], [0.1], [1.0], [1.0, 1.0, 1.0])
        _, ydot_01 = DynamicsService.eval_sp_rhs(self.sys, 0.1, [0.5], [0.1], [1.0], [1.0, 1.0, 1.0])

        assert ydot_01 == pytest.approx(10.0 * ydot_1)

    def test_wrong_state_length_raises_dimension_error(self):
        """z 길이 불일치 시 DimensionError (field 이름 포함)"""
        with pytest.raises(DimensionError) as exc_info:
            DynamicsService.eval_sp_rhs(self.sys, 0.1, [0.5, 0.5], [0.8], [1.0], [1.0, 1.0, 1.0])

        assert exc_info.value.details["field"] == "z"

    def test_non_positive_eps_raises_domain_error(self):
        """ε ≤ 0이면 DomainError"""
        with pytest.raises(DomainError):
            DynamicsService.eval_sp_rhs(self.sys, 0.0, [0.5], [0.8], [1.0], [1.0, 1.0, 1.0])


class TestDeriveReduced:
    """축약 모델 유도 테스트"""

    def test_reduced_drift_equals_f_minus_mg(self):
        """F = f − Mg가 같은 연산 경로로 정확히 일치"""
        sys = make_genetic_circuit(alpha=2.0)
        red = DynamicsService.derive_reduced(sys)
        rng = np.random.default_rng(3)

        for _ in range(20):
            z = rng.uniform(0.0, 1.0, size=1)
            u = sys.u_set.sample(rng, 1)[0]
            d = sys.d_set.sample(rng, 1)[0]
            expected = sys.f(z, u, d) - matvec(sys.M(z), sys.g(z, u, d))
            # 검증: 비트 단위 동일
            assert np.array_equal(red.F(z, u, d), expected)

    def test_reduced_keeps_control_sets_and_provenance(self):
        """축약 모델은 원본 집합과 출처를 유지"""
        sys = make_genetic_circuit()
        red = DynamicsService.derive_reduced(sys)

        assert red.is_derived
        assert red.u_set == sys.u_set
        assert red.d_set == sys.d_set
        assert red.to_dict()["provenance"] == "genetic_circuit"

    def test_batched_evaluation_matches_pointwise(self):
        """배치 평가 결과가 점별 평가와 같음"""
        sys = make_genetic_circuit()
        red = DynamicsService.derive_reduced(sys)
        zs = np.linspace(0.0, 1.0, 7).reshape(1, 7)
        u, d = np.array([0.4]), np.array([1.0, 1.5, 0.7])

        batched = red.F(zs, u, d)
        pointwise = np.array([DynamicsService.eval_reduced(red, [z], u, d)[0] for z in zs[0]])

        assert batched.shape == (1, 7)
        assert np.allclose(batched[0], pointwise, rtol=0, atol=1e-15)


class TestMrnMatrices:
    """MRN 행렬 구성 테스트"""

    def test_chain_network_matrices(self):
        """m1 → m2 → p 사슬 (가중치 1)의 A_MRN, C_MRN"""
        a_mrn, c_mrn, names = build_mrn_matrices([("m1", "m2", 1.0), ("m2", "p", 1.0)])

        assert names == ["m1", "m2"]
        assert np.array_equal(a_mrn, np.array([[-1.0, 0.0], [1.0, -1.0]]))
        assert np.array_equal(c_mrn, np.array([0.0, 1.0]))

    def test_disconnected_metabolite_raises(self):
        """p로 이어지지 않는 대사물이 있으면 DomainError"""
        with pytest.raises(DomainError) as exc_info:
            build_mrn_matrices([("m1", "m2", 0.5), ("m3", "p", 1.0)])

        assert exc_info.value.message == "metabolite not connected to p"
        assert set(exc_info.value.details["metabolites"]) == {"m1", "m2"}

    def test_unweighted_edges_need_seed(self):
        """가중치 없는 간선은 seed 필요"""
        with pytest.raises(ValidationError):
            build_mrn_matrices([("m1", "p")])

        a_mrn, _, _ = build_mrn_matrices([("m1", "p")], seed=1)
        assert a_mrn.shape == (1, 1)
        assert a_mrn[0, 0] < 0

    def test_random_adjacency_is_reproducible(self):
        """같은 seed면 같은 네트워크"""
        first = random_mrn_adjacency(20, seed=7)
        second = random_mrn_adjacency(20, seed=7)

        assert first == second
        assert ("m20", "p") in {(src, dst) for src, dst, _ in first}

    def test_mrn_reduced_inflow_gain(self):
        """축약 모델의 z₁ 유입 계수는 −C A⁻¹ ê₁"""
        sys = make_mrn([("m1", "m2", 1.0), ("m2", "p", 1.0)])
        red = DynamicsService.derive_reduced(sys)
        z = np.array([0.0, 0.0, 0.0])

        # z = 0, u = (1, 0)에서 f = 0 이므로 F₁ = 유입 이득
        value = red.F(z, np.array([1.0, 0.0]), np.array([1.0]))

        assert value[0] == pytest.approx(sys.parameters["inflow_gain"])
        assert sys.parameters["inflow_gain"] == pytest.approx(1.0)


class TestModelCatalog:
    """모델 기술 문서 → 시스템 생성 테스트"""

    def test_build_genetic_circuit_with_custom_sets(self):
        """집합 재정의와 파라미터 반영"""
        sys = ModelCatalog.build({
            "kind": "genetic_circuit",
            "parameters": {"alpha": 2.0},
            "u_set": {"lower": [0.2], "upper": [0.8], "samples": 3},
        })

        assert sys.parameters["alpha"] == 2.0
        assert sys.u_set == BoxSet((0.2,), (0.8,), 3)
        assert sys.d_set.dim == 3

    def test_build_random_mrn(self):
        """무작위 MRN 문서"""
        sys = ModelCatalog.build({"kind": "mrn", "parameters": {"n_metabolites": 5, "seed": 2}})

        assert sys.n_z == 3
        assert sys.n_y == 5

    def test_random_mrn_without_seed_raises(self):
        """seed 없는 무작위 MRN은 ConfigurationError"""
        with pytest.raises(ConfigurationError):
            ModelCatalog.build({"kind": "mrn", "parameters": {"n_metabolites": 5}})

    def test_unknown_builtin_raises(self):
        """등록되지 않은 custom-builtin"""
        with pytest.raises(ConfigurationError) as exc_info:
            ModelCatalog.build({"kind": "custom-builtin", "name": "nope"})

        assert exc_info.value.details["field"] == "name"

    def test_integrator_is_registered(self):
        """기본 등록 모델"""
        assert "integrator" in ModelCatalog.registered()
        sys = ModelCatalog.build({"kind": "custom-builtin", "name": "integrator"})
        assert sys.name == "integrator"
