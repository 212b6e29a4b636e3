"""AssumptionChecker 단위 테스트

정칙성 상수 추정, Lyapunov 인증, Isaacs 간격, 경계층 감쇠 포락선을 테스트합니다.
"""

import numpy as np
import pytest

from models.box_set import BoxSet
from models.certificate import LyapunovCert, StabilityWitness
from models.system import ReducedSystem
from services.assumption_checker import AssumptionChecker, lyapunov_matrix, validate_lyapunov_matrix
from services.dynamics_service import DynamicsService
from services.model_catalog import make_genetic_circuit, make_mrn
from utils.exceptions import DomainError

CHAIN = [("m1", "m2", 1.0), ("m2", "p", 1.0)]


def _planted_counterexample() -> ReducedSystem:
    """F(z, u, d) = (u − d)², 𝒰 = 𝒟 = [−1, 1] (3점 격자)"""
    return ReducedSystem(
        n_z=1,
        F=lambda z, u, d: (u[0] - d[0]) ** 2 + 0.0 * z,
        u_set=BoxSet((-1.0,), (1.0,), 3),
        d_set=BoxSet((-1.0,), (1.0,), 3),
        name="isaacs-counterexample",
    )


class TestStability:
    """빠른 동역학 안정성 테스트"""

    def setup_method(self):
        """각 테스트 전에 실행"""
        self.checker = AssumptionChecker(seed=0)

    def test_genetic_circuit_certificate(self):
        """A = −d₁, P = 1: ν = 2·min d₁ = 1, κ = 0.5, α = 1"""
        cert = self.checker.check_stability(make_genetic_circuit(), P=[[1.0]], n_samples=50)

        assert isinstance(cert, LyapunovCert)
        assert cert.nu == pytest.approx(1.0)
        assert cert.kappa == pytest.approx(0.5)
        assert cert.alpha_decay == pytest.approx(1.0)
        assert cert.seed == 0

    def test_unstable_fast_dynamics_gives_witness(self):
        """A ≡ +1이면 위반 증거 (λmax = 2)"""
        sys = make_genetic_circuit(d_set=BoxSet((-1.0, 0.5, 0.5), (-1.0, 2.0, 2.0)))

        witness = self.checker.check_stability(sys, n_samples=10)

        assert isinstance(witness, StabilityWitness)
        assert witness.eigenvalue == pytest.approx(2.0)
        assert witness.d[0] == -1.0

    def test_chain_mrn_with_identity(self):
        """사슬 MRN, P = I: ν = min d₁ = 0.9"""
        cert = self.checker.check_stability(make_mrn(CHAIN), n_samples=20)

        assert isinstance(cert, LyapunovCert)
        assert cert.nu == pytest.approx(0.9)
        assert cert.kappa == pytest.approx(0.45)

    def test_certificate_survives_tenfold_resample(self):
        """10배 새 샘플에서 다시 계산한 ν ≥ ν − stability_tol"""
        sys = make_mrn(CHAIN)
        region = BoxSet((0.0,) * 3, (1.0,) * 3)
        cert = self.checker.check_stability(sys, n_samples=30, z_region=region)

        resample = self.checker.resample_certificate(sys, cert, region)

        assert resample["samples"] == 300
        assert resample["seed"] == cert.seed + 1
        assert resample["holds"]
        assert resample["nu"] >= cert.nu - self.checker.stability_tol

    def test_nominal_lyapunov_matrix(self):
        """공칭 Lyapunov 해의 잔차와 인증"""
        sys = make_mrn(CHAIN)
        P = lyapunov_matrix(sys)
        a = sys.parameters["A_MRN"]

        assert np.allclose(a.T @ P + P @ a, -np.eye(2), atol=1e-10)
        cert = self.checker.check_stability(sys, P=P, n_samples=20)
        assert isinstance(cert, LyapunovCert)
        # d₁ ∈ [0.9, 1.1]이므로 AᵀP + PA = −d₁ I
        assert cert.nu == pytest.approx(0.9)

    def test_invalid_lyapunov_matrix(self):
        """양의 정부호가 아니거나 비대칭인 P"""
        with pytest.raises(DomainError):
            validate_lyapunov_matrix([[-1.0]], 1)
        with pytest.raises(DomainError):
            validate_lyapunov_matrix([[1.0, 0.5], [0.0, 1.0]], 2)
        with pytest.raises(DomainError):
            validate_lyapunov_matrix(np.eye(3), 2)


class TestRegularity:
    """정칙성 상수 추정 테스트"""

    def test_genetic_circuit_bound(self):
        """‖M‖ + ‖A‖ = α + max d₁ = 3이 성장 항(≤ 2)보다 큼"""
        est = AssumptionChecker(seed=1).estimate_regularity_bounds(
            make_genetic_circuit(), BoxSet((0.0,), (1.0,)), 100
        )

        assert est.K_estimate == pytest.approx(3.0)
        assert est.coupling_bound == pytest.approx(3.0)
        assert est.growth_bound <= 2.0 + 1e-12
        assert est.sample_count == 100

    def test_estimate_is_monotone_in_samples(self):
        """샘플 수를 늘리면 추정값이 줄지 않음"""
        checker = AssumptionChecker(seed=4)
        sys = make_mrn(CHAIN)
        region = BoxSet((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))

        small = checker.estimate_regularity_bounds(sys, region, 10)
        large = checker.estimate_regularity_bounds(sys, region, 200)

        assert large.K_estimate >= small.K_estimate

    def test_region_dimension_mismatch(self):
        """probe_region 차원 불일치"""
        with pytest.raises(DomainError):
            AssumptionChecker().estimate_regularity_bounds(make_genetic_circuit(), BoxSet((0.0, 0.0), (1.0, 1.0)), 5)


class TestIsaacs:
    """Isaacs 조건 테스트"""

    def test_genetic_circuit_gap_is_zero(self):
        """유전자 회로는 간격 ≤ 1e−9"""
        red = DynamicsService.derive_reduced(make_genetic_circuit())

        gap = AssumptionChecker(seed=0).check_isaacs(red, BoxSet((0.0,), (1.0,)), n_probes=1000, lambda_scale=2.0)

        assert gap.max_gap <= 1e-9
        assert gap.probe_count == 1000

    def test_counterexample_gap(self):
        """(u − d)²: 간격 = |λ|"""
        gap = AssumptionChecker(seed=0).check_isaacs(
            _planted_counterexample(), BoxSet((-1.0,), (1.0,)), n_probes=200
        )

        assert gap.max_gap > 0.5
        assert gap.max_gap == pytest.approx(abs(gap.worst_lambda[0]), abs=1e-12)

    def test_same_seed_same_result(self):
        """seed 재현성"""
        checker = AssumptionChecker(seed=9)
        red = _planted_counterexample()

        first = checker.check_isaacs(red, BoxSet((-1.0,), (1.0,)), n_probes=50)
        second = checker.check_isaacs(red, BoxSet((-1.0,), (1.0,)), n_probes=50)

        assert first.to_dict() == second.to_dict()


class TestBoundaryLayerDecay:
    """경계층 지수 감쇠 포락선 테스트"""

    def setup_method(self):
        """각 테스트 전에 실행"""
        self.checker = AssumptionChecker(seed=0)
        self.sys = make_genetic_circuit()
        self.cert = self.checker.check_stability(self.sys, P=[[1.0]], n_samples=20)

    def test_ratio_within_envelope(self):
        """모든 시험에서 비율 ≤ 1 + 1e−6"""
        result = self.checker.check_boundary_layer_decay(self.sys, self.cert, [0.5], horizon=10.0, n_trials=100)

        assert result.worst_ratio <= 1.0 + 1e-6
        assert result.trial_count == 100

    def test_tight_envelope(self):
        """d₁ ≡ 0.5이면 포락선과 정확히 일치"""
        tight = BoxSet((0.5, 0.5, 0.5), (0.5, 2.0, 2.0))

        result = self.checker.check_boundary_layer_decay(
            self.sys, self.cert, [0.5], horizon=5.0, n_trials=5, d_set=tight
        )

        assert abs(result.worst_ratio - 1.0) < 1e-9

    def test_zero_offset(self):
        """초기 차이가 0이면 비율 0"""
        result = self.checker.check_boundary_layer_decay(
            self.sys, self.cert, [0.5], horizon=1.0, n_trials=2, initial_offsets=np.zeros((2, 1))
        )

        assert result.worst_ratio == 0.0

    def test_parallel_matches_serial(self):
        """병렬 실행도 같은 결과"""
        parallel = AssumptionChecker(seed=0, n_jobs=2)

        serial_result = self.checker.check_boundary_layer_decay(self.sys, self.cert, [0.5], 2.0, 6)
        parallel_result = parallel.check_boundary_layer_decay(self.sys, self.cert, [0.5], 2.0, 6)

        assert serial_result.worst_ratio == parallel_result.worst_ratio


class TestVerify:
    """종합 리포트 테스트"""

    def test_genetic_circuit_passes(self):
        """유전자 회로는 모든 판정 통과"""
        report = AssumptionChecker(seed=0).verify(
            make_genetic_circuit(), P=[[1.0]], n_samples=100, decay_trials=10
        )

        assert report.verdicts == {"regularity": True, "stability": True, "isaacs": True, "decay": True}
        assert report.passed
        assert report.to_dict()["stability"]["status"] == "certified"

    def test_unstable_system_skips_decay(self):
        """안정성 실패 시 감쇠 검사 생략"""
        sys = make_genetic_circuit(d_set=BoxSet((-1.0, 0.5, 0.5), (-1.0, 2.0, 2.0)))

        report = AssumptionChecker(seed=0).verify(sys, n_samples=20)

        assert report.decay is None
        assert report.verdicts["stability"] is False
        assert not report.passed

    def test_mrn_notes_record_both_signs(self):
        """MRN 리포트는 유입 이득을 두 부호로 기록"""
        report = AssumptionChecker(seed=0).verify(make_mrn(CHAIN), n_samples=20, decay_trials=5)
        gains = report.notes["mrn_inflow_gain"]

        assert gains["f_minus_Mg"] == pytest.approx(1.0)
        assert gains["opposite_sign"] == pytest.approx(-1.0)

    def test_report_records_certificate_resample(self):
        """인증 통과 시 10배 재표본 결과를 notes에 기록"""
        report = AssumptionChecker(seed=0).verify(
            make_genetic_circuit(), P=[[1.0]], n_samples=100, decay_trials=10
        )
        resample = report.notes["certificate_resample"]

        assert resample["samples"] == 1000
        assert resample["holds"]
        assert resample["nu"] == pytest.approx(report.stability.nu)
