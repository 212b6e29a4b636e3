"""가정(정칙성, 빠른 동역학 안정성, Isaacs 조건)의 샘플 기반 수치 검증

검증 결과는 "N개 샘플, 허용 오차 τ에서 통과"로만 보고하며 증명이 아닙니다.
모든 무작위 탐색은 seed로 만든 numpy Generator를 사용하고 seed는 리포트에 기록됩니다.
"""

import logging
from typing import Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed
from scipy import linalg

from config.settings import DECAY_TOL, DEFAULT_SAMPLES, ISAACS_TOL, RESAMPLE_FACTOR, STABILITY_TOL
from models.box_set import BoxSet
from models.certificate import (
    AssumptionReport, DecayCheck, IsaacsGap, LyapunovCert, RegularityEstimate, StabilityWitness
)
from models.system import ReducedSystem, SPSystem, matmul
from services.dynamics_service import DynamicsService
from services.hamiltonian import HamiltonianEvaluator
from utils.exceptions import DomainError, NumericalError, SPReachError
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")


class AssumptionChecker:
    """가정 1–3과 경계층 지수 감쇠 포락선 검증기"""

    def __init__(
        self,
        stability_tol: float = STABILITY_TOL,
        isaacs_tol: float = ISAACS_TOL,
        decay_tol: float = DECAY_TOL,
        seed: int = 0,
        n_jobs: int = 1
    ):
        """
        Args:
            stability_tol: ν가 이 값보다 커야 안정성 통과
            isaacs_tol: min-max와 max-min 차이 허용치
            decay_tol: 감쇠 비율 허용치 (비율 ≤ 1 + decay_tol)
            seed: 무작위 탐색 seed
            n_jobs: 감쇠 시험 병렬 작업 수 (결과는 시험 순서대로 축약)
        """
        self.stability_tol = stability_tol
        self.isaacs_tol = isaacs_tol
        self.decay_tol = decay_tol
        self.seed = seed
        self.n_jobs = n_jobs

    def _rng(self, seed: Optional[int]) -> np.random.Generator:
        return np.random.default_rng(self.seed if seed is None else seed)

    # ------------------------------------------------------------------
    # 가정 1: 정칙성
    # ------------------------------------------------------------------
    def estimate_regularity_bounds(
        self,
        sys: SPSystem,
        probe_region: BoxSet,
        n_samples: int,
        seed: Optional[int] = None
    ) -> RegularityEstimate:
        """K ≈ max( ‖M‖ + ‖A‖, (‖f‖ + ‖g‖)/(1 + ‖z‖) ) 샘플 추정

        z 샘플은 seed 난수의 앞쪽부터 사용하므로 n_samples를 늘리면 이전 샘플의
        상위 집합이 되어 추정값이 줄지 않습니다.
        """
        if n_samples < 1:
            raise DomainError(f"n_samples는 1 이상이어야 합니다: {n_samples}", details={"field": "n_samples"})
        if probe_region.dim != sys.n_z:
            raise DomainError("probe_region 차원이 n_z와 다릅니다", details={"field": "probe_region"})

        zs = probe_region.sample(self._rng(seed), n_samples).T  # (n_z, n)
        coupling_best = (-np.inf, None)
        growth_best = (-np.inf, None)

        m_norm = _spectral_norms(sys.M(zs))
        z_norm = np.linalg.norm(zs, axis=0)
        for u in sys.u_set.lattice():
            for d in sys.d_set.lattice():
                a_norm = _spectral_norms(sys.A(zs, u, d))
                f = sys.f(zs, u, d)
                g = sys.g(zs, u, d)
                ArrayValidator.finite(f, "f", u=u, d=d)
                ArrayValidator.finite(g, "g", u=u, d=d)
                coupling = m_norm + a_norm
                growth = (np.linalg.norm(f, axis=0) + np.linalg.norm(g, axis=0)) / (1.0 + z_norm)
                for values, best_name in ((coupling, "coupling"), (growth, "growth")):
                    k = int(np.argmax(values))
                    if not np.isfinite(values[k]):
                        raise NumericalError(
                            f"non-finite {best_name} bound",
                            details={"z": zs[:, k].tolist(), "u": u.tolist(), "d": d.tolist()}
                        )
                    point = {"z": zs[:, k].tolist(), "u": u.tolist(), "d": d.tolist()}
                    if best_name == "coupling" and values[k] > coupling_best[0]:
                        coupling_best = (float(values[k]), point)
                    elif best_name == "growth" and values[k] > growth_best[0]:
                        growth_best = (float(values[k]), point)

        estimate = RegularityEstimate(
            K_estimate=max(coupling_best[0], growth_best[0]),
            sample_count=n_samples,
            coupling_bound=coupling_best[0],
            growth_bound=growth_best[0],
            coupling_argmax=coupling_best[1],
            growth_argmax=growth_best[1],
        )
        logger.info(f"정칙성 상수 추정: K ≈ {estimate.K_estimate:.6g} ({n_samples} 샘플)")
        return estimate

    # ------------------------------------------------------------------
    # 가정 2: 빠른 동역학 안정성
    # ------------------------------------------------------------------
    def check_stability(
        self,
        sys: SPSystem,
        P=None,
        z_region: Optional[BoxSet] = None,
        n_samples: int = DEFAULT_SAMPLES,
        seed: Optional[int] = None
    ) -> Union[LyapunovCert, StabilityWitness]:
        """ν = min over 샘플 (z, u, d) of −λmax(AᵀP + PA) 계산

        ν > stability_tol이면 LyapunovCert(α, κ 포함), 아니면 가장 나쁜 지점의 위반 증거를 반환합니다.
        (u, d)는 꼭짓점을 포함하는 𝒰×𝒟 격자, z는 z_region의 무작위 샘플입니다.
        """
        P = validate_lyapunov_matrix(np.eye(sys.n_y) if P is None else P, sys.n_y)
        if n_samples < 1:
            raise DomainError(f"n_samples는 1 이상이어야 합니다: {n_samples}", details={"field": "n_samples"})
        region = z_region or BoxSet((0.0,) * sys.n_z, (1.0,) * sys.n_z)
        used_seed = self.seed if seed is None else seed
        zs = region.sample(self._rng(used_seed), n_samples).T

        worst_value = -np.inf
        worst_point = None
        for u in sys.u_set.lattice():
            for d in sys.d_set.lattice():
                a = np.asarray(sys.A(zs, u, d), dtype=float)
                lyap = matmul(np.swapaxes(a, 0, 1), P[..., None]) + matmul(P[..., None], a)
                stack = np.moveaxis(lyap, -1, 0)
                try:
                    eigmax = np.linalg.eigvalsh(stack)[:, -1]
                except np.linalg.LinAlgError as e:
                    raise NumericalError("eigensolver did not converge", original_error=e,
                                         details={"u": u.tolist(), "d": d.tolist()})
                k = int(np.argmax(eigmax))
                if eigmax[k] > worst_value:
                    worst_value = float(eigmax[k])
                    worst_point = (zs[:, k].copy(), u.copy(), d.copy())

        nu = -worst_value
        if not nu > self.stability_tol:
            z, u, d = worst_point
            logger.warning(f"안정성 가정 위반: λmax = {worst_value:.6g} at z={z}, u={u}, d={d}")
            return StabilityWitness(z=z.tolist(), u=u.tolist(), d=d.tolist(), eigenvalue=worst_value)

        p_eigs = np.linalg.eigvalsh(P)
        lam_min, lam_max = float(p_eigs[0]), float(p_eigs[-1])
        cert = LyapunovCert(
            P=P,
            nu=nu,
            alpha_decay=float(np.sqrt(lam_max / lam_min)),
            kappa=nu / (2.0 * lam_max),
            sample_count=n_samples,
            seed=used_seed,
        )
        logger.info(f"안정성 인증: ν={cert.nu:.6g}, α={cert.alpha_decay:.6g}, κ={cert.kappa:.6g}")
        return cert

    def resample_certificate(
        self,
        sys: SPSystem,
        cert: LyapunovCert,
        z_region: BoxSet,
        factor: int = RESAMPLE_FACTOR
    ) -> dict:
        """인증서의 P로 factor배 새 샘플에서 ν를 다시 계산

        새 샘플의 seed는 인증서 seed + 1이며, 재계산한 ν가 ν − stability_tol 이상이면 유지됩니다.
        """
        samples = cert.sample_count * factor
        seed = (self.seed if cert.seed is None else cert.seed) + 1
        again = self.check_stability(sys, cert.P, z_region, samples, seed)
        nu = again.nu if isinstance(again, LyapunovCert) else -again.eigenvalue
        holds = bool(nu >= cert.nu - self.stability_tol)
        level = logging.INFO if holds else logging.WARNING
        logger.log(level, f"인증서 재표본 검사: {samples} 샘플, ν={nu:.6g} (원래 {cert.nu:.6g})")
        return {"samples": samples, "seed": seed, "nu": float(nu), "holds": holds}

    # ------------------------------------------------------------------
    # 가정 3: Isaacs 조건
    # ------------------------------------------------------------------
    def check_isaacs(
        self,
        red: ReducedSystem,
        z_region: BoxSet,
        n_probes: int = DEFAULT_SAMPLES,
        lambda_scale: float = 1.0,
        seed: Optional[int] = None
    ) -> IsaacsGap:
        """max over 무작위 (z, λ) of |min-max − max-min|"""
        if n_probes < 1:
            raise DomainError(f"n_probes는 1 이상이어야 합니다: {n_probes}", details={"field": "n_probes"})
        used_seed = self.seed if seed is None else seed
        rng = self._rng(used_seed)
        zs = z_region.sample(rng, n_probes)
        lams = rng.uniform(-lambda_scale, lambda_scale, size=(n_probes, red.n_z))

        evaluator = HamiltonianEvaluator(red)
        worst = (-1.0, None, None)
        for z, lam in zip(zs, lams):
            table = evaluator.payoff_table(z, lam)
            gap = abs(table.max(axis=1).min() - table.min(axis=0).max())
            if gap > worst[0]:
                worst = (float(gap), z, lam)

        result = IsaacsGap(
            max_gap=worst[0],
            worst_z=worst[1].tolist(),
            worst_lambda=worst[2].tolist(),
            probe_count=n_probes,
            seed=used_seed,
        )
        level = logging.INFO if result.max_gap <= self.isaacs_tol else logging.WARNING
        logger.log(level, f"Isaacs 간격: {result.max_gap:.3e} ({n_probes} 탐침)")
        return result

    # ------------------------------------------------------------------
    # 경계층 모델의 지수 감쇠
    # ------------------------------------------------------------------
    def check_boundary_layer_decay(
        self,
        sys: SPSystem,
        cert: LyapunovCert,
        z,
        horizon: float,
        n_trials: int,
        seed: Optional[int] = None,
        n_pieces: int = 20,
        samples_per_piece: int = 10,
        u_set: Optional[BoxSet] = None,
        d_set: Optional[BoxSet] = None,
        initial_offsets=None
    ) -> DecayCheck:
        """차이 동역학 ẇ = A(z, u, d)w의 ‖w(s)‖ / (α e^{−κs} ‖w(0)‖) 최댓값

        (u, d)는 [0, horizon]을 n_pieces 구간으로 나눈 영차 유지 무작위 신호이며
        각 구간 내 해는 행렬 지수로 정확히 전파합니다. u_set/d_set으로 신호 상자를,
        initial_offsets (n_trials × n_y)로 초기 차이를 지정할 수 있습니다.
        """
        z = ArrayValidator.vector(z, sys.n_z, "z")
        horizon = ArrayValidator.positive(horizon, "horizon")
        if n_trials < 1:
            raise DomainError(f"n_trials는 1 이상이어야 합니다: {n_trials}", details={"field": "n_trials"})
        u_box = u_set or sys.u_set
        d_box = d_set or sys.d_set
        used_seed = self.seed if seed is None else seed
        rng = self._rng(used_seed)

        # 난수는 직렬로 미리 뽑아 병렬 실행과 무관하게 결정적
        trials = []
        for k in range(n_trials):
            us = u_box.sample(rng, n_pieces)
            ds = d_box.sample(rng, n_pieces)
            w0 = rng.standard_normal(sys.n_y) if initial_offsets is None else \
                ArrayValidator.vector(np.atleast_2d(initial_offsets)[k], sys.n_y, "initial_offsets")
            trials.append((us, ds, w0))

        ratios = Parallel(n_jobs=self.n_jobs)(
            delayed(_decay_ratio)(sys, cert, z, horizon, us, ds, w0, samples_per_piece)
            for us, ds, w0 in trials
        )
        result = DecayCheck(worst_ratio=float(max(ratios)), trial_count=n_trials,
                            horizon=horizon, seed=used_seed)
        logger.info(f"경계층 감쇠 최대 비율: {result.worst_ratio:.9f} ({n_trials} 시험)")
        return result

    # ------------------------------------------------------------------
    # 종합 리포트
    # ------------------------------------------------------------------
    def verify(
        self,
        sys: SPSystem,
        P=None,
        z_region: Optional[BoxSet] = None,
        n_samples: int = DEFAULT_SAMPLES,
        lambda_scale: float = 2.0,
        decay_horizon: float = 10.0,
        decay_trials: int = 100
    ) -> AssumptionReport:
        """가정 1–3과 감쇠 포락선을 모두 검사한 리포트"""
        region = z_region or BoxSet((0.0,) * sys.n_z, (1.0,) * sys.n_z)
        logger.info(f"가정 검증 시작: {sys.name} ({n_samples} 샘플, seed={self.seed})")
        try:
            regularity = self.estimate_regularity_bounds(sys, region, n_samples)
            stability = self.check_stability(sys, P, region, n_samples)
            red = DynamicsService.derive_reduced(sys)
            isaacs = self.check_isaacs(red, region, n_samples, lambda_scale)
            decay = None
            resample = None
            if isinstance(stability, LyapunovCert):
                center = (np.asarray(region.lower) + np.asarray(region.upper)) / 2.0
                decay = self.check_boundary_layer_decay(sys, stability, center, decay_horizon, decay_trials)
                resample = self.resample_certificate(sys, stability, region)
        except SPReachError:
            raise
        except Exception as e:
            logger.exception(f"가정 검증 중 예상치 못한 오류: {e}")
            raise NumericalError(f"가정 검증 실패: {e}", original_error=e)

        notes = {
            "method": f"sampled at {n_samples} points; not a proof",
            "boundary_layer": "decay check uses the difference dynamics dw/ds = A(z,u,d) w only",
        }
        if resample is not None:
            notes["certificate_resample"] = resample
        if "inflow_gain" in sys.parameters:
            notes["mrn_inflow_gain"] = {
                "f_minus_Mg": sys.parameters["inflow_gain"],
                "opposite_sign": sys.parameters["inflow_gain_opposite_sign"],
            }

        report = AssumptionReport(
            system=sys.to_dict(),
            regularity=regularity,
            stability=stability,
            isaacs=isaacs,
            decay=decay,
            tolerances={
                "stability_tol": self.stability_tol,
                "isaacs_tol": self.isaacs_tol,
                "decay_tol": self.decay_tol,
            },
            notes=notes,
        )
        logger.info(f"가정 검증 완료: {report.verdicts}")
        return report


def validate_lyapunov_matrix(P, n_y: int) -> np.ndarray:
    """P가 대칭(1e−12) 양의 정부호인지 검사"""
    P = np.atleast_2d(np.asarray(P, dtype=float))
    if P.shape != (n_y, n_y):
        raise DomainError(f"P shape {P.shape} != ({n_y}, {n_y})", details={"field": "P"})
    if not np.all(np.abs(P - P.T) <= 1e-12):
        raise DomainError("P must be symmetric", details={"field": "P"})
    try:
        eigs = np.linalg.eigvalsh(P)
    except np.linalg.LinAlgError as e:
        raise NumericalError("eigensolver did not converge for P", original_error=e)
    if eigs[0] <= 0:
        raise DomainError(f"P must be positive definite (λmin={eigs[0]:.3e})", details={"field": "P"})
    return P


def lyapunov_matrix(sys: SPSystem, z=None) -> np.ndarray:
    """공칭점 (z, 𝒰·𝒟 중심)에서 AᵀP + PA = −I의 해 P

    A(z, u, d)가 공칭 행렬의 양수배인 시스템(MRN 등)에서는 전체 𝒰×𝒟에 대한 인증서가 됩니다.
    """
    z = np.zeros(sys.n_z) if z is None else ArrayValidator.vector(z, sys.n_z, "z")
    u = (np.asarray(sys.u_set.lower) + np.asarray(sys.u_set.upper)) / 2.0
    d = (np.asarray(sys.d_set.lower) + np.asarray(sys.d_set.upper)) / 2.0
    a = np.asarray(sys.A(z, u, d), dtype=float)
    P = linalg.solve_continuous_lyapunov(a.T, -np.eye(sys.n_y))
    return 0.5 * (P + P.T)


def _spectral_norms(batch: np.ndarray) -> np.ndarray:
    """(m, n, *batch) 배치 행렬의 스펙트럴 노름, shape (batch,)"""
    stack = np.moveaxis(np.asarray(batch, dtype=float), (0, 1), (-2, -1))
    return np.linalg.norm(stack, ord=2, axis=(-2, -1))


def _decay_ratio(sys, cert, z, horizon, us, ds, w0, samples_per_piece) -> float:
    """한 시험의 최대 포락선 비율"""
    norm0 = float(np.linalg.norm(w0))
    if norm0 == 0.0:
        return 0.0
    n_pieces = len(us)
    piece = horizon / n_pieces
    offsets = np.linspace(0.0, piece, samples_per_piece + 1)[1:]
    w = np.asarray(w0, dtype=float)
    worst = 1.0 / cert.alpha_decay  # s = 0
    for k in range(n_pieces):
        a = np.asarray(sys.A(z, us[k], ds[k]), dtype=float)
        s0 = k * piece
        for h in offsets:
            try:
                w_s = linalg.expm(a * h) @ w
            except Exception as e:
                raise NumericalError("matrix exponential failed", original_error=e,
                                     details={"s": s0 + h})
            if not np.all(np.isfinite(w_s)):
                raise NumericalError("non-finite decay trajectory", details={"s": s0 + h})
            ratio = np.linalg.norm(w_s) / (cert.alpha_decay * np.exp(-cert.kappa * (s0 + h)) * norm0)
            worst = max(worst, float(ratio))
        w = w_s
    return worst
