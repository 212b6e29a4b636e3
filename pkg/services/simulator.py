"""SP/축약 시스템 궤적 시뮬레이션과 가치 기울기 피드백 실험

제어/외란 신호는 영차 유지(piecewise-constant) 신호로 구현합니다. 빠른 상태의
강성은 h ≤ ε·fast_fraction 의 명시적 RK4 부분 스텝으로 처리합니다.
"""

import logging
import math
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Union

import numpy as np
from joblib import Parallel, delayed

from config.settings import DEFAULT_FAST_FRACTION, DEFAULT_SIGNAL_PERIODS, MIN_TIME_STEP
from models.payoff import PayoffFn
from models.system import ReducedSystem, SPSystem
from models.trajectory import SignalSpec, Trajectory
from models.value_field import ValueField
from services.dynamics_service import DynamicsService
from services.field_sampler import gradient_at, interior_projection, interpolate_value
from services.hamiltonian import HamiltonianEvaluator
from utils.exceptions import ConfigurationError, DivergenceError, DomainError, NumericalError, SPReachError
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")

FEEDBACK_MODES = ("raise", "clip")
LABELS = ("inside-inner", "outside-outer", "indeterminate")


@dataclass
class SimulationOptions:
    """궤적 적분 옵션

    sample_period가 None이면 |t| / DEFAULT_SIGNAL_PERIODS, step이 None이면 sample_period / 10.
    SP 적분은 추가로 h ≤ ε·fast_fraction 을 적용합니다.
    """
    sample_period: Optional[float] = None
    step: Optional[float] = None
    fast_fraction: float = DEFAULT_FAST_FRACTION

    def resolve_period(self, t: float) -> float:
        if self.sample_period is not None:
            return ArrayValidator.positive(self.sample_period, "sample_period")
        return abs(t) / DEFAULT_SIGNAL_PERIODS

    def to_dict(self) -> Dict[str, Any]:
        return {"sample_period": self.sample_period, "step": self.step, "fast_fraction": self.fast_fraction}


class FeedbackPolicy:
    """u*(t, z) = argmin_u max_d ∇V̄(t, z)ᵀF(z, u, d)

    가장 가까운 저장 스냅샷의 기울기를 사용하며 y와 무관합니다.
    mode="clip"이면 격자 내부 밖의 질의를 내부로 사영하고 clipped_queries에 셉니다.
    """

    def __init__(self, field: ValueField, red: ReducedSystem, mode: str = "raise"):
        if mode not in FEEDBACK_MODES:
            raise ConfigurationError(f"알 수 없는 피드백 모드: {mode}", details={"field": "mode"})
        if field.grid.n_dims != red.n_z:
            raise ConfigurationError("필드 차원과 축약 모델 차원이 다릅니다", details={"field": "field"})
        self.field = field
        self.red = red
        self.mode = mode
        self.evaluator = HamiltonianEvaluator(red)
        self.clipped_queries = 0

    def gradient(self, t: float, z) -> np.ndarray:
        snapshot = self.field.snapshot_at(t)
        z = ArrayValidator.vector(z, self.red.n_z, "z")
        if self.mode == "clip":
            projected = interior_projection(snapshot, z)
            if not np.array_equal(projected, z):
                self.clipped_queries += 1
            z = projected
        return gradient_at(snapshot, z)

    def __call__(self, t: float, z) -> np.ndarray:
        u, _ = self.evaluator.minmax_control(z, self.gradient(t, z))
        return u

    def worst_disturbance(self, t: float, z, u) -> np.ndarray:
        """주어진 제어에 대한 ∇V̄ᵀF의 격자 최대화 외란"""
        return self.evaluator.worst_disturbance(z, self.gradient(t, z), u)


def synthesize_feedback(field: ValueField, red: ReducedSystem, mode: str = "raise") -> FeedbackPolicy:
    """축약 가치 필드로부터 피드백 정책 생성"""
    if field.provenance != "reduced":
        raise ConfigurationError("피드백 합성에는 축약 가치 필드가 필요합니다", details={"field": "provenance"})
    return FeedbackPolicy(field, red, mode)


class _HeldSignal:
    """SignalSpec 또는 피드백 정책을 매크로 샘플마다 평가하는 영차 유지 신호"""

    def __init__(self, source: Union[SignalSpec, FeedbackPolicy], box, t0: float, name: str):
        self.source = source
        self.box = box
        self.t0 = t0
        self.name = name
        self._drawn: List[np.ndarray] = []
        self._rng = None
        if isinstance(source, SignalSpec) and source.policy == "uniform-random":
            self._rng = np.random.default_rng(source.seed)

    def value(self, s: float, z, u=None) -> np.ndarray:
        src = self.source
        if isinstance(src, FeedbackPolicy):
            v = src(s, z)
        elif src.policy == "constant":
            v = src.values[0]
        else:
            k = int(math.floor((s - self.t0) / src.sample_period + 1e-9))
            if src.policy == "sequence":
                v = src.values[min(k, len(src.values) - 1)]
            elif src.policy == "uniform-random":
                while len(self._drawn) <= k:
                    self._drawn.append(src.box.sample(self._rng, 1)[0])
                v = self._drawn[k]
            else:
                v = src.field_ref.worst_disturbance(s, z, u)
        v = np.asarray(v, dtype=float)
        if not self.box.contains(v):
            raise DomainError(f"{self.name} 값 {v.tolist()}이 상자 집합을 벗어남",
                              details={"field": self.name, "value": v.tolist(), "t": s})
        return v


def _macro_times(t: float, period: float) -> np.ndarray:
    n = int(math.ceil(-t / period - 1e-9))
    times = t + period * np.arange(n)
    return np.append(times, 0.0)


def _rk4(rhs: Callable[[np.ndarray], np.ndarray], x: np.ndarray, h: float) -> np.ndarray:
    k1 = rhs(x)
    k2 = rhs(x + 0.5 * h * k1)
    k3 = rhs(x + 0.5 * h * k2)
    k4 = rhs(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _integrate(
    drift: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
    x0: np.ndarray,
    n_z: int,
    u_signal: _HeldSignal,
    d_signal: _HeldSignal,
    t: float,
    period: float,
    h_max: float,
    n_u: int,
    n_d: int
):
    times = _macro_times(t, period) if t < 0 else np.array([0.0])
    states = np.empty((len(times), len(x0)))
    us = np.full((len(times), n_u), np.nan)
    ds = np.full((len(times), n_d), np.nan)
    states[0] = x0
    x = x0.copy()
    substeps = 0

    for k in range(len(times) - 1):
        s, s_next = times[k], times[k + 1]
        u = u_signal.value(s, x[:n_z])
        d = d_signal.value(s, x[:n_z], u)
        us[k], ds[k] = u, d
        n_sub = max(1, int(math.ceil((s_next - s) / h_max - 1e-9)))
        h = (s_next - s) / n_sub

        def rhs(state, u=u, d=d):
            return np.asarray(drift(state, u, d), dtype=float)

        for n in range(n_sub):
            x = _rk4(rhs, x, h)
            substeps += 1
            if not np.all(np.isfinite(x)):
                t_fail = s + h * (n + 1)
                logger.error(f"궤적 발산: t={t_fail:.6g}")
                raise DivergenceError(f"non-finite state at t={t_fail:.6g}",
                                      details={"t": float(t_fail), "step": substeps})
        states[k + 1] = x

    if len(times) > 1:
        us[-1], ds[-1] = us[-2], ds[-2]
    return times, states, us, ds, substeps


def _check_step(h: float) -> float:
    if not h >= MIN_TIME_STEP:
        logger.error(f"적분 스텝이 너무 작음: {h:.3e}")
        raise ConfigurationError(f"integration step underflow ({h:.3e} < {MIN_TIME_STEP})",
                                 details={"field": "step", "value": h})
    return h


class Simulator:
    """SP/축약 궤적 적분기"""

    def __init__(self, options: Optional[SimulationOptions] = None):
        self.options = options or SimulationOptions()

    def integrate_sp(
        self,
        sys: SPSystem,
        eps: float,
        z0,
        y0,
        u_sig: Union[SignalSpec, FeedbackPolicy],
        d_sig: SignalSpec,
        t: float
    ) -> Trajectory:
        """전체 SP 시스템 궤적 (고정 스텝 RK4, h = min(h_user, ε·fast_fraction))"""
        eps = ArrayValidator.positive(eps, "eps")
        t = ArrayValidator.non_positive(t, "t")
        z0 = ArrayValidator.vector(z0, sys.n_z, "z0")
        y0 = ArrayValidator.vector(y0, sys.n_y, "y0")
        ArrayValidator.finite(np.concatenate([z0, y0]), "initial_state")

        period, h_max = self._steps(t)
        h_max = _check_step(min(h_max, eps * self.options.fast_fraction))
        times, states, us, ds, substeps = _integrate(
            lambda x, u, d: sys.joint_drift(eps, x, u, d),
            np.concatenate([z0, y0]), sys.n_z,
            _HeldSignal(u_sig, sys.u_set, t, "u"), _HeldSignal(d_sig, sys.d_set, t, "d"),
            t, period, h_max, sys.n_u, sys.n_d,
        )
        logger.debug(f"SP 궤적 완료: {sys.name}, ε={eps:g}, {substeps} RK4 스텝")
        return Trajectory(
            times=times, z=states[:, :sys.n_z], u=us, d=ds, y=states[:, sys.n_z:],
            metadata={"system": sys.name, "eps": eps, "substeps": substeps, "h_max": h_max,
                      "sample_period": period},
        )

    def integrate_reduced(
        self,
        red: ReducedSystem,
        z0,
        u_sig: Union[SignalSpec, FeedbackPolicy],
        d_sig: SignalSpec,
        t: float
    ) -> Trajectory:
        """축약 모델 궤적 (고정 스텝 RK4)"""
        t = ArrayValidator.non_positive(t, "t")
        z0 = ArrayValidator.vector(z0, red.n_z, "z0")
        ArrayValidator.finite(z0, "initial_state")

        period, h_max = self._steps(t)
        times, states, us, ds, substeps = _integrate(
            red.F, z0, red.n_z,
            _HeldSignal(u_sig, red.u_set, t, "u"), _HeldSignal(d_sig, red.d_set, t, "d"),
            t, period, _check_step(h_max), red.n_u, red.n_d,
        )
        return Trajectory(
            times=times, z=states, u=us, d=ds,
            metadata={"system": red.name, "substeps": substeps, "h_max": h_max, "sample_period": period},
        )

    def _steps(self, t: float):
        if t == 0:
            return 1.0, 1.0
        period = self.options.resolve_period(t)
        h = self.options.step if self.options.step is not None else period / 10.0
        return period, ArrayValidator.positive(h, "step")

    # ------------------------------------------------------------------
    # 도달 실험
    # ------------------------------------------------------------------
    def run_reach_experiment(
        self,
        sys: SPSystem,
        eps: float,
        field: ValueField,
        payoff: PayoffFn,
        initial_states: Sequence[Sequence[float]],
        n_disturbances: int,
        seed: int,
        eta: float,
        initial_fast_states: Optional[Sequence[Sequence[float]]] = None,
        n_jobs: int = 1
    ) -> List[Dict[str, Any]]:
        """초기 상태별로 합성 피드백 vs 균등 무작위 외란 실행 결과를 예측 라벨과 비교

        t는 field.time, 빠른 상태 초기값 기본은 y(t) = 0 입니다. 실행별 오류는 배치를
        중단하지 않고 해당 실행의 error 항목으로 기록됩니다.
        """
        eta = ArrayValidator.positive(eta, "eta")
        if n_disturbances < 1:
            raise DomainError(f"n_disturbances는 1 이상이어야 합니다: {n_disturbances}",
                              details={"field": "n_disturbances"})
        red = DynamicsService.derive_reduced(sys)
        t = field.time
        z0s = [ArrayValidator.vector(z, sys.n_z, "initial_states") for z in initial_states]
        if initial_fast_states is None:
            y0s = [np.zeros(sys.n_y) for _ in z0s]
        else:
            y0s = [ArrayValidator.vector(y, sys.n_y, "initial_fast_states") for y in initial_fast_states]
            if len(y0s) != len(z0s):
                raise DomainError("initial_fast_states 개수가 initial_states와 다릅니다",
                                  details={"field": "initial_fast_states"})

        period, _ = self._steps(t)
        seeds = np.random.default_rng(seed).integers(0, 2**31 - 1, size=(len(z0s), n_disturbances))
        jobs = [(i, int(seeds[i, k])) for i in range(len(z0s)) for k in range(n_disturbances)]
        logger.info(f"도달 실험 시작: {len(z0s)}개 초기 상태 × {n_disturbances} 외란, t={t}, ε={eps:g}")

        runs = Parallel(n_jobs=n_jobs)(
            delayed(_single_run)(self, sys, eps, field, red, payoff, z0s[i], y0s[i], run_seed, t, period)
            for i, run_seed in jobs
        )

        reports = []
        for i, (z0, y0) in enumerate(zip(z0s, y0s)):
            state_runs = runs[i * n_disturbances:(i + 1) * n_disturbances]
            v0 = interpolate_value(field, z0)
            if v0 < -eta:
                label = "inside-inner"
            elif v0 >= eta:
                label = "outside-outer"
            else:
                label = "indeterminate"
            ok = [r for r in state_runs if "error" not in r]
            reached = sum(1 for r in ok if r["reached"])
            fraction = reached / len(ok) if ok else float("nan")
            if label == "inside-inner":
                consistent = bool(ok) and reached == len(ok)
            elif label == "outside-outer":
                consistent = bool(ok) and reached == 0
            else:
                consistent = True
                logger.warning(f"초기 상태 {z0.tolist()}: V̄={v0:.4f}가 (−η, +η) 구간 안 (판정 불가)")
            reports.append({
                "initial_z": z0.tolist(),
                "initial_y": y0.tolist(),
                "reduced_value": v0,
                "predicted": label,
                "reach_fraction": fraction,
                "consistent": consistent,
                "failed_runs": len(state_runs) - len(ok),
                "clipped_queries": int(sum(r.get("clipped_queries", 0) for r in state_runs)),
                "runs": state_runs,
            })
            logger.info(f"초기 상태 {z0.tolist()}: V̄={v0:.4f}, {label}, 도달 비율 {fraction:.2f}, 일치={consistent}")
        return reports


def _single_run(simulator, sys, eps, field, red, payoff, z0, y0, run_seed, t, period) -> Dict[str, Any]:
    """피드백 제어 + 균등 무작위 외란 한 번 실행"""
    policy = synthesize_feedback(field, red, mode="clip")
    d_sig = SignalSpec.uniform_random(sys.d_set, period, run_seed)
    try:
        traj = simulator.integrate_sp(sys, eps, z0, y0, policy, d_sig, t).with_payoff(payoff)
    except SPReachError as e:
        logger.warning(f"실행 실패 (seed={run_seed}): {e.message}")
        return {"seed": run_seed, "error": e.to_dict(), "clipped_queries": policy.clipped_queries}
    except Exception as e:
        logger.exception(f"실행 중 예상치 못한 오류 (seed={run_seed}): {e}")
        wrapped = NumericalError(f"run failed: {e}", original_error=e,
                                 details={"seed": run_seed, "type": type(e).__name__})
        return {"seed": run_seed, "error": wrapped.to_dict(), "clipped_queries": policy.clipped_queries}
    return {
        "seed": run_seed,
        "reached": traj.reached_target_at_0,
        "min_payoff_along": traj.min_payoff_along,
        "final_z": traj.final_z.tolist(),
        "clipped_queries": policy.clipped_queries,
        "trajectory": traj,
    }
