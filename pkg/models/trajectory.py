# models/trajectory.py
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import numpy as np

from models.box_set import BoxSet
from utils.exceptions import DomainError

SIGNAL_POLICIES = ("sequence", "constant", "uniform-random", "adversarial")


@dataclass(frozen=True, eq=False)
class SignalSpec:
    """영차 유지(piecewise-constant) 제어/외란 신호

    policy:
      - "sequence": values를 sample_period마다 순서대로 유지 (끝나면 마지막 값 유지)
      - "constant": values[0]을 계속 유지
      - "uniform-random": seed로 만든 난수로 주기마다 box에서 균등 샘플
      - "adversarial": 현재 상태와 가치 기울기에 대한 주기별 최대화자 (시뮬레이터가 해석)
    """
    box: BoxSet
    sample_period: float
    policy: str = "constant"
    values: Optional[np.ndarray] = None
    seed: Optional[int] = None
    field_ref: Any = None

    def __post_init__(self):
        if self.policy not in SIGNAL_POLICIES:
            raise DomainError(f"알 수 없는 신호 정책: {self.policy}", details={"field": "policy"})
        if not self.sample_period > 0:
            raise DomainError(f"sample_period는 양수여야 합니다: {self.sample_period}",
                              details={"field": "sample_period"})
        if self.values is not None:
            values = np.atleast_2d(np.asarray(self.values, dtype=float))
            for v in values:
                if not self.box.contains(v):
                    raise DomainError(f"신호 값 {v.tolist()}이 상자 집합을 벗어남",
                                      details={"field": "values", "value": v.tolist()})
            object.__setattr__(self, "values", values)
        if self.policy in ("sequence", "constant") and self.values is None:
            raise DomainError(f"{self.policy} 정책에는 values가 필요합니다", details={"field": "values"})

    @classmethod
    def constant(cls, box: BoxSet, value: Sequence[float], sample_period: float = 1.0) -> "SignalSpec":
        return cls(box=box, sample_period=sample_period, policy="constant", values=np.atleast_1d(value))

    @classmethod
    def uniform_random(cls, box: BoxSet, sample_period: float, seed: int) -> "SignalSpec":
        return cls(box=box, sample_period=sample_period, policy="uniform-random", seed=seed)

    @classmethod
    def adversarial(cls, box: BoxSet, sample_period: float, field_ref) -> "SignalSpec":
        return cls(box=box, sample_period=sample_period, policy="adversarial", field_ref=field_ref)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "policy": self.policy,
            "sample_period": self.sample_period,
            "seed": self.seed,
            "values": None if self.values is None else self.values.tolist(),
        }


@dataclass
class Trajectory:
    """[t, 0] 위의 궤적 (SP 실행이면 y 포함)"""
    times: np.ndarray
    z: np.ndarray  # (len(times), n_z)
    u: np.ndarray  # (len(times), n_u) - 각 시각에서 적용된 값 (마지막은 직전 값 반복)
    d: np.ndarray  # (len(times), n_d)
    y: Optional[np.ndarray] = None  # (len(times), n_y)
    payoff_along: Optional[np.ndarray] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def final_z(self) -> np.ndarray:
        return self.z[-1]

    @property
    def reached_target_at_0(self) -> bool:
        if self.payoff_along is None:
            raise ValueError("payoff_along이 계산되지 않았습니다")
        return bool(self.payoff_along[-1] < 0)

    @property
    def min_payoff_along(self) -> float:
        if self.payoff_along is None:
            raise ValueError("payoff_along이 계산되지 않았습니다")
        return float(np.min(self.payoff_along))

    def with_payoff(self, ell: Callable[[np.ndarray], np.ndarray]) -> "Trajectory":
        """저장된 상태로부터 ℓ(z(s))를 다시 계산"""
        self.payoff_along = np.asarray(ell(self.z.T), dtype=float)
        return self

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "t": float(self.times[0]),
            "steps": int(len(self.times)),
            "initial_z": self.z[0].tolist(),
            "final_z": self.z[-1].tolist(),
            "metadata": self.metadata,
        }
        if self.payoff_along is not None:
            data["reached_target_at_0"] = self.reached_target_at_0
            data["min_payoff_along"] = self.min_payoff_along
        return data
