# models/certificate.py
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class LyapunovCert:
    """빠른 동역학 안정성 인증서 (P, ν)와 지수 감쇠 상수 (α, κ)

    α = √(λmax(P)/λmin(P)), κ = ν / (2 λmax(P)).
    """
    P: np.ndarray
    nu: float
    alpha_decay: float
    kappa: float
    sample_count: int = 0
    seed: Optional[int] = None

    def envelope(self, s) -> np.ndarray:
        """경과 시간 s ≥ 0에서의 감쇠 상한 α e^{−κ s}"""
        return self.alpha_decay * np.exp(-self.kappa * np.asarray(s, dtype=float))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "P": np.asarray(self.P).tolist(),
            "nu": self.nu,
            "alpha": self.alpha_decay,
            "kappa": self.kappa,
            "sample_count": self.sample_count,
            "seed": self.seed,
        }


@dataclass
class StabilityWitness:
    """안정성 가정 위반 증거: 이 (z, u, d)에서 λmax(AᵀP + PA) ≥ −tol"""
    z: List[float]
    u: List[float]
    d: List[float]
    eigenvalue: float

    def to_dict(self) -> Dict[str, Any]:
        return {"z": self.z, "u": self.u, "d": self.d, "eigenvalue": self.eigenvalue}


@dataclass
class RegularityEstimate:
    """정칙성 상수 K의 샘플 추정과 각 상한의 최대 지점"""
    K_estimate: float
    sample_count: int
    coupling_bound: float
    growth_bound: float
    coupling_argmax: Dict[str, List[float]] = field(default_factory=dict)
    growth_argmax: Dict[str, List[float]] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "K_estimate": self.K_estimate,
            "sample_count": self.sample_count,
            "coupling_bound": self.coupling_bound,
            "growth_bound": self.growth_bound,
            "coupling_argmax": self.coupling_argmax,
            "growth_argmax": self.growth_argmax,
        }


@dataclass
class IsaacsGap:
    """Isaacs 조건 검사 결과"""
    max_gap: float
    worst_z: List[float]
    worst_lambda: List[float]
    probe_count: int
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "max_gap": self.max_gap,
            "worst_point": {"z": self.worst_z, "lambda": self.worst_lambda},
            "probe_count": self.probe_count,
            "seed": self.seed,
        }


@dataclass
class DecayCheck:
    """경계층 감쇠 포락선 검사 결과"""
    worst_ratio: float
    trial_count: int
    horizon: float
    seed: Optional[int] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "worst_ratio": self.worst_ratio,
            "trial_count": self.trial_count,
            "horizon": self.horizon,
            "seed": self.seed,
        }


@dataclass
class AssumptionReport:
    """가정 1–3 및 감쇠 포락선의 샘플 기반 검증 리포트"""
    system: Dict[str, Any]
    regularity: RegularityEstimate
    stability: Any  # LyapunovCert 또는 StabilityWitness
    isaacs: IsaacsGap
    decay: Optional[DecayCheck] = None
    tolerances: Dict[str, float] = field(default_factory=dict)
    notes: Dict[str, Any] = field(default_factory=dict)

    @property
    def verdicts(self) -> Dict[str, bool]:
        verdicts = {
            "regularity": bool(np.isfinite(self.regularity.K_estimate)),
            "stability": isinstance(self.stability, LyapunovCert),
            "isaacs": self.isaacs.max_gap <= self.tolerances.get("isaacs_tol", 0.0),
        }
        if self.decay is not None:
            verdicts["decay"] = self.decay.worst_ratio <= 1.0 + self.tolerances.get("decay_tol", 0.0)
        return verdicts

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "system": self.system,
            "regularity": self.regularity.to_dict(),
            "stability": {
                "status": "certified" if isinstance(self.stability, LyapunovCert) else "failed",
                **self.stability.to_dict(),
            },
            "isaacs": self.isaacs.to_dict(),
            "decay": self.decay.to_dict() if self.decay else None,
            "tolerances": self.tolerances,
            "verdicts": {k: ("pass" if v else "fail") for k, v in self.verdicts.items()},
            "notes": self.notes,
        }
