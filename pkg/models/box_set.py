# models/box_set.py
from dataclasses import dataclass
from itertools import product
from typing import Any, Dict, Sequence, Tuple
import logging

import numpy as np

from utils.exceptions import DimensionError, DomainError, ValidationError

logger = logging.getLogger("sp_reach")


@dataclass(frozen=True)
class BoxSet:
    """축 정렬 상자 집합 (제어 집합 𝒰, 외란 집합 𝒟, 탐색 영역 등)

    samples_per_dim은 상자 위 탐색을 격자로 이산화할 때 차원당 샘플 수이며,
    꼭짓점은 항상 격자에 포함됩니다.
    """
    lower: Tuple[float, ...]
    upper: Tuple[float, ...]
    samples_per_dim: int = 2

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)

        if len(lower) != len(upper):
            raise DimensionError(
                f"lower/upper 길이 불일치: {len(lower)} != {len(upper)}",
                details={"field": "upper", "expected": len(lower), "actual": len(upper)}
            )
        if len(lower) == 0:
            raise DimensionError("상자 집합은 최소 1차원이어야 합니다", details={"field": "lower"})
        if not all(np.isfinite(lower)) or not all(np.isfinite(upper)):
            raise DomainError("상자 경계는 유한해야 합니다 (compact)", details={"field": "lower/upper"})
        for i, (lo, hi) in enumerate(zip(lower, upper)):
            if lo > hi:
                raise DomainError(
                    f"빈 상자: 차원 {i}에서 lower={lo} > upper={hi}",
                    details={"field": "lower", "dimension": i}
                )
        if int(self.samples_per_dim) != self.samples_per_dim or self.samples_per_dim < 2:
            raise ValidationError(
                f"samples_per_dim은 2 이상의 정수여야 합니다: {self.samples_per_dim}",
                details={"field": "samples_per_dim"}
            )

    @property
    def dim(self) -> int:
        return len(self.lower)

    def axis_samples(self, i: int) -> np.ndarray:
        """i번째 차원의 샘플 (양 끝점 포함, 퇴화 차원은 한 점)"""
        lo, hi = self.lower[i], self.upper[i]
        if lo == hi:
            return np.array([lo])
        return np.linspace(lo, hi, self.samples_per_dim)

    def lattice(self) -> np.ndarray:
        """행 우선 순서의 샘플 격자, shape (점 개수, dim)"""
        axes = [self.axis_samples(i) for i in range(self.dim)]
        return np.array(list(product(*axes)), dtype=float)

    def vertices(self) -> np.ndarray:
        """상자의 꼭짓점 (퇴화 차원은 한 점)"""
        axes = [np.unique([lo, hi]) for lo, hi in zip(self.lower, self.upper)]
        return np.array(list(product(*axes)), dtype=float)

    def refined(self, samples_per_dim: int) -> "BoxSet":
        return BoxSet(self.lower, self.upper, samples_per_dim)

    def contains(self, x: Sequence[float], tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.asarray(self.lower) - tol) and np.all(x <= np.asarray(self.upper) + tol))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """균등 분포 무작위 샘플, shape (n, dim)"""
        return rng.uniform(np.asarray(self.lower), np.asarray(self.upper), size=(n, self.dim))

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환 (모델 기술 문서 형식)"""
        return {
            "lower": list(self.lower),
            "upper": list(self.upper),
            "samples": self.samples_per_dim,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "BoxSet":
        """딕셔너리에서 객체 생성"""
        return cls(
            lower=tuple(data["lower"]),
            upper=tuple(data["upper"]),
            samples_per_dim=int(data.get("samples", 2))
        )
