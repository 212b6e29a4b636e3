"""목표 상자 집합에 대한 종단 보상 함수 생성"""

import logging
from typing import Iterable, Optional, Sequence

import numpy as np

from models.payoff import PayoffFn
from utils.exceptions import DomainError, ValidationError
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")


def build_payoff_box(
    target_lower: Sequence[Optional[float]],
    target_upper: Sequence[Optional[float]],
    slope: float,
    cap: float,
    free_dims: Iterable[int] = ()
) -> PayoffFn:
    """ℓ(z) = min{ max_{i 제약} slope·(|zᵢ − cᵢ| − rᵢ), cap }

    cᵢ, rᵢ는 목표 구간 (lowerᵢ, upperᵢ)의 중심과 반폭이며, 따라서 {ℓ < 0}은 제약 차원의
    열린 상자와 정확히 일치합니다. free_dims의 좌표는 ℓ에 기여하지 않습니다
    (𝒮 = ℝ × (.4,.6) × (.4,.6) 같은 목표). 자유 차원의 경계는 None이어도 됩니다.

    Raises:
        DomainError: 빈 목표 구간, slope ≤ 0, cap ≤ 0, 제약 차원 없음
    """
    slope = ArrayValidator.positive(slope, "slope")
    cap = ArrayValidator.positive(cap, "cap")
    if len(target_lower) != len(target_upper):
        raise ValidationError("target_lower/target_upper 길이가 다릅니다",
                              details={"field": "target_upper"})

    n_dims = len(target_lower)
    free = sorted(set(int(i) for i in free_dims))
    if any(i < 0 or i >= n_dims for i in free):
        raise ValidationError(f"free_dims가 범위를 벗어남: {free}", details={"field": "free_dims"})
    constrained = [i for i in range(n_dims) if i not in free]
    if not constrained:
        raise DomainError("제약 차원이 하나 이상 필요합니다", details={"field": "free_dims"})

    lows = np.array([float(target_lower[i]) for i in constrained])
    highs = np.array([float(target_upper[i]) for i in constrained])
    if not (np.all(np.isfinite(lows)) and np.all(np.isfinite(highs))) or np.any(lows >= highs):
        logger.error(f"빈 목표 집합: lower={lows.tolist()}, upper={highs.tolist()}")
        raise DomainError("empty target box", details={"field": "target", "lower": lows.tolist(),
                                                        "upper": highs.tolist()})

    centers = (lows + highs) / 2.0
    radii = (highs - lows) / 2.0
    index = np.array(constrained)

    def evaluator(z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        coords = z[index]
        shape = (len(index),) + (1,) * (coords.ndim - 1)
        dist = np.abs(coords - centers.reshape(shape)) - radii.reshape(shape)
        return np.minimum(slope * dist.max(axis=0), cap)

    return PayoffFn(
        evaluator=evaluator,
        lipschitz_bound=slope,
        saturation=max(cap, slope * float(radii.max())),
        n_dims=n_dims,
        description={
            "target_lower": [None if i in free else float(target_lower[i]) for i in range(n_dims)],
            "target_upper": [None if i in free else float(target_upper[i]) for i in range(n_dims)],
            "slope": slope,
            "cap": cap,
            "free_dims": free,
        }
    )
