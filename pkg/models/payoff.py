# models/payoff.py
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Tuple

import numpy as np


@dataclass(frozen=True, eq=False)
class PayoffFn:
    """유계 Lipschitz 종단 보상 함수 ℓ (목표 집합 𝒮 = {ℓ < 0})

    evaluator는 shape (n, *batch)의 좌표를 받아 shape (*batch)을 반환합니다.
    """
    evaluator: Callable[[np.ndarray], np.ndarray]
    lipschitz_bound: float
    saturation: float
    n_dims: int
    description: Dict[str, Any] = field(default_factory=dict)

    def __call__(self, z) -> np.ndarray:
        return self.evaluator(np.asarray(z, dtype=float))

    def on_grid(self, states: np.ndarray) -> np.ndarray:
        """격자 노드 좌표 (n_dims, *shape)에서 ℓ 값"""
        return self.evaluator(states[:self.n_dims])

    def in_target(self, z) -> bool:
        return bool(self(z) < 0)

    def target_box(self) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
        return tuple(self.description.get("target_lower", ())), tuple(self.description.get("target_upper", ()))

    def to_dict(self) -> Dict[str, Any]:
        data = dict(self.description)
        data.update({"lipschitz_bound": self.lipschitz_bound, "saturation": self.saturation})
        return data
