# models/system.py
"""특이 섭동(SP) 게임 동역학 모델

모든 동역학 함수는 배치 평가를 지원합니다. 상태 z의 shape은 (n_z, *batch)이고
u, d는 1차원 벡터입니다. 반환 shape 규약:

    f: (n_z, *batch)        g: (n_y, *batch)
    M: (n_z, n_y, *batch)   A: (n_y, n_y, *batch)
    F: (n_z, *batch)
"""
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Optional, Union

import numpy as np

from models.box_set import BoxSet

DynamicsMap = Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray]
CouplingMap = Callable[[np.ndarray], np.ndarray]


def matvec(mat: np.ndarray, vec: np.ndarray) -> np.ndarray:
    """배치 행렬-벡터 곱: (m, n, *batch) x (n, *batch) -> (m, *batch)"""
    return np.einsum("ij...,j...->i...", mat, vec)


def matmul(left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """배치 행렬 곱: (m, k, *batch) x (k, n, *batch) -> (m, n, *batch)"""
    return np.einsum("ik...,kj...->ij...", left, right)


def broadcast_batch(value, batch_shape) -> np.ndarray:
    """상수 행렬/벡터를 배치 shape으로 확장"""
    value = np.asarray(value, dtype=float)
    return np.broadcast_to(value.reshape(value.shape + (1,) * len(batch_shape)),
                           value.shape + tuple(batch_shape))


@dataclass(frozen=True, eq=False)
class SPSystem:
    """SP 시스템: ż = f + M·A·y, εẏ = g + A·y

    ε는 저장하지 않고 연산 인자로 받습니다.
    """
    name: str
    n_z: int
    n_y: int
    f: DynamicsMap
    g: DynamicsMap
    M: CouplingMap
    A: DynamicsMap
    u_set: BoxSet
    d_set: BoxSet
    parameters: Dict[str, Any] = field(default_factory=dict)

    @property
    def n_u(self) -> int:
        return self.u_set.dim

    @property
    def n_d(self) -> int:
        return self.d_set.dim

    def slow_reduced_drift(self, z: np.ndarray, u: np.ndarray, d: np.ndarray) -> np.ndarray:
        """F = f − M·g (축약 모델의 느린 동역학)"""
        return self.f(z, u, d) - matvec(self.M(z), self.g(z, u, d))

    def joint_drift(self, eps: float, x: np.ndarray, u: np.ndarray, d: np.ndarray) -> np.ndarray:
        """결합 상태 x = (z, y)에 대한 전체 SP 동역학"""
        z, y = x[:self.n_z], x[self.n_z:]
        a = self.A(z, u, d)
        zdot = self.f(z, u, d) + matvec(matmul(self.M(z), a), y)
        ydot = (self.g(z, u, d) + matvec(a, y)) / eps
        return np.concatenate([zdot, ydot], axis=0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n_z": self.n_z,
            "n_y": self.n_y,
            "u_set": self.u_set.to_dict(),
            "d_set": self.d_set.to_dict(),
            "parameters": {k: v for k, v in self.parameters.items() if _is_reportable(v)},
        }


@dataclass(frozen=True, eq=False)
class ReducedSystem:
    """느린 상태만의 축약 모델 ż = F(z, u, d)

    provenance는 유도 원본 SPSystem이거나 직접 작성한 모델이면 "handwritten"입니다.
    """
    n_z: int
    F: DynamicsMap
    u_set: BoxSet
    d_set: BoxSet
    provenance: Union[SPSystem, str] = "handwritten"
    name: Optional[str] = None

    @property
    def n_u(self) -> int:
        return self.u_set.dim

    @property
    def n_d(self) -> int:
        return self.d_set.dim

    @property
    def is_derived(self) -> bool:
        return isinstance(self.provenance, SPSystem)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "n_z": self.n_z,
            "u_set": self.u_set.to_dict(),
            "d_set": self.d_set.to_dict(),
            "provenance": self.provenance.name if self.is_derived else self.provenance,
        }


def _is_reportable(value) -> bool:
    return isinstance(value, (int, float, str, bool, list, tuple, type(None)))
