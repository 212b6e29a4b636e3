# models/grid.py
from dataclasses import dataclass
from typing import Any, Dict, Sequence, Tuple

import numpy as np

from utils.exceptions import DimensionError, DomainError, ValidationError


@dataclass(frozen=True)
class Grid:
    """직사각형 균일 격자 (행 우선 선형화가 표준 순서)"""
    node_counts: Tuple[int, ...]
    mins: Tuple[float, ...]
    maxs: Tuple[float, ...]
    ghost_layers: int = 1

    def __post_init__(self):
        counts = tuple(int(n) for n in np.atleast_1d(self.node_counts))
        mins = tuple(float(v) for v in np.atleast_1d(self.mins))
        maxs = tuple(float(v) for v in np.atleast_1d(self.maxs))
        object.__setattr__(self, "node_counts", counts)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

        if not (len(counts) == len(mins) == len(maxs)) or not counts:
            raise DimensionError(
                "node_counts/mins/maxs 차원이 일치해야 합니다",
                details={"field": "grid", "node_counts": list(counts), "mins": list(mins), "maxs": list(maxs)}
            )
        for i, (n, lo, hi) in enumerate(zip(counts, mins, maxs)):
            if n < 3:
                raise ValidationError(f"차원 {i}의 node_count는 3 이상이어야 합니다: {n}",
                                      details={"field": "node_counts", "dimension": i})
            if not (np.isfinite(lo) and np.isfinite(hi)) or not lo < hi:
                raise DomainError(f"차원 {i}: min < max 이어야 합니다 ({lo}, {hi})",
                                  details={"field": "mins", "dimension": i})
        if self.ghost_layers < 1:
            raise ValidationError("ghost_layers는 1 이상이어야 합니다", details={"field": "ghost_layers"})

    @classmethod
    def uniform(cls, n_dims: int, nodes: int, lo: float, hi: float) -> "Grid":
        """모든 차원이 같은 구간/노드 수인 격자"""
        return cls((nodes,) * n_dims, (lo,) * n_dims, (hi,) * n_dims)

    @property
    def n_dims(self) -> int:
        return len(self.node_counts)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.node_counts

    @property
    def size(self) -> int:
        return int(np.prod(self.node_counts))

    @property
    def spacing(self) -> np.ndarray:
        return (np.asarray(self.maxs) - np.asarray(self.mins)) / (np.asarray(self.node_counts) - 1)

    def axis(self, i: int) -> np.ndarray:
        return np.linspace(self.mins[i], self.maxs[i], self.node_counts[i])

    @property
    def coordinate_vectors(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.axis(i) for i in range(self.n_dims))

    @property
    def states(self) -> np.ndarray:
        """노드 좌표, shape (n_dims, *shape)"""
        return np.stack(np.meshgrid(*self.coordinate_vectors, indexing="ij"), axis=0)

    def contains(self, x: Sequence[float], tol: float = 1e-12) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= np.asarray(self.mins) - tol) and np.all(x <= np.asarray(self.maxs) + tol))

    def sub_grid(self, dims: Sequence[int]) -> "Grid":
        """지정 차원만으로 이루어진 격자"""
        return Grid(tuple(self.node_counts[i] for i in dims),
                    tuple(self.mins[i] for i in dims),
                    tuple(self.maxs[i] for i in dims),
                    self.ghost_layers)

    def same_axes(self, other: "Grid", dims: Sequence[int], other_dims: Sequence[int]) -> bool:
        """두 격자의 지정 축이 노드 단위로 일치하는지 확인"""
        for i, j in zip(dims, other_dims):
            if self.node_counts[i] != other.node_counts[j]:
                return False
            if not np.allclose([self.mins[i], self.maxs[i]], [other.mins[j], other.maxs[j]],
                               rtol=0.0, atol=1e-12):
                return False
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "node_counts": list(self.node_counts),
            "mins": list(self.mins),
            "maxs": list(self.maxs),
            "ghost_layers": self.ghost_layers,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "Grid":
        return cls(tuple(data["node_counts"]), tuple(data["mins"]), tuple(data["maxs"]),
                   int(data.get("ghost_layers", 1)))
