# models/value_field.py
from dataclasses import dataclass, field, replace
from typing import Any, Dict, Optional, Tuple

import numpy as np

from models.grid import Grid


@dataclass(frozen=True, eq=False)
class ValueField:
    """격자 위 가치 함수 V(t, ·)

    provenance가 "reduced"이면 V̄(t, z), "full"이면 V_ε(t, z, y)이며 이 경우
    앞쪽 n_slow개 축이 z입니다. running_min/running_max는 [t, 0]의 모든
    채택된 시간 스텝에 대한 V의 최솟값/최댓값입니다.
    """
    grid: Grid
    time: float
    values: np.ndarray
    running_min: Optional[np.ndarray] = None
    running_max: Optional[np.ndarray] = None
    provenance: str = "reduced"
    n_slow: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)
    snapshots: Tuple["ValueField", ...] = ()

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if self.n_slow is None:
            object.__setattr__(self, "n_slow", self.grid.n_dims)
        for name in ("values", "running_min", "running_max"):
            arr = getattr(self, name)
            if arr is not None and np.shape(arr) != self.grid.shape:
                raise ValueError(f"{name} shape {np.shape(arr)} != grid shape {self.grid.shape}")
        # 외부에서 수정되지 않도록 읽기 전용
        for arr in (self.values, self.running_min, self.running_max):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def has_extremes(self) -> bool:
        return self.running_min is not None and self.running_max is not None

    def without_snapshots(self) -> "ValueField":
        return replace(self, snapshots=())

    def snapshot_at(self, t: float) -> "ValueField":
        """가장 가까운 저장 시각의 스냅샷 (자신 포함)"""
        candidates = list(self.snapshots) + [self.without_snapshots()]
        return min(candidates, key=lambda s: (abs(s.time - t), -s.time))

    def to_dict(self) -> Dict[str, Any]:
        """요약 정보 (값 배열은 제외)"""
        return {
            "grid": self.grid.to_dict(),
            "time": self.time,
            "provenance": self.provenance,
            "n_slow": self.n_slow,
            "min": float(self.values.min()),
            "max": float(self.values.max()),
            "has_extremes": self.has_extremes,
            "snapshot_times": [s.time for s in self.snapshots],
            "metadata": self.metadata,
        }
