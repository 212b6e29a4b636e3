# models/reach.py
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from models.grid import Grid

BOUND_KINDS = ("BRS", "BRT-inner", "BST-outer")


@dataclass(frozen=True, eq=False)
class ReachBounds:
    """축약 가치 함수의 ±η 준위 집합으로 만든 내부/외부 근사 마스크

    inner_mask = {V̄ < −η}, outer_mask = {V̄ < +η}. y 방향 곱집합은 암묵적입니다.
    level_values는 마스크를 만든 노드 값 (BRS는 V̄, 튜브는 running_min/running_max)입니다.
    """
    grid: Grid
    eta: float
    t: float
    inner_mask: np.ndarray
    outer_mask: np.ndarray
    kind: str = "BRS"
    level_values: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in BOUND_KINDS:
            raise ValueError(f"알 수 없는 kind: {self.kind}")
        if not self.eta > 0:
            raise ValueError(f"eta는 양수여야 합니다: {self.eta}")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "eta": self.eta,
            "t": self.t,
            "inner_nodes": int(np.count_nonzero(self.inner_mask)),
            "outer_nodes": int(np.count_nonzero(self.outer_mask)),
            "grid": self.grid.to_dict(),
        }


@dataclass
class ContainmentViolation:
    """포함 관계 위반 노드"""
    inclusion: str  # "inner" 또는 "outer"
    coordinates: List[float]
    reduced_value: float
    full_value: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "inclusion": self.inclusion,
            "coordinates": self.coordinates,
            "reduced_value": self.reduced_value,
            "full_value": self.full_value,
        }


@dataclass
class ContainmentReport:
    """inner × 𝒴 ⊆ {V_ε ≤ 0} ⊆ outer × 𝒴 검사 결과"""
    checked_nodes: int
    dilation_cells: int
    eta: float
    violations: List[ContainmentViolation] = field(default_factory=list)

    @property
    def verdict(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {
            "checked_nodes": self.checked_nodes,
            "dilation_cells": self.dilation_cells,
            "eta": self.eta,
            "verdict": "pass" if self.verdict else "fail",
            "violation_count": len(self.violations),
            "violations": [v.to_dict() for v in self.violations],
        }
