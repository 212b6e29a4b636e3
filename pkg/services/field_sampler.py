"""가치 필드 보간 및 기울기 계산"""

import logging
from itertools import product

import numpy as np

from models.value_field import ValueField
from utils.exceptions import DomainError
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")

_BOUNDS_TOL = 1e-12


def interpolate_value(field: ValueField, x, values: np.ndarray = None) -> float:
    """격자 값의 다중선형 보간

    Args:
        field: 가치 필드
        x: 격자 전체 차원의 좌표
        values: 보간할 노드 배열 (None이면 field.values; running_min 등에 사용)

    Raises:
        DomainError: 좌표가 격자 밖인 경우 (details["dimension"])
    """
    grid = field.grid
    x = ArrayValidator.vector(x, grid.n_dims, "x")
    data = field.values if values is None else values

    lower_idx = []
    weights = []
    for i in range(grid.n_dims):
        lo, hi = grid.mins[i], grid.maxs[i]
        if x[i] < lo - _BOUNDS_TOL or x[i] > hi + _BOUNDS_TOL:
            raise DomainError(
                f"x[{i}]={x[i]}이 격자 범위 [{lo}, {hi}]를 벗어남",
                details={"field": "x", "dimension": i, "value": float(x[i])}
            )
        s = (min(max(x[i], lo), hi) - lo) / grid.spacing[i]
        if abs(s - round(s)) < 1e-9:
            s = float(round(s))
        k = min(int(np.floor(s)), grid.node_counts[i] - 2)
        lower_idx.append(k)
        weights.append(s - k)

    total = 0.0
    for corner in product((0, 1), repeat=grid.n_dims):
        w = 1.0
        for i, bit in enumerate(corner):
            w *= weights[i] if bit else 1.0 - weights[i]
        if w != 0.0:
            total += w * data[tuple(k + b for k, b in zip(lower_idx, corner))]
    return float(total)


def gradient_at(field: ValueField, x, values: np.ndarray = None) -> np.ndarray:
    """보간 필드의 중앙 차분 기울기 (차원별 스텐실 h = 격자 간격)

    Raises:
        DomainError: 경계에서 한 셀 이내인 경우
    """
    grid = field.grid
    x = ArrayValidator.vector(x, grid.n_dims, "x")
    spacing = grid.spacing
    for i in range(grid.n_dims):
        if x[i] - spacing[i] < grid.mins[i] - _BOUNDS_TOL or x[i] + spacing[i] > grid.maxs[i] + _BOUNDS_TOL:
            raise DomainError(
                f"x[{i}]={x[i]}이 경계에서 한 셀 이내입니다",
                details={"field": "x", "dimension": i, "value": float(x[i])}
            )

    grad = np.empty(grid.n_dims)
    for i in range(grid.n_dims):
        step = np.zeros(grid.n_dims)
        step[i] = spacing[i]
        plus = interpolate_value(field, x + step, values)
        minus = interpolate_value(field, x - step, values)
        grad[i] = (plus - minus) / (2.0 * spacing[i])
    return grad


def interior_projection(field: ValueField, x) -> np.ndarray:
    """기울기 계산이 가능한 내부 영역 [min + h, max − h]로 좌표 사영"""
    grid = field.grid
    x = ArrayValidator.vector(x, grid.n_dims, "x")
    spacing = grid.spacing
    return np.clip(x, np.asarray(grid.mins) + spacing, np.asarray(grid.maxs) - spacing)
