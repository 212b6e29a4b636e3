from typing import Optional, Sequence
import logging

import numpy as np

from utils.exceptions import DimensionError, DomainError, NumericalError

logger = logging.getLogger("sp_reach")


class ArrayValidator:
    """벡터/행렬/스칼라 입력 유효성 검증 유틸리티"""

    @staticmethod
    def vector(value, size: Optional[int], field: str) -> np.ndarray:
        """1차원 float 벡터로 변환하고 길이를 검사"""
        arr = np.atleast_1d(np.asarray(value, dtype=float))
        if arr.ndim != 1:
            logger.error(f"{field}: 1차원 벡터가 아님 (shape={arr.shape})")
            raise DimensionError(
                f"{field} must be a vector, got shape {arr.shape}",
                details={"field": field, "shape": list(arr.shape)}
            )
        if size is not None and arr.shape[0] != size:
            logger.error(f"{field}: 차원 불일치 (예상 {size}, 실제 {arr.shape[0]})")
            raise DimensionError(
                f"{field} must have length {size}, got {arr.shape[0]}",
                details={"field": field, "expected": size, "actual": int(arr.shape[0])}
            )
        return arr

    @staticmethod
    def matrix_shape(value: np.ndarray, shape: Sequence[int], field: str) -> np.ndarray:
        """행렬(또는 배치 행렬)의 앞쪽 차원 검사"""
        arr = np.asarray(value, dtype=float)
        if arr.shape[:len(shape)] != tuple(shape):
            raise DimensionError(
                f"{field} must have leading shape {tuple(shape)}, got {arr.shape}",
                details={"field": field, "expected": list(shape), "actual": list(arr.shape)}
            )
        return arr

    @staticmethod
    def positive(value: float, field: str) -> float:
        """양의 유한 스칼라 검사"""
        value = float(value)
        if not np.isfinite(value) or value <= 0:
            logger.error(f"{field}: 양수가 아님 ({value})")
            raise DomainError(
                f"{field} must be a positive finite number, got {value}",
                details={"field": field, "value": value}
            )
        return value

    @staticmethod
    def non_positive(value: float, field: str) -> float:
        """0 이하 스칼라 검사 (종료 시각 t ≤ 0 등)"""
        value = float(value)
        if not np.isfinite(value) or value > 0:
            raise DomainError(
                f"{field} must be a finite number <= 0, got {value}",
                details={"field": field, "value": value}
            )
        return value

    @staticmethod
    def finite(value, field: str, **coordinates) -> np.ndarray:
        """비유한 값이 있으면 좌표를 담아 NumericalError"""
        arr = np.asarray(value, dtype=float)
        if not np.all(np.isfinite(arr)):
            details = {"field": field}
            details.update({k: np.asarray(v, dtype=float).tolist() for k, v in coordinates.items()})
            logger.error(f"{field}: 비유한 값 발생 {details}")
            raise NumericalError(f"non-finite {field} evaluation", details=details)
        return arr
