"""SP 동역학 평가 및 축약 모델 유도 서비스"""

import logging
from typing import Tuple

import numpy as np

from models.system import ReducedSystem, SPSystem, matmul, matvec
from utils.exceptions import DimensionError, NumericalError
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")


class DynamicsService:
    """SP 시스템 우변 평가와 축약 모델 유도"""

    @staticmethod
    def eval_sp_rhs(
        sys: SPSystem,
        eps: float,
        z,
        y,
        u,
        d
    ) -> Tuple[np.ndarray, np.ndarray]:
        """SP 시스템 우변 평가

        ż = f(z,u,d) + M(z)A(z,u,d)y,  ẏ = (g(z,u,d) + A(z,u,d)y) / ε

        Raises:
            DimensionError: 입력 차원이 시스템과 맞지 않는 경우 (details["field"])
            DomainError: eps ≤ 0
        """
        eps = ArrayValidator.positive(eps, "eps")
        z = ArrayValidator.vector(z, sys.n_z, "z")
        y = ArrayValidator.vector(y, sys.n_y, "y")
        u = ArrayValidator.vector(u, sys.n_u, "u")
        d = ArrayValidator.vector(d, sys.n_d, "d")

        f = ArrayValidator.matrix_shape(sys.f(z, u, d), (sys.n_z,), "f")
        g = ArrayValidator.matrix_shape(sys.g(z, u, d), (sys.n_y,), "g")
        m = ArrayValidator.matrix_shape(sys.M(z), (sys.n_z, sys.n_y), "M")
        a = ArrayValidator.matrix_shape(sys.A(z, u, d), (sys.n_y, sys.n_y), "A")

        zdot = f + matvec(matmul(m, a), y)
        ydot = (g + matvec(a, y)) / eps
        return zdot, ydot

    @staticmethod
    def derive_reduced(sys: SPSystem) -> ReducedSystem:
        """F(z,u,d) = f(z,u,d) − M(z)g(z,u,d) 축약 모델 유도

        F는 SPSystem.slow_reduced_drift를 그대로 사용하므로 f − Mg와 같은
        연산 경로로 평가됩니다.
        """
        if sys.n_z < 1 or sys.n_y < 1:
            raise DimensionError(
                f"n_z, n_y는 1 이상이어야 합니다: ({sys.n_z}, {sys.n_y})",
                details={"field": "n_z" if sys.n_z < 1 else "n_y"}
            )

        logger.debug(f"축약 모델 유도: {sys.name} (n_z={sys.n_z}, n_y={sys.n_y})")
        return ReducedSystem(
            n_z=sys.n_z,
            F=sys.slow_reduced_drift,
            u_set=sys.u_set,
            d_set=sys.d_set,
            provenance=sys,
            name=f"{sys.name}-reduced"
        )

    @staticmethod
    def joint_system(sys: SPSystem, eps: float) -> ReducedSystem:
        """결합 상태 (z, y)의 전체 SP 동역학을 일반 모델로 감싸기

        전체 가치 함수 풀이는 축약 모델 풀이와 같은 코드 경로를 사용합니다.
        """
        eps = ArrayValidator.positive(eps, "eps")

        def joint(x, u, d):
            return sys.joint_drift(eps, x, u, d)

        return ReducedSystem(
            n_z=sys.n_z + sys.n_y,
            F=joint,
            u_set=sys.u_set,
            d_set=sys.d_set,
            provenance="handwritten",
            name=f"{sys.name}-joint-eps{eps:g}"
        )

    @staticmethod
    def eval_reduced(red: ReducedSystem, z, u, d) -> np.ndarray:
        """축약 모델 F 단일 지점 평가 (비유한 값 검사 포함)"""
        z = ArrayValidator.vector(z, red.n_z, "z")
        u = ArrayValidator.vector(u, red.n_u, "u")
        d = ArrayValidator.vector(d, red.n_d, "d")
        value = np.asarray(red.F(z, u, d), dtype=float)
        if not np.all(np.isfinite(value)):
            raise NumericalError(
                "non-finite F evaluation",
                details={"z": z.tolist(), "u": u.tolist(), "d": d.tolist()}
            )
        return value
