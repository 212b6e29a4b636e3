"""그림 재현 테스트 공용 fixture

유전자 회로 시스템, 목표 보상, 101 노드 축약 가치 필드 (0.05 간격 스냅샷), 전체 (z, y) 격자를
제공합니다. 축약 풀이는 모듈 단위로 한 번만 수행합니다.
"""

import logging

import pytest

from models.grid import Grid
from services.dynamics_service import DynamicsService
from services.hj_solver import HJSolver, SolveOptions
from services.model_catalog import make_genetic_circuit
from services.payoff_builder import build_payoff_box

GENETIC_T_FINAL = -0.5
GENETIC_ETA = 0.1


@pytest.fixture(autouse=True)
def reset_logger():
    """각 테스트 전후로 sp_reach 로거 핸들러를 정리합니다."""
    logger = logging.getLogger("sp_reach")
    logger.handlers.clear()

    yield

    for handler in list(logger.handlers):
        handler.close()
    logger.handlers.clear()


@pytest.fixture(scope="module")
def genetic_system():
    return make_genetic_circuit()


@pytest.fixture(scope="module")
def genetic_payoff():
    """𝒮 = (0.25, 0.75), ℓ(z) = min{10(|z − 0.5| − 0.25), 3}"""
    return build_payoff_box([0.25], [0.75], slope=10.0, cap=3.0)


@pytest.fixture(scope="module")
def genetic_reduced(genetic_system, genetic_payoff):
    """101 노드 축약 가치 함수, 0.05 간격 스냅샷 포함"""
    snapshots = tuple(-0.05 * k for k in range(11))
    solver = HJSolver(SolveOptions(snapshot_times=snapshots))
    return solver.solve_reduced_value(
        DynamicsService.derive_reduced(genetic_system), genetic_payoff,
        Grid((101,), (0.0,), (1.0,)), GENETIC_T_FINAL
    )


@pytest.fixture(scope="module")
def genetic_full_grid():
    return Grid((101, 101), (0.0, 0.0), (1.0, 1.0))
