# cli/dependencies.py
"""실행 구성 로딩과 서비스 생성"""

import copy
import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from cli.schemas.run_config import GridBlock, RunConfig
from config.settings import verify_output_dir
from models.box_set import BoxSet
from models.grid import Grid
from models.payoff import PayoffFn
from models.system import SPSystem
from services.assumption_checker import AssumptionChecker, lyapunov_matrix
from services.hj_solver import HJSolver, SolveOptions
from services.model_catalog import ModelCatalog
from services.payoff_builder import build_payoff_box
from services.simulator import SimulationOptions, Simulator
from storage.artifact_repository import ArtifactRepository
from utils.exceptions import ConfigurationError

logger = logging.getLogger("sp_reach")


def read_config_document(path: Optional[str]) -> Dict[str, Any]:
    """JSON 구성 파일 읽기 (구문 오류는 줄/열 위치 포함)"""
    if path is None:
        return {}
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigurationError(f"구성 파일을 읽을 수 없습니다: {path}", original_error=e,
                                 details={"field": "config", "path": str(path)})
    try:
        document = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(
            f"구성 파일 JSON 오류 ({path}:{e.lineno}:{e.colno}): {e.msg}",
            original_error=e,
            details={"field": "config", "line": e.lineno, "column": e.colno}
        )
    if not isinstance(document, dict):
        raise ConfigurationError("구성 문서는 JSON 객체여야 합니다", details={"field": "config"})
    return document


def merge_documents(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    """블록 단위 재귀 병합 (override 우선)"""
    merged = copy.deepcopy(base)
    for key, value in override.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = merge_documents(merged[key], value)
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def apply_overrides(
    document: Dict[str, Any],
    eps: Optional[float] = None,
    eta: Optional[float] = None,
    t: Optional[float] = None,
    grid: Optional[int] = None,
    seed: Optional[int] = None,
    out: Optional[str] = None
) -> Dict[str, Any]:
    """명령줄 옵션을 검증 전 문서에 반영"""
    doc = copy.deepcopy(document)
    solve = doc.setdefault("solve", {})
    if eps is not None:
        solve["eps"] = [eps]
    if eta is not None:
        solve["eta"] = eta
    if t is not None:
        solve["t_final"] = t
    if grid is not None:
        for key in ("grid", "full_grid"):
            if isinstance(doc.get(key), dict):
                nodes = doc[key].get("nodes") or [grid]
                doc[key]["nodes"] = [grid] * len(nodes)
    if seed is not None:
        doc["seed"] = seed
        doc.setdefault("experiment", {})["seed"] = seed
    if out is not None:
        doc.setdefault("output", {})["directory"] = out
    return doc


def load_run_config(document: Dict[str, Any]) -> RunConfig:
    """엄격한 스키마 검증 (알 수 없는 키, 범위 위반은 필드 경로와 함께 보고)"""
    try:
        return RunConfig.model_validate(document)
    except PydanticValidationError as e:
        errors = [
            {"field": ".".join(str(p) for p in err["loc"]), "message": err["msg"]}
            for err in e.errors()
        ]
        summary = "; ".join(f"{err['field']}: {err['message']}" for err in errors)
        logger.error(f"구성 검증 실패: {summary}")
        raise ConfigurationError(f"invalid configuration: {summary}", original_error=e,
                                 details={"errors": errors})


def build_system(cfg: RunConfig) -> SPSystem:
    return ModelCatalog.build(cfg.system.to_document())


def build_grid(block: GridBlock) -> Grid:
    return Grid(tuple(block.nodes), tuple(block.lower), tuple(block.upper))


def build_payoff(cfg: RunConfig) -> PayoffFn:
    p = cfg.payoff
    return build_payoff_box(p.target_lower, p.target_upper, p.slope, p.cap, p.free_dims)


def get_solver(cfg: RunConfig, track_extremes: bool = True) -> HJSolver:
    s = cfg.solve
    return HJSolver(SolveOptions(
        cfl=s.cfl,
        scheme=s.scheme,
        track_extremes=track_extremes,
        snapshot_times=tuple(s.snapshot_times),
        allow_high_dim=s.allow_high_dim,
    ))


def get_assumption_checker(cfg: RunConfig) -> AssumptionChecker:
    return AssumptionChecker(seed=cfg.seed)


def get_simulator(cfg: RunConfig) -> Simulator:
    e = cfg.experiment
    return Simulator(SimulationOptions(sample_period=e.sample_period, fast_fraction=e.fast_fraction))


def get_repository(cfg: RunConfig) -> ArtifactRepository:
    return ArtifactRepository(verify_output_dir(cfg.output.directory))


def verification_inputs(cfg: RunConfig, sys: SPSystem) -> Tuple[np.ndarray, BoxSet]:
    """가정 검증용 P 행렬과 z 탐색 영역"""
    v = cfg.verify
    if v.z_region is not None:
        region = BoxSet(tuple(v.z_region.lower), tuple(v.z_region.upper), v.z_region.samples)
    else:
        region = BoxSet(tuple(cfg.grid.lower), tuple(cfg.grid.upper))
    if v.P is not None:
        P = np.asarray(v.P, dtype=float)
    elif v.lyapunov == "nominal":
        center = (np.asarray(region.lower) + np.asarray(region.upper)) / 2.0
        P = lyapunov_matrix(sys, center)
    else:
        P = np.eye(sys.n_y)
    return P, region
