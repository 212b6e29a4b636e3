# cli/commands/common.py
"""명령 공통 옵션, 실행 래퍼, 오류 → 종료 코드 변환"""

import functools
import json
import logging
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, Optional, Sequence

import click
import numpy as np

from cli.dependencies import (
    apply_overrides, get_repository, load_run_config, merge_documents, read_config_document
)
from cli.schemas.presets import preset_document
from cli.schemas.run_config import RunConfig
from config.logging_config import setup_logging
from config.settings import LOG_DIR, LOG_LEVEL
from models.payoff import PayoffFn
from models.value_field import ValueField
from services.reach_service import ReachService
from storage.artifact_repository import ArtifactRepository, to_jsonable
from storage.svg_overlay import ContourOverlay
from utils.exceptions import (
    ArtifactError, ConfigurationError, NumericalError, SPReachError, ValidationError
)

logger = logging.getLogger("sp_reach")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CONTAINMENT = 4


class ContainmentFailure(Exception):
    """--expect-pass 포함 검사 실패"""

    def __init__(self, results: Dict[str, Any]):
        super().__init__("containment verdict failed")
        self.results = results


@dataclass
class RunContext:
    """명령 실행 단위 컨텍스트"""
    command: str
    config: RunConfig
    document: Dict[str, Any]
    repository: ArtifactRepository

    def wants(self, fmt: str) -> bool:
        return fmt in self.config.output.formats


def run_options(func: Callable) -> Callable:
    """모든 하위 명령의 공통 옵션"""
    options = [
        click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                     help="실행 구성 JSON 파일"),
        click.option("--eps", type=float, default=None, help="ε (구성의 eps 목록을 대체)"),
        click.option("--eta", type=float, default=None, help="준위 여유 η"),
        click.option("--t", "t_final", type=float, default=None, help="종료 시각 t (≤ 0)"),
        click.option("--grid", "grid_nodes", type=int, default=None, help="차원별 노드 수"),
        click.option("--seed", type=int, default=None, help="난수 seed"),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="출력 디렉토리"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def execute(command: str, body: Callable[[RunContext], Dict[str, Any]], preset: bool = False,
            require_config: bool = True) -> Callable:
    """구성 로딩 → 본문 실행 → 매니페스트 기록 → 종료 코드"""

    @click.pass_context
    @functools.wraps(body)
    def wrapper(ctx, config_path, eps, eta, t_final, grid_nodes, seed, out, **extra):
        setup_logging(LOG_DIR, LOG_LEVEL)
        start = time.perf_counter()
        try:
            if require_config and not preset and config_path is None:
                raise ConfigurationError(f"{command}에는 --config가 필요합니다", details={"field": "config"})
            document = read_config_document(config_path)
            if preset:
                document = merge_documents(preset_document(command), document)
            document = apply_overrides(document, eps, eta, t_final, grid_nodes, seed, out)
            cfg = load_run_config(document)
            repository = get_repository(cfg)
            # 출력 위치는 매니페스트 입력에서 제외 (같은 구성이면 같은 해시)
            document = cfg.model_dump(exclude={"output": {"directory"}})
            run = RunContext(command=command, config=cfg, document=document, repository=repository)
            logger.info(f"{command} 시작 (출력: {repository.root})")

            status = EXIT_OK
            try:
                results = body(run, **extra)
            except ContainmentFailure as failure:
                results = failure.results
                status = EXIT_CONTAINMENT

            seeds = {"seed": cfg.seed, "experiment_seed": cfg.experiment.seed}
            repository.write_manifest(command, run.document, seeds, results,
                                      wall_time=time.perf_counter() - start)
            click.echo(json.dumps(to_jsonable({"command": command, "status": status, "results": results}),
                                  sort_keys=True))
            ctx.exit(status)

        except (ConfigurationError, ValidationError) as e:
            _fail(ctx, e, EXIT_CONFIG)
        except NumericalError as e:
            _fail(ctx, e, EXIT_NUMERICAL)
        except (ArtifactError, SPReachError) as e:
            _fail(ctx, e, 1)
        except (click.exceptions.Exit, click.Abort, click.ClickException):
            raise
        except Exception as e:
            logger.exception(f"{command} 실행 중 예상치 못한 오류: {e}")
            _fail(ctx, SPReachError(f"unexpected error: {e}", original_error=e,
                                    details={"type": type(e).__name__}), 1)

    return wrapper


def _fail(ctx: click.Context, error: SPReachError, code: int) -> None:
    logger.error(f"{type(error).__name__}: {error.message}")
    click.echo(json.dumps(to_jsonable({"error": error.to_dict(), "status": code}), sort_keys=True), err=True)
    ctx.exit(code)


def write_field(run: RunContext, stem: str, field: ValueField) -> None:
    """형식 설정에 따라 필드 CSV/바이너리 기록"""
    if run.wants("csv"):
        run.repository.write_field_csv(f"{stem}.csv", field)
    if run.wants("binary"):
        run.repository.write_field_binary(f"{stem}.sprf", field)


def reach_overlay(
    reduced: ValueField,
    eta: float,
    payoff: PayoffFn,
    full: Optional[ValueField] = None,
    trajectories: Sequence[np.ndarray] = (),
    title: str = ""
) -> Optional[ContourOverlay]:
    """±η 축약 곡선, 목표 윤곽, V_ε 영준위, 궤적을 담은 2차원 오버레이

    전체 필드가 있으면 (z, y) 평면, 없으면 축약 필드의 마지막 두 차원 평면
    (나머지 차원은 최솟값 노드에서 슬라이스)에 그립니다.
    """
    lower, upper = payoff.target_box()
    if full is not None and full.grid.n_dims == 2:
        grid = full.grid
        extra = full.grid.n_dims - reduced.grid.n_dims
        broadcast = np.broadcast_to(
            reduced.values.reshape(reduced.values.shape + (1,) * extra), grid.shape
        )
        plane = ValueField(grid=grid, time=reduced.time, values=broadcast.copy(),
                           provenance="full", n_slow=reduced.grid.n_dims)
        slice_spec: Dict[int, float] = {}
        dims = (0, 1)
        target = ([lower[0], None], [upper[0], None]) if reduced.grid.n_dims == 1 else (lower[:2], upper[:2])
    elif reduced.grid.n_dims >= 2:
        grid = reduced.grid
        plane = reduced
        dims = (grid.n_dims - 2, grid.n_dims - 1)
        slice_spec = {i: grid.mins[i] for i in range(grid.n_dims - 2)}
        target = ([lower[d] for d in dims], [upper[d] for d in dims])
    else:
        return None

    names = [f"z{i + 1}" for i in range(reduced.n_slow)] + [f"y{i + 1}" for i in range(grid.n_dims)]
    overlay = ContourOverlay(
        (grid.mins[dims[0]], grid.maxs[dims[0]]),
        (grid.mins[dims[1]], grid.maxs[dims[1]]),
        x_label=names[dims[0]], y_label=names[dims[1]], title=title,
    )
    overlay.add_target(*target)
    overlay.add_contours(ReachService.extract_contours(plane, -eta, slice_spec), "inner")
    overlay.add_contours(ReachService.extract_contours(plane, eta, slice_spec), "outer")
    if full is not None and full.grid.n_dims == 2:
        overlay.add_contours(ReachService.extract_contours(full, 0.0), "full_zero")
    for points in trajectories:
        overlay.add_trajectory(np.asarray(points)[:, list(dims)])
    return overlay
