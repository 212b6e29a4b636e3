"""도달 집합 내부/외부 근사, 포함 관계 검사, 등고선 추출"""

import logging
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import numpy as np
from scipy import ndimage

from config.settings import DEFAULT_DILATION_CELLS
from models.reach import ContainmentReport, ContainmentViolation, ReachBounds
from models.value_field import ValueField
from utils.exceptions import ConfigurationError, DomainError, ValidationError
from utils.validators import ArrayValidator

logger = logging.getLogger("sp_reach")

_SLICE_TOL = 1e-9


class ReachService:
    """축약 가치 필드로부터 BRS/BRT/BST 근사 마스크 생성 및 검증"""

    @staticmethod
    def brs_bounds(field: ValueField, eta: float) -> ReachBounds:
        """inner = {V̄ < −η}, outer = {V̄ < +η}

        준위와 정확히 같은 노드는 내부 집합 밖입니다 (엄격 부등호).
        """
        eta = ArrayValidator.positive(eta, "eta")
        values = field.values
        return ReachBounds(
            grid=field.grid,
            eta=eta,
            t=field.time,
            inner_mask=values < -eta,
            outer_mask=values < eta,
            kind="BRS",
            level_values=values,
        )

    @staticmethod
    def tube_bounds(field: ValueField, eta: float) -> Tuple[ReachBounds, ReachBounds]:
        """BRT 내부 근사 {min_s V̄ < −η}와 BST 외부 근사 {max_s V̄ < +η}

        Raises:
            ConfigurationError: running 극값이 없는 필드
        """
        eta = ArrayValidator.positive(eta, "eta")
        if not field.has_extremes:
            logger.error("running 극값이 없는 필드로 튜브 근사를 요청함")
            raise ConfigurationError(
                "tube bounds require running extremes; solve with track_extremes enabled",
                details={"field": "track_extremes"}
            )
        brt_inner = ReachBounds(
            grid=field.grid, eta=eta, t=field.time,
            inner_mask=field.running_min < -eta,
            outer_mask=field.running_min < eta,
            kind="BRT-inner",
            level_values=field.running_min,
        )
        bst_outer = ReachBounds(
            grid=field.grid, eta=eta, t=field.time,
            inner_mask=field.running_max < -eta,
            outer_mask=field.running_max < eta,
            kind="BST-outer",
            level_values=field.running_max,
        )
        return brt_inner, bst_outer

    @staticmethod
    def tube_nesting_violations(field: ValueField, eta: float) -> Dict[str, int]:
        """저장된 스냅샷 s ∈ [t, 0]마다 brt_inner(t) ⊇ brs_inner(s), bst_outer(t) ⊆ brs_outer(s) 위반 노드 수"""
        brt_inner, bst_outer = ReachService.tube_bounds(field, eta)
        counts = {"brt_inner": 0, "bst_outer": 0, "running_min": 0, "running_max": 0}
        ordered = sorted(list(field.snapshots) + [field.without_snapshots()], key=lambda s: -s.time)
        for snap in ordered:
            brs = ReachService.brs_bounds(snap, eta)
            counts["brt_inner"] += int(np.count_nonzero(brs.inner_mask & ~brt_inner.inner_mask))
            counts["bst_outer"] += int(np.count_nonzero(bst_outer.outer_mask & ~brs.outer_mask))
        for earlier, later in zip(ordered, ordered[1:]):
            if earlier.has_extremes and later.has_extremes:
                counts["running_min"] += int(np.count_nonzero(later.running_min > earlier.running_min))
                counts["running_max"] += int(np.count_nonzero(later.running_max < earlier.running_max))
        return counts

    @staticmethod
    def check_containment(
        bounds: ReachBounds,
        full_field: ValueField,
        dilation_cells: int = DEFAULT_DILATION_CELLS
    ) -> ContainmentReport:
        """inner × 𝒴 ⊆ {V_ε ≤ 0} ⊆ outer × 𝒴 를 노드 단위로 검사

        각 포함 관계의 상위 집합 쪽을 dilation_cells 셀만큼 팽창시켜 이산화 오차를 허용합니다.
        𝒴는 전체 필드 격자의 y 범위입니다.

        Raises:
            ConfigurationError: z 축 격자 불일치
        """
        if dilation_cells < 0:
            raise ValidationError(f"dilation_cells는 0 이상이어야 합니다: {dilation_cells}",
                                  details={"field": "dilation_cells"})
        n_z = bounds.grid.n_dims
        z_dims = list(range(n_z))
        if (full_field.provenance != "full" or full_field.n_slow != n_z
                or not full_field.grid.same_axes(bounds.grid, z_dims, z_dims)):
            logger.error("포함 검사 격자 불일치")
            raise ConfigurationError(
                "z axes of the reduced bounds and the full field do not coincide",
                details={"field": "grid", "bounds_grid": bounds.grid.to_dict(),
                         "full_grid": full_field.grid.to_dict()}
            )

        full = full_field.values
        extra = full.ndim - n_z
        expand = (Ellipsis,) + (None,) * extra
        zero_set = full <= 0.0
        inner = np.broadcast_to(bounds.inner_mask[expand], full.shape)
        outer_dilated = np.broadcast_to(_dilate(bounds.outer_mask, dilation_cells)[expand], full.shape)
        zero_dilated = _dilate(zero_set, dilation_cells)

        violations: List[ContainmentViolation] = []
        grid = full_field.grid
        axes = grid.coordinate_vectors
        reduced_values = bounds.level_values
        for inclusion, mask in (("inner", inner & ~zero_dilated), ("outer", zero_set & ~outer_dilated)):
            for idx in np.argwhere(mask):
                idx = tuple(int(i) for i in idx)
                violations.append(ContainmentViolation(
                    inclusion=inclusion,
                    coordinates=[float(axes[k][i]) for k, i in enumerate(idx)],
                    reduced_value=float("nan") if reduced_values is None else float(reduced_values[idx[:n_z]]),
                    full_value=float(full[idx]),
                ))

        report = ContainmentReport(
            checked_nodes=int(full.size),
            dilation_cells=int(dilation_cells),
            eta=bounds.eta,
            violations=violations,
        )
        if report.verdict:
            logger.info(f"포함 관계 통과 ({report.checked_nodes} 노드, 팽창 {dilation_cells} 셀)")
        else:
            logger.warning(f"포함 관계 위반 {len(violations)}개 ({report.checked_nodes} 노드, 팽창 {dilation_cells} 셀)")
        return report

    @staticmethod
    def extract_contours(
        field: ValueField,
        level: float,
        slice_spec: Optional[Dict[int, float]] = None,
        values: Optional[np.ndarray] = None
    ) -> List[np.ndarray]:
        """{V = level}의 marching-squares 폴리라인 (각 원소 shape (n, 2), 닫힌 곡선은 첫 점 반복)

        Args:
            field: 가치 필드
            level: 등고 준위
            slice_spec: 2개를 제외한 차원의 고정 좌표 {차원: 좌표}; 좌표는 격자 노드여야 함
            values: field.values 대신 사용할 노드 배열 (running 극값 등)

        Raises:
            ValidationError: 슬라이스 후 자유 차원이 2개가 아닌 경우
            DomainError: 슬라이스 좌표가 격자 노드가 아닌 경우
        """
        grid = field.grid
        data = field.values if values is None else np.asarray(values, dtype=float)
        slice_spec = dict(slice_spec or {})
        free = [i for i in range(grid.n_dims) if i not in slice_spec]
        if len(free) != 2:
            raise ValidationError(
                f"슬라이스 후 자유 차원이 2개여야 합니다 (현재 {len(free)})",
                details={"field": "slice_spec", "free_dims": free}
            )

        index: List = []
        for i in range(grid.n_dims):
            if i in slice_spec:
                s = (float(slice_spec[i]) - grid.mins[i]) / grid.spacing[i]
                k = int(round(s))
                if abs(s - k) > _SLICE_TOL or not 0 <= k < grid.node_counts[i]:
                    raise DomainError(
                        f"슬라이스 좌표 {slice_spec[i]}이 차원 {i}의 격자 노드가 아닙니다",
                        details={"field": "slice_spec", "dimension": i, "value": float(slice_spec[i])}
                    )
                index.append(k)
            else:
                index.append(slice(None))
        plane = data[tuple(index)]
        xs, ys = grid.axis(free[0]), grid.axis(free[1])
        return _marching_squares(plane, xs, ys, float(level))


def _dilate(mask: np.ndarray, cells: int) -> np.ndarray:
    """셀 단위 팽창 (대각 이웃 포함)"""
    if cells == 0:
        return mask
    structure = ndimage.generate_binary_structure(mask.ndim, mask.ndim)
    return ndimage.binary_dilation(mask, structure=structure, iterations=cells)


def _marching_squares(plane: np.ndarray, xs: np.ndarray, ys: np.ndarray, level: float) -> List[np.ndarray]:
    """2차원 배열의 준위선 추출

    노드는 값 < level이면 내부입니다. 안장 셀은 셀 평균과 준위를 비교해 연결을 정합니다.
    """
    inside = plane < level
    nx, ny = plane.shape

    # 모서리 키: ("h", i, j)는 (i,j)-(i+1,j), ("v", i, j)는 (i,j)-(i,j+1)
    def crossing(key) -> Tuple[float, float]:
        kind, i, j = key
        a = plane[i, j]
        if kind == "h":
            b = plane[i + 1, j]
            w = (level - a) / (b - a)
            return (xs[i] + w * (xs[i + 1] - xs[i]), ys[j])
        b = plane[i, j + 1]
        w = (level - a) / (b - a)
        return (xs[i], ys[j] + w * (ys[j + 1] - ys[j]))

    segments = []
    for i in range(nx - 1):
        for j in range(ny - 1):
            corners = (inside[i, j], inside[i + 1, j], inside[i + 1, j + 1], inside[i, j + 1])
            edges = (("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j))
            crossed = [k for k in range(4) if corners[k] != corners[(k + 1) % 4]]
            if len(crossed) == 2:
                segments.append((edges[crossed[0]], edges[crossed[1]]))
            elif len(crossed) == 4:
                mean = (plane[i, j] + plane[i + 1, j] + plane[i + 1, j + 1] + plane[i, j + 1]) / 4.0
                if (mean < level) == corners[0]:
                    # 꼭짓점 0과 2가 중심을 통해 연결
                    segments.append((edges[0], edges[1]))
                    segments.append((edges[2], edges[3]))
                else:
                    segments.append((edges[3], edges[0]))
                    segments.append((edges[1], edges[2]))

    if not segments:
        return []

    adjacency = defaultdict(list)
    for n, (a, b) in enumerate(segments):
        adjacency[a].append(n)
        adjacency[b].append(n)

    used = [False] * len(segments)
    polylines = []

    def walk(start) -> List:
        chain = [start]
        current = start
        while True:
            nxt = [n for n in adjacency[current] if not used[n]]
            if not nxt:
                return chain
            n = nxt[0]
            used[n] = True
            a, b = segments[n]
            current = b if a == current else a
            chain.append(current)

    # 열린 곡선(격자 경계에서 끝나는)부터, 그다음 닫힌 곡선
    open_ends = sorted(k for k, segs in adjacency.items() if len(segs) == 1)
    for key in open_ends:
        if all(used[n] for n in adjacency[key]):
            continue
        polylines.append(walk(key))
    for n in range(len(segments)):
        if not used[n]:
            polylines.append(walk(segments[n][0]))

    return [np.array([crossing(key) for key in chain], dtype=float) for chain in polylines]
