from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class StrictModel(BaseModel):
    """알 수 없는 키를 거부하는 기본 모델"""
    model_config = ConfigDict(extra="forbid")


class BoxBlock(StrictModel):
    """상자 집합 블록"""
    lower: List[float] = Field(..., description="하한 벡터")
    upper: List[float] = Field(..., description="상한 벡터")
    samples: int = Field(2, ge=2, description="차원별 격자 샘플 수 (꼭짓점 포함)")

    @model_validator(mode="after")
    def check_bounds(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("lower/upper 길이가 같아야 합니다")
        if any(lo > hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("모든 차원에서 lower <= upper 이어야 합니다")
        return self


class SystemBlock(StrictModel):
    """모델 기술 블록"""
    kind: Literal["genetic_circuit", "mrn", "custom-builtin"] = Field(..., description="모델 종류")
    name: Optional[str] = Field(None, description="custom-builtin 등록 이름")
    parameters: Dict[str, Any] = Field(default_factory=dict, description="모델 파라미터")
    u_set: Optional[BoxBlock] = Field(None, description="제어 집합 (기본: 모델 기본값)")
    d_set: Optional[BoxBlock] = Field(None, description="외란 집합 (기본: 모델 기본값)")

    @model_validator(mode="after")
    def check_name(self):
        if self.kind == "custom-builtin" and not self.name:
            raise ValueError("custom-builtin에는 name이 필요합니다")
        return self

    def to_document(self) -> Dict[str, Any]:
        return self.model_dump(exclude_none=True)


class GridBlock(StrictModel):
    """직사각형 격자 블록"""
    nodes: List[int] = Field(..., description="차원별 노드 수")
    lower: List[float] = Field(..., description="차원별 최솟값")
    upper: List[float] = Field(..., description="차원별 최댓값")

    @field_validator("nodes")
    @classmethod
    def validate_nodes(cls, v):
        if not v or any(n < 3 for n in v):
            raise ValueError("노드 수는 차원마다 3 이상이어야 합니다")
        return v

    @model_validator(mode="after")
    def check_extent(self):
        if not (len(self.nodes) == len(self.lower) == len(self.upper)):
            raise ValueError("nodes/lower/upper 길이가 같아야 합니다")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("모든 차원에서 lower < upper 이어야 합니다")
        return self


class PayoffBlock(StrictModel):
    """목표 상자와 종단 보상 블록"""
    target_lower: List[Optional[float]] = Field(..., description="목표 하한 (자유 차원은 null)")
    target_upper: List[Optional[float]] = Field(..., description="목표 상한 (자유 차원은 null)")
    slope: float = Field(10.0, gt=0, description="보상 기울기")
    cap: float = Field(3.0, gt=0, description="보상 상한")
    free_dims: List[int] = Field(default_factory=list, description="보상에 기여하지 않는 차원")


class SolveBlock(StrictModel):
    """HJ 풀이 블록"""
    t_final: float = Field(..., le=0, description="종료 시각 t (≤ 0)")
    eta: float = Field(0.1, gt=0, description="준위 여유 η")
    eps: List[float] = Field(default_factory=lambda: [0.01], description="ε 값 목록")
    scheme: Literal["euler", "rk2"] = Field("euler", description="시간 적분")
    cfl: float = Field(0.5, gt=0, le=1, description="CFL 수")
    snapshot_times: List[float] = Field(default_factory=list, description="스냅샷 저장 시각")
    allow_high_dim: bool = Field(False, description="전체 풀이 차원 제한 해제")
    dilation_cells: int = Field(1, ge=0, description="포함 검사 팽창 셀 수")

    @field_validator("eps")
    @classmethod
    def validate_eps(cls, v):
        if not v or any(e <= 0 for e in v):
            raise ValueError("eps는 양수 목록이어야 합니다")
        return v

    @field_validator("snapshot_times")
    @classmethod
    def validate_snapshots(cls, v):
        if any(s > 0 for s in v):
            raise ValueError("스냅샷 시각은 0 이하여야 합니다")
        return v


class VerifyBlock(StrictModel):
    """가정 검증 블록"""
    n_samples: int = Field(1000, ge=1, description="샘플/탐침 수")
    lambda_scale: float = Field(2.0, ge=0, description="Isaacs 탐침 λ 범위")
    decay_horizon: float = Field(10.0, gt=0, description="경계층 감쇠 검사 구간")
    decay_trials: int = Field(100, ge=1, description="경계층 감쇠 시험 수")
    P: Optional[List[List[float]]] = Field(None, description="Lyapunov 행렬 (기본: 단위 행렬)")
    lyapunov: Literal["identity", "nominal"] = Field(
        "identity", description="P 미지정 시 후보: 단위 행렬 또는 공칭점 Lyapunov 방정식 해"
    )
    z_region: Optional[BoxBlock] = Field(None, description="z 탐색 영역 (기본: 축약 격자 범위)")


class ExperimentBlock(StrictModel):
    """도달 실험 블록"""
    initial_states: List[List[float]] = Field(default_factory=list, description="초기 느린 상태")
    initial_fast_states: Optional[List[List[float]]] = Field(None, description="초기 빠른 상태 (기본 0)")
    n_disturbances: int = Field(20, ge=1, description="초기 상태당 무작위 외란 수")
    seed: int = Field(0, ge=0, description="외란 seed")
    sample_period: Optional[float] = Field(None, gt=0, description="신호 샘플 주기 (기본 |t|/200)")
    fast_fraction: float = Field(0.1, gt=0, le=1, description="h ≤ ε·fast_fraction")
    n_jobs: int = Field(1, description="병렬 작업 수 (joblib)")


class OutputBlock(StrictModel):
    """출력 블록"""
    directory: Optional[str] = Field(None, description="출력 디렉토리 (기본: SP_REACH_OUTPUT_DIR)")
    formats: List[Literal["csv", "json", "svg", "binary"]] = Field(
        default_factory=lambda: ["csv", "json", "svg", "binary"], description="출력 형식"
    )


class RunConfig(StrictModel):
    """실행 구성 문서"""
    system: SystemBlock
    grid: GridBlock = Field(..., description="축약(z) 격자")
    full_grid: Optional[GridBlock] = Field(None, description="전체 (z, y) 격자")
    payoff: PayoffBlock
    solve: SolveBlock
    verify: VerifyBlock = Field(default_factory=VerifyBlock)
    experiment: ExperimentBlock = Field(default_factory=ExperimentBlock)
    output: OutputBlock = Field(default_factory=OutputBlock)
    seed: int = Field(0, ge=0, description="검증 탐색 seed")

    @model_validator(mode="after")
    def check_dimensions(self):
        n_z = len(self.grid.nodes)
        if len(self.payoff.target_lower) != n_z or len(self.payoff.target_upper) != n_z:
            raise ValueError(f"payoff 목표 차원이 grid 차원 {n_z}과 다릅니다")
        if self.full_grid is not None:
            if len(self.full_grid.nodes) <= n_z:
                raise ValueError("full_grid는 grid보다 차원이 커야 합니다")
            if (self.full_grid.nodes[:n_z] != self.grid.nodes
                    or self.full_grid.lower[:n_z] != self.grid.lower
                    or self.full_grid.upper[:n_z] != self.grid.upper):
                raise ValueError("full_grid의 z 축은 grid와 같아야 합니다")
        for z in self.experiment.initial_states:
            if len(z) != n_z:
                raise ValueError(f"초기 상태 차원이 {n_z}이 아닙니다: {z}")
        return self
