# storage/artifact_repository.py
"""실행 산출물(필드, 마스크, 궤적, 리포트, 매니페스트) 읽기/쓰기

파일 형식:
  - 필드 CSV: 노드 좌표 열 + value (+ running_min, running_max), 행 우선 순서.
    격자/시각/출처는 같은 이름의 .meta.json에 저장.
  - 필드 바이너리 (SPRF): 매직 b"SPRF", u32 버전, u32 차원 수, u32 플래그, u32 n_slow,
    u8 출처(0 reduced, 1 full), f64 시각, u32[n] 노드 수, f64[n] 최솟값, f64[n] 최댓값,
    이후 값 배열 f64 리틀 엔디언 (플래그 bit0이면 running_min, running_max가 뒤따름).
"""

import hashlib
import json
import logging
import platform
import struct
from dataclasses import asdict, is_dataclass
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import joblib
import numpy as np
import pandas as pd
import pydantic
import scipy

from config.settings import PACKAGE_NAME, PACKAGE_VERSION
from models.grid import Grid
from models.reach import ReachBounds
from models.trajectory import Trajectory
from models.value_field import ValueField
from storage.svg_overlay import ContourOverlay
from utils.exceptions import ArtifactError

logger = logging.getLogger("sp_reach")

SPRF_MAGIC = b"SPRF"
SPRF_VERSION = 1
_PROVENANCE_CODES = {"reduced": 0, "full": 1}


def to_jsonable(value: Any) -> Any:
    """리포트 객체를 JSON 호환 값으로 변환"""
    if hasattr(value, "to_dict"):
        return to_jsonable(value.to_dict())
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    if is_dataclass(value) and not isinstance(value, type):
        return to_jsonable(asdict(value))
    if isinstance(value, float) and not np.isfinite(value):
        return None if np.isnan(value) else ("inf" if value > 0 else "-inf")
    return value


def canonical_json(document: Any) -> str:
    """정렬 키, 고정 구분자의 정규 JSON 문자열"""
    return json.dumps(to_jsonable(document), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def sha256_hex(data: Union[str, bytes]) -> str:
    if isinstance(data, str):
        data = data.encode("utf-8")
    return hashlib.sha256(data).hexdigest()


def _coordinate_names(n_dims: int, n_slow: int) -> List[str]:
    return [f"z{i + 1}" for i in range(n_slow)] + [f"y{i + 1}" for i in range(n_dims - n_slow)]


class ArtifactRepository:
    """실행 디렉토리 하나에 대한 산출물 저장소"""

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        try:
            self.root.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"산출물 디렉토리 생성 실패: {self.root} ({e})")
            raise ArtifactError(f"산출물 디렉토리 생성 실패: {self.root}", original_error=e)
        self._written: List[str] = []

    @property
    def written(self) -> List[str]:
        """이번 실행에서 기록한 파일 이름 (기록 순서)"""
        return list(self._written)

    def path(self, name: str) -> Path:
        return self.root / name

    def _write_bytes(self, name: str, data: bytes) -> Path:
        target = self.path(name)
        try:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_bytes(data)
        except OSError as e:
            logger.error(f"파일 쓰기 실패: {target} ({e})")
            raise ArtifactError(f"파일 쓰기 실패: {target}", original_error=e, details={"path": str(target)})
        if name not in self._written:
            self._written.append(name)
        logger.debug(f"산출물 기록: {target}")
        return target

    def _write_text(self, name: str, text: str) -> Path:
        return self._write_bytes(name, text.encode("utf-8"))

    def _read_bytes(self, name: str) -> bytes:
        target = self.path(name)
        try:
            return target.read_bytes()
        except OSError as e:
            logger.error(f"파일 읽기 실패: {target} ({e})")
            raise ArtifactError(f"파일 읽기 실패: {target}", original_error=e, details={"path": str(target)})

    # ------------------------------------------------------------------
    # JSON
    # ------------------------------------------------------------------
    def write_json(self, name: str, document: Any) -> Path:
        return self._write_text(name, canonical_json(document))

    def read_json(self, name: str) -> Any:
        try:
            return json.loads(self._read_bytes(name).decode("utf-8"))
        except (ValueError, UnicodeDecodeError) as e:
            raise ArtifactError(f"JSON 형식 오류: {name}", original_error=e, details={"path": name})

    # ------------------------------------------------------------------
    # 가치 필드
    # ------------------------------------------------------------------
    def _field_meta(self, field: ValueField) -> Dict[str, Any]:
        return {
            "grid": field.grid.to_dict(),
            "time": field.time,
            "provenance": field.provenance,
            "n_slow": field.n_slow,
            "has_extremes": field.has_extremes,
            "metadata": field.metadata,
        }

    def write_field_csv(self, name: str, field: ValueField) -> Path:
        """필드 CSV + .meta.json 기록"""
        grid = field.grid
        states = grid.states.reshape(grid.n_dims, -1)
        columns = {col: states[i] for i, col in enumerate(_coordinate_names(grid.n_dims, field.n_slow))}
        columns["value"] = field.values.ravel()
        if field.has_extremes:
            columns["running_min"] = field.running_min.ravel()
            columns["running_max"] = field.running_max.ravel()
        text = pd.DataFrame(columns).to_csv(index=False, lineterminator="\n")
        self.write_json(f"{name}.meta.json", self._field_meta(field))
        return self._write_text(name, text)

    def read_field_csv(self, name: str) -> ValueField:
        meta = self.read_json(f"{name}.meta.json")
        try:
            frame = pd.read_csv(self.path(name), float_precision="round_trip")
        except (OSError, ValueError) as e:
            raise ArtifactError(f"필드 CSV 읽기 실패: {name}", original_error=e, details={"path": name})
        grid = Grid.from_dict(meta["grid"])
        if len(frame) != grid.size:
            raise ArtifactError(f"필드 CSV 행 수 {len(frame)} != 격자 노드 수 {grid.size}",
                                details={"path": name})
        extremes = {}
        if meta["has_extremes"]:
            extremes = {k: frame[k].to_numpy().reshape(grid.shape) for k in ("running_min", "running_max")}
        return ValueField(
            grid=grid,
            time=float(meta["time"]),
            values=frame["value"].to_numpy().reshape(grid.shape),
            provenance=meta["provenance"],
            n_slow=int(meta["n_slow"]),
            metadata=meta.get("metadata", {}),
            **extremes,
        )

    def write_field_binary(self, name: str, field: ValueField) -> Path:
        """SPRF 바이너리 컨테이너 기록"""
        grid = field.grid
        n = grid.n_dims
        flags = 1 if field.has_extremes else 0
        parts = [
            SPRF_MAGIC,
            struct.pack("<IIII", SPRF_VERSION, n, flags, field.n_slow),
            struct.pack("<B", _PROVENANCE_CODES[field.provenance]),
            struct.pack("<d", field.time),
            struct.pack(f"<{n}I", *grid.node_counts),
            struct.pack(f"<{n}d", *grid.mins),
            struct.pack(f"<{n}d", *grid.maxs),
            np.ascontiguousarray(field.values, dtype="<f8").tobytes(),
        ]
        if flags:
            parts.append(np.ascontiguousarray(field.running_min, dtype="<f8").tobytes())
            parts.append(np.ascontiguousarray(field.running_max, dtype="<f8").tobytes())
        return self._write_bytes(name, b"".join(parts))

    def read_field_binary(self, name: str) -> ValueField:
        data = self._read_bytes(name)
        try:
            if data[:4] != SPRF_MAGIC:
                raise ArtifactError(f"SPRF 매직 불일치: {name}", details={"path": name})
            version, n, flags, n_slow = struct.unpack_from("<IIII", data, 4)
            if version != SPRF_VERSION:
                raise ArtifactError(f"지원하지 않는 SPRF 버전 {version}", details={"path": name})
            offset = 20
            (code,) = struct.unpack_from("<B", data, offset)
            offset += 1
            (t,) = struct.unpack_from("<d", data, offset)
            offset += 8
            counts = struct.unpack_from(f"<{n}I", data, offset)
            offset += 4 * n
            mins = struct.unpack_from(f"<{n}d", data, offset)
            offset += 8 * n
            maxs = struct.unpack_from(f"<{n}d", data, offset)
            offset += 8 * n
            grid = Grid(counts, mins, maxs)
            arrays = []
            for _ in range(3 if flags & 1 else 1):
                arr = np.frombuffer(data, dtype="<f8", count=grid.size, offset=offset)
                arrays.append(arr.astype(float).reshape(grid.shape))
                offset += 8 * grid.size
            if offset != len(data):
                raise ArtifactError(f"SPRF 길이 불일치: {name}", details={"path": name})
        except ArtifactError:
            raise
        except (struct.error, ValueError) as e:
            raise ArtifactError(f"SPRF 형식 오류: {name}", original_error=e, details={"path": name})

        provenance = {v: k for k, v in _PROVENANCE_CODES.items()}[code]
        return ValueField(
            grid=grid,
            time=t,
            values=arrays[0],
            running_min=arrays[1] if len(arrays) == 3 else None,
            running_max=arrays[2] if len(arrays) == 3 else None,
            provenance=provenance,
            n_slow=n_slow,
        )

    # ------------------------------------------------------------------
    # 마스크 / 궤적 / SVG
    # ------------------------------------------------------------------
    def write_masks_csv(self, name: str, bounds: ReachBounds) -> Path:
        """노드 좌표 + inner/outer 0/1 열"""
        grid = bounds.grid
        states = grid.states.reshape(grid.n_dims, -1)
        columns = {f"z{i + 1}": states[i] for i in range(grid.n_dims)}
        columns["inner"] = bounds.inner_mask.ravel().astype(int)
        columns["outer"] = bounds.outer_mask.ravel().astype(int)
        return self._write_text(name, pd.DataFrame(columns).to_csv(index=False, lineterminator="\n"))

    def read_masks_csv(self, name: str, grid: Grid) -> Dict[str, np.ndarray]:
        frame = pd.read_csv(self.path(name), float_precision="round_trip")
        return {k: frame[k].to_numpy().astype(bool).reshape(grid.shape) for k in ("inner", "outer")}

    def write_trajectory_csv(self, name: str, traj: Trajectory) -> Path:
        """시각, 상태 성분, 적용된 u, d 열"""
        columns = {"time": traj.times}
        for i in range(traj.z.shape[1]):
            columns[f"z{i + 1}"] = traj.z[:, i]
        if traj.y is not None:
            for i in range(traj.y.shape[1]):
                columns[f"y{i + 1}"] = traj.y[:, i]
        for i in range(traj.u.shape[1]):
            columns[f"u{i + 1}"] = traj.u[:, i]
        for i in range(traj.d.shape[1]):
            columns[f"d{i + 1}"] = traj.d[:, i]
        return self._write_text(name, pd.DataFrame(columns).to_csv(index=False, lineterminator="\n"))

    def read_trajectory_csv(self, name: str) -> pd.DataFrame:
        return pd.read_csv(self.path(name), float_precision="round_trip")

    def write_svg(self, name: str, overlay: ContourOverlay) -> Path:
        return self._write_text(name, overlay.render())

    # ------------------------------------------------------------------
    # 매니페스트
    # ------------------------------------------------------------------
    def write_manifest(
        self,
        command: str,
        config_document: Dict[str, Any],
        seeds: Dict[str, Any],
        results: Optional[Dict[str, Any]] = None,
        wall_time: Optional[float] = None
    ) -> Path:
        """입력 해시, 버전, seed, 산출물 해시를 담은 manifest.json (소요 시간은 timing.json)"""
        artifacts = {name: sha256_hex(self._read_bytes(name)) for name in sorted(self._written)}
        manifest = {
            "command": command,
            "inputs_sha256": sha256_hex(canonical_json(config_document)),
            "config": config_document,
            "seeds": seeds,
            "versions": {
                PACKAGE_NAME: PACKAGE_VERSION,
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
                "pandas": pd.__version__,
                "pydantic": pydantic.__version__,
                "joblib": joblib.__version__,
            },
            "artifacts": artifacts,
            "results": results or {},
        }
        path = self.write_json("manifest.json", manifest)
        if wall_time is not None:
            self._write_text("timing.json", canonical_json({"wall_time_seconds": wall_time}))
        logger.info(f"매니페스트 기록: {path} (산출물 {len(artifacts)}개)")
        return path
