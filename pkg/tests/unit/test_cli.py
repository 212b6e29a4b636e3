"""CLI 명령 테스트

click CliRunner로 종료 코드, 산출물, 구성 오류 처리를 테스트합니다.
"""

import json
import logging

import numpy as np
import pytest
from click.testing import CliRunner

from cli.main import cli, run_command
from models.box_set import BoxSet
from models.grid import Grid
from models.system import SPSystem, broadcast_batch
from services.model_catalog import ModelCatalog
from services.payoff_builder import build_payoff_box
from storage.artifact_repository import ArtifactRepository

GENETIC_CONFIG = {
    "system": {"kind": "genetic_circuit"},
    "grid": {"nodes": [21], "lower": [0.0], "upper": [1.0]},
    "payoff": {"target_lower": [0.25], "target_upper": [0.75], "slope": 10.0, "cap": 3.0},
    "solve": {"t_final": -0.1, "eta": 0.1},
    "verify": {"n_samples": 50, "decay_trials": 5, "P": [[1.0]]},
    "output": {"directory": "out", "formats": ["json"]},
}

INTEGRATOR_CONFIG = {
    "system": {"kind": "custom-builtin", "name": "integrator"},
    "grid": {"nodes": [41], "lower": [-1.0], "upper": [1.0]},
    "payoff": {"target_lower": [-0.25], "target_upper": [0.25], "slope": 1.0, "cap": 3.0},
    "solve": {"t_final": -0.5, "eta": 0.05},
    "output": {"directory": "out", "formats": ["csv", "json"]},
}

FROZEN_FAST_CONFIG = {
    "system": {"kind": "custom-builtin", "name": "frozen_fast"},
    "grid": {"nodes": [41], "lower": [-1.0], "upper": [1.0]},
    "full_grid": {"nodes": [41, 41], "lower": [-1.0, -1.0], "upper": [1.0, 1.0]},
    "payoff": {"target_lower": [-0.25], "target_upper": [0.25], "slope": 1.0, "cap": 3.0},
    "solve": {"t_final": -0.5, "eta": 0.05, "eps": [100.0]},
    "output": {"directory": "out", "formats": ["csv", "json"]},
}


def make_frozen_fast(u_set=None, d_set=None) -> SPSystem:
    """ż = y, εẏ = u − y: ε가 크면 y가 거의 고정되어 축약 모델 ż = u와 어긋남"""
    u_set = u_set or BoxSet((-1.0,), (1.0,))
    d_set = d_set or BoxSet((0.0,), (0.0,))
    return SPSystem(
        name="frozen_fast", n_z=1, n_y=1,
        f=lambda z, u, d: np.zeros_like(z),
        g=lambda z, u, d: broadcast_batch(u[:1], np.shape(z)[1:]) + 0.0 * z,
        M=lambda z: broadcast_batch([[-1.0]], np.shape(z)[1:]),
        A=lambda z, u, d: broadcast_batch([[-1.0]], np.shape(z)[1:]),
        u_set=u_set, d_set=d_set,
    )


def make_exploding(u_set=None, d_set=None) -> SPSystem:
    """생성 단계에서 ValueError를 던지는 모델"""
    raise ValueError("exploding model factory")


@pytest.fixture(autouse=True)
def isolated_run(tmp_path, monkeypatch):
    """임시 디렉토리에서 실행하고 로거 핸들러를 테스트마다 초기화"""
    monkeypatch.chdir(tmp_path)
    logger = logging.getLogger("sp_reach")
    logger.handlers.clear()
    yield
    for handler in list(logger.handlers):
        handler.close()
    logger.handlers.clear()


def _write_config(tmp_path, document, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(document))
    return str(path)


def _invoke(*args):
    return CliRunner(mix_stderr=False).invoke(cli, list(args))


class TestVerifyCommand:
    """verify 명령 테스트"""

    def test_genetic_circuit_passes(self, tmp_path):
        """모든 가정 판정 통과, assumptions.json 기록"""
        result = _invoke("verify", "--config", _write_config(tmp_path, GENETIC_CONFIG))

        assert result.exit_code == 0, result.stderr
        report = json.loads((tmp_path / "out" / "assumptions.json").read_text())
        assert set(report["verdicts"].values()) == {"pass"}
        assert (tmp_path / "out" / "manifest.json").exists()
        summary = json.loads(result.stdout)
        assert summary["status"] == 0

    def test_missing_config_exits_2(self):
        """--config 없이 실행"""
        result = _invoke("verify")

        assert result.exit_code == 2


class TestSolveCommand:
    """solve 명령 테스트"""

    def test_zero_horizon_writes_payoff(self, tmp_path):
        """--t 0이면 필드 CSV 값 = ℓ"""
        result = _invoke("solve", "--config", _write_config(tmp_path, INTEGRATOR_CONFIG), "--t", "0")

        assert result.exit_code == 0, result.stderr
        field = ArtifactRepository(tmp_path / "out").read_field_csv("reduced_value.csv")
        grid = Grid((41,), (-1.0,), (1.0,))
        ell = build_payoff_box([-0.25], [0.25], slope=1.0, cap=3.0)
        assert np.array_equal(field.values, ell.on_grid(grid.states))

    def test_zero_eta_exits_2(self, tmp_path):
        """--eta 0은 구성 오류"""
        result = _invoke("solve", "--config", _write_config(tmp_path, INTEGRATOR_CONFIG), "--eta", "0")

        assert result.exit_code == 2
        error = json.loads(result.stderr.strip().splitlines()[-1])
        assert error["error"]["error"] == "ConfigurationError"
        assert error["status"] == 2

    def test_unknown_key_exits_2(self, tmp_path):
        """알 수 없는 키는 거부"""
        document = dict(INTEGRATOR_CONFIG, solver_typo={"x": 1})

        result = _invoke("solve", "--config", _write_config(tmp_path, document))

        assert result.exit_code == 2

    def test_malformed_json_exits_2(self, tmp_path):
        """JSON 구문 오류"""
        path = tmp_path / "broken.json"
        path.write_text('{"system": {"kind": "genetic_circuit",}')

        result = _invoke("solve", "--config", str(path))

        assert result.exit_code == 2


class TestRunCommand:
    """run_command 진입점 테스트"""

    def setup_method(self):
        """각 테스트 전에 실행"""
        ModelCatalog.register("exploding", make_exploding)

    def test_returns_exit_status(self, tmp_path):
        """성공 0, 구성 오류 2를 반환"""
        path = _write_config(tmp_path, INTEGRATOR_CONFIG)

        assert run_command(["solve", "--config", path, "--t", "0"]) == 0
        assert run_command(["solve", "--config", path, "--eta", "-1"]) == 2

    def test_unexpected_error_exits_1_with_structured_error(self, tmp_path):
        """SPReachError가 아닌 예외도 종료 코드 1과 구조화된 stderr"""
        document = dict(INTEGRATOR_CONFIG, system={"kind": "custom-builtin", "name": "exploding"})

        result = _invoke("solve", "--config", _write_config(tmp_path, document))

        assert result.exit_code == 1
        error = json.loads(result.stderr.strip().splitlines()[-1])
        assert error["status"] == 1
        assert error["error"]["error"] == "SPReachError"
        assert error["error"]["details"]["type"] == "ValueError"
        assert run_command(["solve", "--config", _write_config(tmp_path, document)]) == 1


class TestBoundsCommand:
    """bounds 명령 테스트"""

    def setup_method(self):
        """각 테스트 전에 실행"""
        ModelCatalog.register("frozen_fast", make_frozen_fast)

    def test_expect_pass_exits_4_on_failure(self, tmp_path):
        """포함 관계 실패 + --expect-pass면 종료 코드 4"""
        result = _invoke("bounds", "--config", _write_config(tmp_path, FROZEN_FAST_CONFIG), "--expect-pass")

        assert result.exit_code == 4
        assert (tmp_path / "out" / "manifest.json").exists()

    def test_failure_without_flag_exits_0(self, tmp_path):
        """플래그 없으면 실패 판정만 보고"""
        result = _invoke("bounds", "--config", _write_config(tmp_path, FROZEN_FAST_CONFIG))

        assert result.exit_code == 0, result.stderr
        summary = json.loads(result.stdout)
        assert summary["results"]["containment"][0]["verdict"] == "fail"
        report = json.loads((tmp_path / "out" / "containment_eps100.json").read_text())
        assert report["violation_count"] > 0
