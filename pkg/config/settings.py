# config/settings.py
import os
from pathlib import Path
from dotenv import load_dotenv
import logging
from utils.exceptions import ConfigurationError

load_dotenv()

logger = logging.getLogger("sp_reach")

PACKAGE_NAME = "sp-reach"
PACKAGE_VERSION = "1.0.0"

# 출력/로그 디렉토리
DEFAULT_OUTPUT_DIR = os.getenv("SP_REACH_OUTPUT_DIR", "runs")
LOG_DIR = os.getenv("SP_REACH_LOG_DIR", "logs")
LOG_LEVEL = os.getenv("SP_REACH_LOG_LEVEL", "INFO").upper()

# 가정 검증 허용 오차 (샘플 기반 검증 - 증명이 아님)
STABILITY_TOL = 1e-9
ISAACS_TOL = 1e-9
DECAY_TOL = 1e-6
DEFAULT_SAMPLES = 1000
RESAMPLE_FACTOR = 10

# HJ 솔버 설정
DEFAULT_CFL = 0.5
OVERSHOOT_TOL = 1e-3
MIN_TIME_STEP = 1e-12
MAX_FULL_DIMS = 3

# 시뮬레이션 설정
DEFAULT_FAST_FRACTION = 0.1
DEFAULT_SIGNAL_PERIODS = 200

# 포함 관계 검사 기본 팽창 셀 수
DEFAULT_DILATION_CELLS = 1


def verify_output_dir(path=None) -> Path:
    """출력 디렉토리 검증 (없으면 생성)"""
    out_dir = Path(path or DEFAULT_OUTPUT_DIR)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        error_msg = f"출력 디렉토리를 만들 수 없습니다: {out_dir} ({e})"
        logger.error(error_msg)
        raise ConfigurationError(error_msg, original_error=e)

    if not os.access(out_dir, os.W_OK):
        error_msg = f"출력 디렉토리에 쓸 수 없습니다: {out_dir}"
        logger.error(error_msg)
        raise ConfigurationError(error_msg)

    logger.info(f"출력 디렉토리 확인 완료: {out_dir}")
    return out_dir
