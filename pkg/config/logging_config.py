# config/logging_config.py
import logging
import sys
from logging.handlers import RotatingFileHandler
import os


def setup_logging(log_dir="logs", level="INFO"):
    # 로그 디렉토리 생성
    if not os.path.exists(log_dir):
        os.makedirs(log_dir)

    # 로거 설정
    logger = logging.getLogger("sp_reach")
    logger.setLevel(level)

    # 반복 호출 시 핸들러 중복 방지
    if logger.handlers:
        return logger

    # 파일 핸들러
    file_handler = RotatingFileHandler(
        f"{log_dir}/sp_reach.log",
        maxBytes=5 * 1024 * 1024,  # 5MB
        backupCount=3
    )
    file_handler.setLevel(level)

    # 콘솔 핸들러 (stdout은 산출물 경로 출력용이라 stderr 사용)
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(level)

    # 포맷 설정
    formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    file_handler.setFormatter(formatter)
    console_handler.setFormatter(formatter)

    # 핸들러 추가
    logger.addHandler(file_handler)
    logger.addHandler(console_handler)

    return logger
