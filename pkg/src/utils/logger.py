"""
로깅 설정.

모듈마다 logging.getLogger(__name__)을 쓰고, 진입점에서 setup_logging()을 한 번 호출합니다.
레벨은 인자 > CAM_LAB_LOG_LEVEL 환경변수 > WARNING 순서로 정합니다.
"""

import logging
import os
import sys
from typing import Optional

LOG_FORMAT = "%(asctime)s | %(levelname)s | %(name)s | %(message)s"
LOG_LEVEL_ENV_VAR = "CAM_LAB_LOG_LEVEL"
DEFAULT_LEVEL = "WARNING"


def setup_logging(level: Optional[str] = None) -> logging.Logger:
    """
    패키지 로거("src")에 stderr 핸들러를 붙입니다 (여러 번 호출해도 핸들러는 하나).

    Args:
        level: 'DEBUG', 'INFO', 'WARNING', 'ERROR'

    Returns:
        패키지 로거

    Raises:
        ValueError: 알 수 없는 레벨 이름
    """
    name = (level or os.environ.get(LOG_LEVEL_ENV_VAR) or DEFAULT_LEVEL).upper()
    numeric = logging.getLevelName(name)
    if not isinstance(numeric, int):
        raise ValueError(f"알 수 없는 로그 레벨: {name}")

    logger = logging.getLogger("src")
    logger.setLevel(numeric)
    if not any(getattr(h, "_cam_lab", False) for h in logger.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._cam_lab = True
        logger.addHandler(handler)
    return logger
