"""
Golden Example

회귀 테스트용 기준 데이터: 위험 상황 하나(보호 위성 + 파편 10개)와
알고리즘별 기동, 결과 값, 근접 접근 표.

값은 인쇄된 자릿수 그대로 보관하며 파일 체크섬으로 손상을 검사합니다.
궤도요소가 소수점 셋째 자리(rad), 기준 시각이 1/1000일 단위로 반올림되어 있어서
재현되는 위치 오차는 수 km ~ 수백 km입니다. 그래서 시뮬레이션 비교는
golden_screening()의 넓은 스크리닝 설정으로만 느슨하게 합니다.
"""

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from src.common.conjunction import Conjunction, ProbabilityModel
from src.common.reward import RewardConfig
from src.common.situation_io import (
    conjunctions_from_records,
    maneuvers_from_list,
    save_situation,
    situation_from_dict,
)
from src.env.simulator import DangerousSituation, Maneuver, SessionSimulator

GOLDEN_PATH = Path(__file__).with_name("golden_example.json")
GOLDEN_SHA256 = "7b237bca0b4bd0f402faf0a8069e3163789bdbcf5f7d5af905c633c821a03486"
GOLDEN_NAME = "golden_example"
RESULT_FIELDS = ("collision_probability", "fuel", "a", "e", "i", "raan", "argp", "mean_anomaly", "reward")


@dataclass(frozen=True)
class GoldenExample:
    """
    기준 데이터.

    Attributes:
        situation: 위험 상황 (시간 창 6599.921 ~ 6601.0)
        maneuvers: 알고리즘 id -> 기동 목록
        results: 행 이름('threshold', 'no-maneuvers', 알고리즘 id) -> 결과 값 (없는 값은 None)
        conjunctions_without_maneuvers: 무기동 근접 접근 표
        conjunctions_with_maneuvers: with_maneuvers_algorithm 기동 후 근접 접근 표
        with_maneuvers_algorithm: 기동 후 표를 만든 알고리즘 id
    """

    situation: DangerousSituation
    maneuvers: Dict[str, List[Maneuver]] = field(default_factory=dict)
    results: Dict[str, Dict[str, Optional[float]]] = field(default_factory=dict)
    conjunctions_without_maneuvers: List[Conjunction] = field(default_factory=list)
    conjunctions_with_maneuvers: List[Conjunction] = field(default_factory=list)
    with_maneuvers_algorithm: str = ""


@dataclass(frozen=True)
class GoldenScreening:
    """기준 상황 비교용 스크리닝 설정."""

    screen_distance: float
    model: ProbabilityModel
    danger_threshold: float

    def simulator(self, situation: DangerousSituation, reward_cfg: RewardConfig = RewardConfig()) -> SessionSimulator:
        return SessionSimulator(
            situation,
            reward_cfg=reward_cfg,
            model=self.model,
            screen_distance=self.screen_distance,
            danger_threshold=self.danger_threshold,
        )


def golden_screening() -> GoldenScreening:
    """
    반올림된 기준 데이터용 스크리닝 설정.

    스크린 거리 500 km, 물체당 위치 불확도 5 km, 위험 임계값 1e-12.
    반올림된 기준 시각(최대 43초 오차)으로 생기는 수백 km 오차를 흡수합니다.
    """
    return GoldenScreening(
        screen_distance=500e3,
        model=ProbabilityModel(sigma_protected=5e3, sigma_debris=5e3),
        danger_threshold=1e-12,
    )


def _parse_results(data: Dict[str, Any]) -> Dict[str, Dict[str, Optional[float]]]:
    results = {}
    for row, values in data.items():
        if set(values) != set(RESULT_FIELDS):
            raise ValueError(f"결과 행 {row}: 필드가 다릅니다 ({sorted(values)})")
        results[row] = {k: None if values[k] is None else float(values[k]) for k in RESULT_FIELDS}
    return results


def load_golden(path: Union[str, Path] = GOLDEN_PATH, expected_sha256: str = GOLDEN_SHA256) -> GoldenExample:
    """
    기준 데이터를 읽습니다.

    Args:
        path: 기준 JSON 경로
        expected_sha256: 기대 체크섬

    Returns:
        GoldenExample

    Raises:
        ValueError: 체크섬 불일치 또는 형식 오류
        IOError: 파일 읽기 실패

    Example:
        >>> golden = load_golden()
        >>> golden.situation.protected.elements.a
        7530537.215
    """
    try:
        raw = Path(path).read_bytes()
    except OSError as e:
        raise IOError(f"기준 데이터를 읽을 수 없습니다: {path}\n에러: {e}")

    digest = hashlib.sha256(raw).hexdigest()
    if digest != expected_sha256:
        raise ValueError(f"golden data checksum mismatch: {digest} != {expected_sha256}")

    data = json.loads(raw.decode("utf-8"))
    after = data["conjunctions_with_maneuvers"]
    return GoldenExample(
        situation=situation_from_dict(data["situation"], name=GOLDEN_NAME),
        maneuvers={name: maneuvers_from_list(records) for name, records in data["maneuvers"].items()},
        results=_parse_results(data["results"]),
        conjunctions_without_maneuvers=conjunctions_from_records(data["conjunctions_without_maneuvers"]),
        conjunctions_with_maneuvers=conjunctions_from_records(after["rows"]),
        with_maneuvers_algorithm=after["algorithm"],
    )


def export_golden_situation(path: Union[str, Path]) -> DangerousSituation:
    """기준 상황을 상황 JSON 파일로 저장합니다."""
    situation = load_golden().situation
    save_situation(situation, path)
    return situation
