"""
Maneuver Parameterization

최적화 변수(국소 궤도 좌표계 성분 + 선택적 기동 시각)와 실제 기동 사이의 변환.

모드별 변수:
    - in_track: (s,)            -> s * in_track
    - in_plane: (s, r)          -> s * in_track + r * radial_in_plane
    - out_of_plane: (s, r, c)   -> + c * cross_track
timing이 auto이면 벡터 마지막 성분이 기동 시각(mjd2000)입니다.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.common.orbit import SECONDS_PER_DAY, orbit_frame
from src.env.simulator import Maneuver, SessionResult, SessionSimulator

# 첫 위험 근접 접근 직전 기동 금지 간격 (초)
MIN_LEAD_TIME = 60.0


class ManeuverMode(str, Enum):
    IN_TRACK = "in_track"
    IN_PLANE = "in_plane"
    OUT_OF_PLANE = "out_of_plane"

    @property
    def n_values(self) -> int:
        return {"in_track": 1, "in_plane": 2, "out_of_plane": 3}[self.value]


class Timing(str, Enum):
    FIXED = "fixed"
    AUTO = "auto"


@dataclass(frozen=True, eq=False)
class ManeuverParam:
    """
    단일 기동의 최적화 변수.

    Attributes:
        mode: 기동 모드
        values: 국소 좌표계 성분 (m/s), 길이 = mode.n_values
        epoch: 기동 시각 (mjd2000)
        timing: fixed면 epoch 고정, auto면 epoch도 탐색 변수
    """

    mode: ManeuverMode
    values: np.ndarray
    epoch: float
    timing: Timing = Timing.FIXED

    def __post_init__(self):
        object.__setattr__(self, "mode", ManeuverMode(self.mode))
        object.__setattr__(self, "timing", Timing(self.timing))
        values = np.atleast_1d(np.asarray(self.values, dtype=float))
        if values.shape != (self.mode.n_values,):
            raise ValueError(f"{self.mode.value} 모드는 성분 {self.mode.n_values}개가 필요합니다: {values}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "epoch", float(self.epoch))

    def to_vector(self) -> np.ndarray:
        if self.timing is Timing.AUTO:
            return np.append(self.values, self.epoch)
        return self.values.copy()

    @classmethod
    def from_vector(cls, mode: ManeuverMode, timing: Timing, vector: np.ndarray, epoch: float) -> "ManeuverParam":
        """최적화 벡터에서 복원합니다 (fixed면 epoch 인자 사용)."""
        mode, timing = ManeuverMode(mode), Timing(timing)
        vector = np.asarray(vector, dtype=float)
        if timing is Timing.AUTO:
            return cls(mode, vector[: mode.n_values], float(vector[mode.n_values]), timing)
        return cls(mode, vector, epoch, timing)


@dataclass
class OptimizationResult:
    """
    최적화 알고리즘 한 번의 결과.

    Attributes:
        algorithm: 알고리즘 id
        maneuvers: 최종 기동 목록 (기동 없음이면 빈 목록)
        result: 최종 기동의 세션 결과
        maneuver_epoch: 탐색에 사용한 기동 시각 (위험 근접 접근이 없으면 None)
        parameters: 최종 기동의 최적화 변수 벡터 (기동 모드 좌표)
        history: 반복별 최고 보상 (CE 계열)
        n_evaluations: 세션 실행 횟수
    """

    algorithm: str
    maneuvers: List[Maneuver]
    result: SessionResult
    maneuver_epoch: Optional[float] = None
    parameters: Optional[np.ndarray] = None
    history: List[float] = field(default_factory=list)
    n_evaluations: int = 0

    @property
    def reward(self) -> float:
        return self.result.reward.total


def decode(
    param: ManeuverParam,
    simulator: SessionSimulator,
    dv_max: float = 1.0,
    prior_maneuvers: Sequence[Maneuver] = (),
) -> Maneuver:
    """
    변수를 관성좌표계 기동으로 변환합니다.

    국소 좌표계는 prior_maneuvers가 반영된 궤적의 기동 시각 상태에서 계산합니다.

    Raises:
        ValueError: |dv| > dv_max 이거나 기동 시각이 시간 창 밖일 때

    Example:
        >>> m = decode(ManeuverParam(ManeuverMode.IN_TRACK, [0.1], 6599.96), sim)
        >>> m.magnitude
        0.1
    """
    start, end = simulator.situation.window
    if not start <= param.epoch <= end:
        raise ValueError(f"기동 시각 {param.epoch}이 시간 창 [{start}, {end}] 밖입니다")

    trajectory = simulator.build_trajectory(prior_maneuvers)
    frame = orbit_frame(trajectory.state_at(param.epoch))
    basis = np.array(frame)[: param.mode.n_values]
    dv = param.values @ basis

    if np.linalg.norm(dv) > dv_max * (1.0 + 1e-12):
        raise ValueError(f"|dv| = {np.linalg.norm(dv):.6f} m/s 가 상한 {dv_max} m/s 를 넘습니다")
    return Maneuver(dv, param.epoch)


def first_dangerous_epoch(result: SessionResult) -> Optional[float]:
    """가장 이른 위험 근접 접근의 TCA (없으면 None)."""
    dangerous = result.dangerous
    return min(c.epoch for c in dangerous) if dangerous else None


def maneuver_epoch(tca: float, period: float, periods_before: int, window_start: float) -> float:
    """
    TCA - (periods_before + 1/2) * T, 시간 창 시작보다 앞이면 시작으로 맞춤.

    Args:
        tca: 목표 근접 접근 시각 (mjd2000)
        period: 보호 위성 주기 (초)
        periods_before: 추가로 앞당길 주기 수
        window_start: 시간 창 시작
    """
    epoch = tca - (periods_before + 0.5) * period / SECONDS_PER_DAY
    return max(epoch, window_start)


def auto_timing_bounds(simulator: SessionSimulator) -> Tuple[float, float]:
    """
    auto 타이밍의 기동 시각 범위 [창 시작, 첫 위험 TCA - 60초].

    Raises:
        ValueError: 위험 근접 접근이 없거나 범위가 비었을 때
    """
    tca = first_dangerous_epoch(simulator.nominal_result)
    if tca is None:
        raise ValueError("위험 근접 접근이 없어 기동 시각 범위를 정할 수 없습니다")

    lower = simulator.situation.start
    upper = tca - MIN_LEAD_TIME / SECONDS_PER_DAY
    if upper <= lower:
        raise ValueError(f"첫 위험 근접 접근({tca})이 시간 창 시작에 너무 가깝습니다")
    return lower, upper


def project_to_ball(values: np.ndarray, dv_max: float) -> np.ndarray:
    """성분 벡터를 |v| <= dv_max 구 안으로 축소합니다."""
    norm = float(np.linalg.norm(values))
    if norm > dv_max:
        return values * (dv_max / norm)
    return values
