"""
Reward Module

충돌 회피 기동 결과를 하나의 스칼라 보상으로 평가합니다.

각 성분(충돌확률, 연료, 궤도요소 편차)은 임계값 기준의 구간선형 패널티를 받습니다.
    - 임계값 이하: 완만한 기울기 (-below * v/t)
    - 임계값 초과: 가파른 기울기 (-below - above * (v/t - 1))
총 보상은 성분 패널티의 합이며 항상 0 이하입니다.
"""

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Dict, Mapping, Union

import numpy as np

if TYPE_CHECKING:
    from src.env.simulator import SessionResult

COMPONENTS = ("collision_probability", "fuel", "a", "e", "i", "raan", "argp")


@dataclass(frozen=True)
class RewardConfig:
    """
    보상 임계값 설정.

    Attributes:
        collision_probability: 허용 충돌확률 (위험 판정 기준으로도 사용)
        fuel: 허용 연료 (m/s, 기동 크기의 합)
        dev_a: 허용 반장축 편차 (m)
        dev_e, dev_i, dev_raan, dev_argp: 허용 편차 (무차원 / rad)
        below_slope_scale: 임계값 이하 기울기 배수
        above_slope_scale: 임계값 초과 기울기 배수
        penalize_mean_anomaly: 평균근점이각 편차도 패널티에 포함할지
        dev_mean_anomaly: penalize_mean_anomaly일 때의 허용 편차 (rad)
    """

    collision_probability: float = 1e-4
    fuel: float = 1.0
    dev_a: float = 200.0
    dev_e: float = 0.01
    dev_i: float = 0.01
    dev_raan: float = 0.01
    dev_argp: float = 0.01
    below_slope_scale: float = 1.0
    above_slope_scale: float = 9.0
    penalize_mean_anomaly: bool = False
    dev_mean_anomaly: float = 0.01

    def __post_init__(self):
        for name, value in self.thresholds().items():
            if not value > 0:
                raise ValueError(f"임계값은 양수여야 합니다: {name}={value}")
        if self.below_slope_scale < 0 or self.above_slope_scale < 0:
            raise ValueError("기울기 배수는 음수일 수 없습니다")

    def thresholds(self) -> Dict[str, float]:
        """성분 이름 -> 임계값 (보상 계산 순서)."""
        thresholds = {
            "collision_probability": self.collision_probability,
            "fuel": self.fuel,
            "a": self.dev_a,
            "e": self.dev_e,
            "i": self.dev_i,
            "raan": self.dev_raan,
            "argp": self.dev_argp,
        }
        if self.penalize_mean_anomaly:
            thresholds["mean_anomaly"] = self.dev_mean_anomaly
        return thresholds


@dataclass(frozen=True)
class RewardBreakdown:
    """성분별 패널티와 총 보상."""

    components: Dict[str, float] = field(default_factory=dict)
    total: float = 0.0

    @classmethod
    def from_components(cls, components: Mapping[str, float]) -> "RewardBreakdown":
        components = {name: float(value) for name, value in components.items()}
        return cls(components=components, total=float(sum(components.values())))


def component_reward(
    value: Union[float, np.ndarray],
    threshold: float,
    below_slope_scale: float = 1.0,
    above_slope_scale: float = 9.0,
) -> Union[float, np.ndarray]:
    """
    단일 성분의 구간선형 패널티.

    Args:
        value: 성분 값 (>= 0, 편차는 절댓값으로 전달). 배열도 가능
        threshold: 임계값 (> 0)
        below_slope_scale: 임계값 이하 기울기 배수
        above_slope_scale: 임계값 초과 기울기 배수

    Returns:
        패널티 (<= 0), 입력이 스칼라면 float

    Raises:
        ValueError: threshold <= 0 이거나 value < 0일 때

    Example:
        >>> component_reward(0.5, 1.0)
        -0.5
        >>> component_reward(2.0, 1.0)
        -10.0
    """
    if not threshold > 0:
        raise ValueError(f"임계값은 양수여야 합니다: {threshold}")
    value = np.asarray(value, dtype=float)
    if np.any(value < 0):
        raise ValueError("성분 값은 음수일 수 없습니다 (편차는 절댓값 사용)")

    ratio = value / threshold
    penalty = np.where(
        ratio <= 1.0,
        -below_slope_scale * ratio,
        -below_slope_scale - above_slope_scale * (ratio - 1.0),
    )
    return float(penalty) if penalty.ndim == 0 else penalty


def component_values(
    total_probability: float, fuel: float, deviations: Mapping[str, float]
) -> Dict[str, float]:
    """패널티를 매기기 전의 성분 값 (편차는 절댓값)."""
    values = {"collision_probability": float(total_probability), "fuel": float(fuel)}
    values.update({name: abs(float(value)) for name, value in deviations.items()})
    return values


def score_components(
    total_probability: float,
    fuel: float,
    deviations: Mapping[str, float],
    cfg: RewardConfig = RewardConfig(),
) -> RewardBreakdown:
    """
    충돌확률, 연료, 편차로 보상을 계산합니다.

    Args:
        total_probability: 세션 전체 충돌확률
        fuel: 기동 크기의 합 (m/s)
        deviations: 'a', 'e', 'i', 'raan', 'argp', 'mean_anomaly' -> 부호 있는 편차
        cfg: 보상 설정

    Returns:
        RewardBreakdown
    """
    values = component_values(total_probability, fuel, deviations)

    components = {}
    for name, threshold in cfg.thresholds().items():
        components[name] = component_reward(
            values[name], threshold, cfg.below_slope_scale, cfg.above_slope_scale
        )
    return RewardBreakdown.from_components(components)


def total_reward(result: "SessionResult", cfg: RewardConfig = RewardConfig()) -> RewardBreakdown:
    """세션 결과의 보상 (SessionResult의 확률/연료/편차 사용)."""
    return score_components(
        result.total_probability, result.fuel, result.deviations.as_dict(), cfg
    )
