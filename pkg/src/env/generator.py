"""
Dangerous Situation Generator

무작위 위험 상황(보호 위성 + 파편들)을 생성합니다.

생성 절차:
    1. 보호 위성 궤도요소를 균등분포에서 뽑고, 첫 근접 접근 시각 t1에 고정
    2. 파편 k의 근접 시각 t_k: 첫 파편은 t1, 나머지는 (t1, 창 끝) 균등분포
    3. 보호 위성을 t_k로 전파하고, 그 위치 근처(가우시안 오프셋)를 지나며
       궤도면이 정해진 각도만큼 기운 파편을 만듦
    4. 첫 파편은 실제로 스크린 거리 안의 근접 접근이 생길 때까지 다시 뽑음

seed와 index로 RNG를 만들기 때문에 같은 (seed, index)는 항상 같은 상황을 만듭니다.
"""

import logging
from dataclasses import dataclass
from typing import List, NamedTuple, Tuple

import numpy as np
from tqdm import tqdm

from src.common.conjunction import DEFAULT_SCREEN_DISTANCE, find_conjunctions
from src.common.orbit import (
    MU,
    SECONDS_PER_DAY,
    TWO_PI,
    OrbitalElements,
    StateVector,
    propagate,
    state_to_elements,
)
from src.env.simulator import DangerousSituation, SpaceObject

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GeneratorConfig:
    """
    상황 생성 분포 설정.

    Attributes:
        n_debris: 파편 수
        a_range: 보호 위성 반장축 범위 (m)
        e_range: 보호 위성 이심률 범위
        angle_range: i, raan, argp, 평균근점이각 범위 (rad)
        protected_radius_range: 보호 위성 반경 범위 (m)
        plane_angle_range: 파편 궤도면과 보호 위성 궤도면 사이 각도 범위 (rad)
        first_offset_sigma: 첫 파편 위치 오프셋 표준편차 (m)
        other_offset_sigma: 나머지 파편 위치 오프셋 표준편차 (m)
        speed_sigma: 파편 속력 표준편차 (m/s)
        debris_radius_range: 파편 반경 범위 (m)
        pos_sigma: 모든 물체의 위치 불확도 (m)
        first_conjunction_epoch: 첫 근접 접근 시각 t1 (mjd2000)
        horizon: t1 이후 시간 창 길이 (일)
        screen_distance: 첫 파편 근접 접근 확인용 스크린 거리 (m)
        max_first_debris_tries: 첫 파편 재생성 상한
        max_speed_tries: 속박 궤도 속력 재추출 상한
        rng_seed: 기본 seed
    """

    n_debris: int = 10
    a_range: Tuple[float, float] = (7_000_000.0, 8_000_000.0)
    e_range: Tuple[float, float] = (0.0, 0.003)
    angle_range: Tuple[float, float] = (0.0, TWO_PI)
    protected_radius_range: Tuple[float, float] = (0.3, 55.0)
    plane_angle_range: Tuple[float, float] = (0.5, 2.64)
    first_offset_sigma: float = 50.0
    other_offset_sigma: float = 500.0
    speed_sigma: float = 0.05
    debris_radius_range: Tuple[float, float] = (0.05, 1.0)
    pos_sigma: float = 100.0
    first_conjunction_epoch: float = 6600.0
    horizon: float = 1.0
    screen_distance: float = DEFAULT_SCREEN_DISTANCE
    max_first_debris_tries: int = 20
    max_speed_tries: int = 100
    rng_seed: int = 0

    def __post_init__(self):
        if self.n_debris < 1:
            raise ValueError(f"파편은 1개 이상이어야 합니다: {self.n_debris}")
        for name in ("a_range", "e_range", "angle_range", "protected_radius_range",
                     "plane_angle_range", "debris_radius_range"):
            lo, hi = getattr(self, name)
            if lo > hi:
                raise ValueError(f"{name}: 하한이 상한보다 큽니다 ({lo} > {hi})")
            object.__setattr__(self, name, (float(lo), float(hi)))
        if self.a_range[0] <= 0 or not (0 <= self.e_range[0] and self.e_range[1] < 1):
            raise ValueError("반장축은 양수, 이심률은 [0, 1) 범위여야 합니다")
        lo, hi = self.plane_angle_range
        if not (0 < lo and hi < np.pi):
            raise ValueError(f"궤도면 각도는 (0, pi) 범위여야 합니다: {self.plane_angle_range}")
        if self.horizon <= 0:
            raise ValueError(f"시간 창 길이는 양수여야 합니다: {self.horizon}")


class DebrisGeometry(NamedTuple):
    """파편 하나의 추출 결과 (검증/분석용)."""

    position: np.ndarray
    velocity: np.ndarray
    plane_angle: float
    direction: int
    radius: float


def sample_protected(cfg: GeneratorConfig, rng: np.random.Generator) -> SpaceObject:
    """보호 위성을 추출합니다 (epoch = 첫 근접 접근 시각)."""
    angles = rng.uniform(*cfg.angle_range, size=4)
    elements = OrbitalElements(
        a=rng.uniform(*cfg.a_range),
        e=rng.uniform(*cfg.e_range),
        i=angles[0],
        raan=angles[1],
        argp=angles[2],
        mean_anomaly=angles[3],
        epoch=cfg.first_conjunction_epoch,
    )
    radius = rng.uniform(*cfg.protected_radius_range)
    return SpaceObject("PROTECTED", elements, radius, cfg.pos_sigma)


def sample_debris_geometry(
    protected_state: StateVector,
    is_first: bool,
    cfg: GeneratorConfig,
    rng: np.random.Generator,
) -> DebrisGeometry:
    """
    보호 위성 상태 근처를 지나는 파편 상태를 추출합니다.

    파편 궤도면 법선 n_d는 파편 위치 방향 r에 수직이면서 보호 위성 법선 n_p와
    정확히 alpha 각도를 이루도록 만듭니다. 속도는 n_d x r 방향이며
    방향 부호(+/-)는 동전 던지기로 정합니다 (- 이면 궤도면 각도는 pi - alpha).

    Raises:
        RuntimeError: max_speed_tries 안에 속박 궤도 속력을 못 뽑았을 때
    """
    sigma = cfg.first_offset_sigma if is_first else cfg.other_offset_sigma
    position = protected_state.position + rng.normal(0.0, sigma, size=3)
    r_norm = float(np.linalg.norm(position))
    r_hat = position / r_norm

    h_p = protected_state.angular_momentum
    n_p = h_p / np.linalg.norm(h_p)

    # n_p를 r에 수직인 평면으로 투영
    m = n_p - (n_p @ r_hat) * r_hat
    c = float(np.linalg.norm(m))
    m_hat = m / c
    k_hat = np.cross(r_hat, m_hat)

    alpha = float(rng.uniform(*cfg.plane_angle_range))
    x = float(np.clip(np.cos(alpha) / c, -1.0, 1.0))
    n_d = x * m_hat + np.sqrt(1.0 - x * x) * k_hat

    direction = 1 if rng.random() < 0.5 else -1
    tangent = np.cross(n_d, r_hat)

    v_ref = float(np.linalg.norm(protected_state.velocity))
    escape = np.sqrt(2.0 * MU / r_norm)
    for _ in range(cfg.max_speed_tries):
        speed = rng.normal(v_ref, cfg.speed_sigma)
        if 0.0 < speed < escape:
            break
    else:
        raise RuntimeError(f"{cfg.max_speed_tries}회 안에 속박 궤도 속력을 뽑지 못했습니다")

    radius = float(rng.uniform(*cfg.debris_radius_range))
    return DebrisGeometry(
        position=position,
        velocity=direction * speed * tangent,
        plane_angle=alpha,
        direction=direction,
        radius=radius,
    )


def construct_debris(
    protected_state: StateVector,
    is_first: bool,
    cfg: GeneratorConfig,
    rng: np.random.Generator,
    name: str = "DEBRIS",
) -> SpaceObject:
    """
    보호 위성 상태에서 파편 물체를 만듭니다.

    Args:
        protected_state: 근접 시각의 보호 위성 상태
        is_first: 첫 파편이면 작은 위치 오프셋 사용
        cfg: 생성 설정
        rng: 난수 생성기
        name: 파편 이름

    Returns:
        epoch = protected_state.epoch 인 SpaceObject
    """
    geometry = sample_debris_geometry(protected_state, is_first, cfg, rng)
    state = StateVector(geometry.position, geometry.velocity, protected_state.epoch)
    return SpaceObject(name, state_to_elements(state), geometry.radius, cfg.pos_sigma)


def generate_situation(cfg: GeneratorConfig = GeneratorConfig(), index: int = 0) -> DangerousSituation:
    """
    위험 상황 하나를 생성합니다.

    시간 창은 [t1 - T, t1 + horizon] 이고 (T: 보호 위성 주기),
    첫 파편은 반드시 스크린 거리 안의 근접 접근을 만듭니다.

    Args:
        cfg: 생성 설정
        index: 상황 번호 (RNG 스트림 선택)

    Returns:
        DangerousSituation ("situation_<index>")

    Raises:
        RuntimeError: 첫 파편이 재시도 상한 안에 근접 접근을 만들지 못했을 때
    """
    rng = np.random.default_rng([cfg.rng_seed, index])

    protected = sample_protected(cfg, rng)
    t1 = cfg.first_conjunction_epoch
    window = (t1 - protected.elements.period / SECONDS_PER_DAY, t1 + cfg.horizon)

    epochs = np.concatenate([[t1], rng.uniform(t1, window[1], size=cfg.n_debris - 1)])

    debris: List[SpaceObject] = []
    for k, epoch in enumerate(epochs):
        state = propagate(protected.elements, float(epoch))
        name = f"DEBRIS{k}"
        if k > 0:
            debris.append(construct_debris(state, False, cfg, rng, name))
            continue

        for attempt in range(cfg.max_first_debris_tries):
            candidate = construct_debris(state, True, cfg, rng, name)
            if find_conjunctions(protected, [candidate], window, cfg.screen_distance):
                break
            logger.debug("situation %d: first debris retry %d", index, attempt + 1)
        else:
            raise RuntimeError(
                f"상황 {index}: 첫 파편이 {cfg.max_first_debris_tries}회 안에 근접 접근을 만들지 못했습니다"
            )
        debris.append(candidate)

    logger.info("situation %d generated: %d debris, window %.4f - %.4f", index, len(debris), *window)
    return DangerousSituation(protected, tuple(debris), window, name=f"situation_{index}")


def generate_situations(
    cfg: GeneratorConfig = GeneratorConfig(),
    count: int = 1,
    start_index: int = 0,
    progress: bool = True,
) -> List[DangerousSituation]:
    """여러 상황을 생성합니다 (index = start_index ... start_index + count - 1)."""
    if count < 0:
        raise ValueError(f"count는 음수일 수 없습니다: {count}")
    indices = range(start_index, start_index + count)
    iterator = tqdm(indices, desc="Generating situations", disable=not progress)
    return [generate_situation(cfg, index) for index in iterator]


def plane_angle(a: OrbitalElements, b: OrbitalElements) -> float:
    """두 궤도면 법선 사이의 각도 (rad)."""
    def normal(el: OrbitalElements) -> np.ndarray:
        return np.array([np.sin(el.i) * np.sin(el.raan), -np.sin(el.i) * np.cos(el.raan), np.cos(el.i)])

    return float(np.arccos(np.clip(normal(a) @ normal(b), -1.0, 1.0)))


def describe_situation(situation: DangerousSituation) -> str:
    """상황 요약 문자열 (로그/CLI 출력용)."""
    protected = situation.protected
    lines = [
        f"{situation.name}: window [{situation.start:.4f}, {situation.end:.4f}], "
        f"{len(situation.debris)} debris",
        f"  PROTECTED a={protected.elements.a:.1f} m, e={protected.elements.e:.4f}, r={protected.radius:.2f} m",
    ]
    for d in situation.debris:
        angle = plane_angle(protected.elements, d.elements)
        lines.append(f"  {d.name} epoch={d.elements.epoch:.4f}, plane angle={angle:.3f} rad, r={d.radius:.3f} m")
    return "\n".join(lines)
