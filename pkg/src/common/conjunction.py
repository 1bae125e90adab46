"""
Conjunction Screening Module

보호 위성 궤적과 파편 궤적 사이의 근접 접근(conjunction)을 찾고 충돌확률을 계산합니다.

Core Functions:
    - collision_probability: 조우면 2차원 가우시안 충돌확률
    - total_collision_probability: 독립 사건 가정 하의 세션 전체 확률
    - ConjunctionScreener: 파편 궤적 캐시 + 격자 탐색 + TCA 정밀화
    - find_conjunctions: 스크리너를 한 번 만들어 쓰는 함수형 래퍼
"""

import logging
import warnings
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy import integrate, special

from src.common.orbit import MU, SECONDS_PER_DAY, Trajectory

if TYPE_CHECKING:
    from src.env.simulator import SpaceObject

logger = logging.getLogger(__name__)

DEFAULT_SCREEN_DISTANCE = 2000.0  # m
DEFAULT_DANGER_THRESHOLD = 1e-4
DEFAULT_POS_SIGMA = 100.0  # m

SAMPLES_PER_PERIOD = 200
TCA_XTOL = 1e-3  # s
PASS_SEPARATION = 0.1  # 보호 위성 주기 대비, 같은 통과로 보는 간격
ACCEL_MARGIN = 1.1  # 구간 안 반경 변화와 기동 속도 불연속 여유


@dataclass(frozen=True)
class Conjunction:
    """
    근접 접근 한 건.

    Attributes:
        debris_name: 파편 이름
        miss_distance: TCA에서의 거리 (m)
        epoch: TCA (mjd2000)
        probability: 충돌확률
        danger: probability >= 위험 임계값
    """

    debris_name: str
    miss_distance: float
    epoch: float
    probability: float
    danger: bool

    def to_row(self) -> Dict[str, object]:
        return {
            "debris name": self.debris_name,
            "miss distance (m)": self.miss_distance,
            "epoch (mjd2000)": self.epoch,
            "collision probability": self.probability,
            "collision danger": self.danger,
        }



def _isotropic_gaussian(miss_distance: float, radius: float, sigma: float) -> float:
    """
    조우면 상대위치 ~ N(d, sigma^2 I)일 때 반경 radius 원 안에 들 확률.

    |X|^2 / sigma^2 는 자유도 2, 비중심도 d^2 / sigma^2 인 비중심 카이제곱이므로
    Poisson 가중 정칙 불완전 감마 함수의 합이 됩니다:

        P = sum_k Pois(k; lam) * gammainc(k + 1, x),  lam = d^2 / 2s^2,  x = R^2 / 2s^2

    k가 sqrt(lam * x)를 넘으면 항이 기하급수로 줄어듭니다.
    log 공간에서 더해서 먼 꼬리 확률도 0으로 뭉개지지 않습니다.
    """
    lam = miss_distance**2 / (2.0 * sigma**2)
    x = radius**2 / (2.0 * sigma**2)
    k = np.arange(int(2.0 * np.sqrt(lam * x) + 2.0 * x + 50))
    with np.errstate(divide="ignore"):
        log_terms = -lam + special.xlogy(k, lam) - special.gammaln(k + 1) + np.log(special.gammainc(k + 1, x))
    return float(np.exp(special.logsumexp(log_terms)))


def _isotropic_gaussian_quad(miss_distance: float, radius: float, sigma: float) -> float:
    """
    같은 확률을 극좌표 반경 적분으로 계산합니다 (검증용, 느림).

    각도 적분을 하면 (r/s^2) exp(-(r^2+d^2)/2s^2) I0(rd/s^2) 가 되고,
    지수 스케일 Bessel 함수 i0e로 넘침 없이 계산합니다.
    """
    s2 = sigma**2
    d = miss_distance

    def integrand(r):
        return (r / s2) * np.exp(-((r - d) ** 2) / (2.0 * s2)) * special.i0e(r * d / s2)

    points = [p for p in (d, sigma) if 0.0 < p < radius] or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, _ = integrate.quad(integrand, 0.0, radius, points=points, limit=200, epsabs=0.0, epsrel=1e-10)
    return value


# 확률 모델 레지스트리: 이름 -> (miss_distance, radius, combined_sigma) -> 확률
PROBABILITY_METHODS: Dict[str, Callable[[float, float, float], float]] = {
    "isotropic-gaussian": _isotropic_gaussian,
    "isotropic-gaussian-quad": _isotropic_gaussian_quad,
}


@dataclass(frozen=True)
class ProbabilityModel:
    """
    충돌확률 모델 설정.

    Attributes:
        sigma_protected: 보호 위성 위치 불확도 (m)
        sigma_debris: 파편 위치 불확도 (m)
        method: PROBABILITY_METHODS의 키
    """

    sigma_protected: float = DEFAULT_POS_SIGMA
    sigma_debris: float = DEFAULT_POS_SIGMA
    method: str = "isotropic-gaussian"

    def __post_init__(self):
        if not (self.sigma_protected > 0 and self.sigma_debris > 0):
            raise ValueError(
                f"위치 불확도는 양수여야 합니다: {self.sigma_protected}, {self.sigma_debris}"
            )
        if self.method not in PROBABILITY_METHODS:
            raise ValueError(
                f"알 수 없는 확률 모델: {self.method} (가능: {sorted(PROBABILITY_METHODS)})"
            )

    @property
    def combined_sigma(self) -> float:
        return float(np.hypot(self.sigma_protected, self.sigma_debris))


def collision_probability(
    miss_distance: float,
    hard_body_radius: float,
    model: ProbabilityModel = ProbabilityModel(),
) -> float:
    """
    근접 접근 한 건의 충돌확률.

    Args:
        miss_distance: TCA 거리 (m, >= 0)
        hard_body_radius: 두 물체 반경의 합 (m, >= 0)
        model: 확률 모델

    Returns:
        [0, 1] 범위 확률. 반경이 0이면 0

    Raises:
        ValueError: 음수 입력

    Example:
        >>> round(collision_probability(141.42, 14.142), 5)
        0.00303
    """
    if miss_distance < 0 or hard_body_radius < 0:
        raise ValueError(f"거리와 반경은 음수일 수 없습니다: {miss_distance}, {hard_body_radius}")
    if hard_body_radius == 0:
        return 0.0

    method = PROBABILITY_METHODS[model.method]
    value = method(float(miss_distance), float(hard_body_radius), model.combined_sigma)
    return float(min(max(value, 0.0), 1.0))


def total_collision_probability(probabilities: Iterable[float]) -> float:
    """
    독립 사건 가정 하의 전체 충돌확률 1 - prod(1 - p).

    log1p/expm1로 계산해서 작은 확률들의 정밀도를 유지합니다.
    """
    p = np.asarray(list(probabilities), dtype=float)
    if p.size == 0:
        return 0.0
    if np.any((p < 0) | (p > 1)):
        raise ValueError("확률은 [0, 1] 범위여야 합니다")
    return float(-np.expm1(np.sum(np.log1p(-p))))


class ConjunctionScreener:
    """
    파편 궤적을 한 번만 샘플링해 두고, 보호 위성 궤적마다 근접 접근을 찾습니다.

    1. 시간 격자(가장 짧은 주기 / 200)에서 상대거리 변화율이 음 -> 비음으로 바뀌는 구간 탐색
    2. 끝점 직선 근사 최소 거리에서 가속도 여유를 뺀 하한이 스크린 거리 이상인 구간 제외
    3. 남은 구간을 한꺼번에 이분법으로 정밀화 (끝점 상태의 3차 Hermite 보간, 1e-3초)
       후 정확한 상태에서 Newton 한 스텝으로 TCA와 최소 거리 보정
    4. 같은 파편의 같은 통과(보호 위성 주기의 1/10 이내)는 거리가 작은 쪽만 유지

    최적화 루프에서 수천 번 호출되므로 파편 쪽 계산은 생성자에서 끝냅니다.
    """

    def __init__(
        self,
        protected: "SpaceObject",
        debris: Sequence["SpaceObject"],
        window: Tuple[float, float],
        screen_distance: float = DEFAULT_SCREEN_DISTANCE,
        model: ProbabilityModel = ProbabilityModel(),
        danger_threshold: float = DEFAULT_DANGER_THRESHOLD,
    ):
        t_start, t_end = window
        if not t_end > t_start:
            raise ValueError(f"잘못된 시간 창: {window}")
        if screen_distance <= 0:
            raise ValueError(f"스크린 거리는 양수여야 합니다: {screen_distance}")

        self.protected = protected
        self.debris = list(debris)
        self.window = (float(t_start), float(t_end))
        self.screen_distance = float(screen_distance)
        self.model = model
        self.danger_threshold = float(danger_threshold)

        periods = [protected.elements.period] + [d.elements.period for d in self.debris]
        n_steps = int(np.ceil((t_end - t_start) * SECONDS_PER_DAY / (min(periods) / SAMPLES_PER_PERIOD)))
        self.epochs = np.linspace(t_start, t_end, n_steps + 1)
        self.step = (t_end - t_start) * SECONDS_PER_DAY / n_steps
        self.pass_separation = PASS_SEPARATION * protected.elements.period / SECONDS_PER_DAY

        self._debris_trajectories = [Trajectory(d.elements) for d in self.debris]
        if self.debris:
            sampled = [traj.states_at(self.epochs) for traj in self._debris_trajectories]
            self._debris_pos = np.stack([s[0] for s in sampled])
            self._debris_vel = np.stack([s[1] for s in sampled])
            self._debris_accel = MU / np.sum(self._debris_pos**2, axis=-1)

        self._models = [
            replace(
                model,
                sigma_protected=protected.pos_sigma or model.sigma_protected,
                sigma_debris=d.pos_sigma or model.sigma_debris,
            )
            for d in self.debris
        ]
        logger.debug(
            "screener ready: %d debris, %d samples, step %.2f s", len(self.debris), self.epochs.size, self.step
        )

    def _relative_states(
        self, trajectory: Trajectory, k_idx: np.ndarray, epochs: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """후보별 (파편 k, 시각)의 정확한 상대 위치/속도 (파편 - 보호 위성)."""
        p_pos, p_vel = trajectory.states_at(epochs)
        d_pos = np.empty_like(p_pos)
        d_vel = np.empty_like(p_vel)
        for k in np.unique(k_idx):
            mask = k_idx == k
            d_pos[mask], d_vel[mask] = self._debris_trajectories[k].states_at(epochs[mask])
        return d_pos - p_pos, d_vel - p_vel

    def screen(self, trajectory: Trajectory) -> List[Conjunction]:
        """
        보호 위성 궤적에 대한 근접 접근 목록 (TCA 순 정렬).

        Args:
            trajectory: 보호 위성 궤적 (기동 반영)

        Returns:
            miss_distance < screen_distance 인 Conjunction 목록
        """
        if not self.debris:
            return []

        p_pos, p_vel = trajectory.states_at(self.epochs)
        rel_pos = self._debris_pos - p_pos[None]
        rel_vel = self._debris_vel - p_vel[None]
        rate = np.einsum("knj,knj->kn", rel_pos, rel_vel)

        k_idx, j_idx = np.nonzero((rate[:, :-1] < 0) & (rate[:, 1:] >= 0))
        if k_idx.size == 0:
            return []

        # 구간 안 최소 거리 하한: 양 끝점 직선 근사의 최소 거리 - (가속도 차 상한) h^2 / 2
        h = self.step
        r0, v0 = rel_pos[k_idx, j_idx], rel_vel[k_idx, j_idx]
        r1, v1 = rel_pos[k_idx, j_idx + 1], rel_vel[k_idx, j_idx + 1]
        p_accel = MU / np.sum(p_pos**2, axis=-1)
        accel = np.maximum(p_accel[j_idx], p_accel[j_idx + 1]) + np.maximum(
            self._debris_accel[k_idx, j_idx], self._debris_accel[k_idx, j_idx + 1]
        )
        bound = np.maximum(_linear_miss(r0, v0, 0.0, h), _linear_miss(r1, v1, -h, 0.0))
        bound -= 0.5 * ACCEL_MARGIN * accel * h**2
        keep = bound < self.screen_distance
        if not np.any(keep):
            return []

        k_idx, j_idx = k_idx[keep], j_idx[keep]
        tau = _bisect_tca(r0[keep], v0[keep], r1[keep], v1[keep], h)
        epochs, misses = self._polish(trajectory, k_idx, j_idx, self.epochs[j_idx] + tau / SECONDS_PER_DAY)

        found: Dict[int, List[Conjunction]] = {}
        for k, tca, miss in zip(k_idx, epochs, misses):
            if miss >= self.screen_distance:
                continue

            debris = self.debris[k]
            probability = collision_probability(miss, self.protected.radius + debris.radius, self._models[k])
            conjunction = Conjunction(
                debris_name=debris.name,
                miss_distance=float(miss),
                epoch=float(tca),
                probability=probability,
                danger=probability >= self.danger_threshold,
            )
            self._merge(found.setdefault(int(k), []), conjunction)

        conjunctions = [c for per_debris in found.values() for c in per_debris]
        return sorted(conjunctions, key=lambda c: (c.epoch, c.debris_name))

    def _polish(
        self, trajectory: Trajectory, k_idx: np.ndarray, j_idx: np.ndarray, epochs: np.ndarray
    ) -> Tuple[np.ndarray, np.ndarray]:
        """정확한 상대 상태에서 Newton 한 스텝으로 TCA와 최소 거리를 다듬습니다 (격자 구간 안으로 제한)."""
        rel_pos, rel_vel = self._relative_states(trajectory, k_idx, epochs)
        speed2 = np.einsum("ij,ij->i", rel_vel, rel_vel)
        dt = -np.einsum("ij,ij->i", rel_pos, rel_vel) / np.where(speed2 > 0, speed2, 1.0)
        dt = np.clip(
            dt,
            (self.epochs[j_idx] - epochs) * SECONDS_PER_DAY,
            (self.epochs[j_idx + 1] - epochs) * SECONDS_PER_DAY,
        )
        misses = np.linalg.norm(rel_pos + rel_vel * dt[:, None], axis=1)
        return epochs + dt / SECONDS_PER_DAY, misses

    def _merge(self, passes: List[Conjunction], conjunction: Conjunction) -> None:
        # 같은 통과가 두 구간에서 잡히면 거리가 작은 쪽만 유지
        for n, existing in enumerate(passes):
            if abs(existing.epoch - conjunction.epoch) < self.pass_separation:
                if conjunction.miss_distance < existing.miss_distance:
                    passes[n] = conjunction
                return
        passes.append(conjunction)


def _linear_miss(rel_pos: np.ndarray, rel_vel: np.ndarray, tau_lo: float, tau_hi: float) -> np.ndarray:
    """등속 직선 운동으로 본 [tau_lo, tau_hi]초 구간의 행별 최소 거리."""
    speed2 = np.einsum("ij,ij->i", rel_vel, rel_vel)
    tau = -np.einsum("ij,ij->i", rel_pos, rel_vel) / np.where(speed2 > 0, speed2, 1.0)
    tau = np.clip(tau, tau_lo, tau_hi)
    return np.linalg.norm(rel_pos + rel_vel * tau[:, None], axis=1)


def _hermite_range_rate(
    r0: np.ndarray, v0: np.ndarray, r1: np.ndarray, v1: np.ndarray, h: float, tau: np.ndarray
) -> np.ndarray:
    """끝점 상대 상태의 3차 Hermite 보간으로 본 구간 안 r . dr/dt."""
    s = (tau / h)[:, None]
    s2, s3 = s**2, s**3
    pos = (2 * s3 - 3 * s2 + 1) * r0 + (s3 - 2 * s2 + s) * h * v0 + (3 * s2 - 2 * s3) * r1 + (s3 - s2) * h * v1
    vel = (6 * s2 - 6 * s) * r0 / h + (3 * s2 - 4 * s + 1) * v0 + (6 * s - 6 * s2) * r1 / h + (3 * s2 - 2 * s) * v1
    return np.einsum("ij,ij->i", pos, vel)


def _bisect_tca(
    r0: np.ndarray, v0: np.ndarray, r1: np.ndarray, v1: np.ndarray, h: float, xtol: float = TCA_XTOL
) -> np.ndarray:
    """
    모든 후보 구간을 한꺼번에 이분법으로 좁혀 r . dr/dt = 0 인 구간 내 시각(초)을 찾습니다.

    끝점에서 변화율이 음 -> 비음이므로 근이 구간 안에 있습니다.
    """
    lo = np.zeros(len(r0))
    hi = np.full(len(r0), h)
    for _ in range(max(0, int(np.ceil(np.log2(h / xtol))))):
        mid = 0.5 * (lo + hi)
        approaching = _hermite_range_rate(r0, v0, r1, v1, h, mid) < 0
        lo = np.where(approaching, mid, lo)
        hi = np.where(approaching, hi, mid)
    return 0.5 * (lo + hi)


def find_conjunctions(
    protected: "SpaceObject",
    debris: Sequence["SpaceObject"],
    window: Tuple[float, float],
    screen_distance: float = DEFAULT_SCREEN_DISTANCE,
    model: ProbabilityModel = ProbabilityModel(),
    danger_threshold: float = DEFAULT_DANGER_THRESHOLD,
    trajectory: Optional[Trajectory] = None,
) -> List[Conjunction]:
    """
    보호 위성과 파편들 사이의 근접 접근을 찾습니다.

    Args:
        protected: 보호 위성
        debris: 파편 목록
        window: (시작, 끝) mjd2000
        screen_distance: 스크린 거리 (m)
        model: 확률 모델 (물체별 pos_sigma가 있으면 그 값 사용)
        danger_threshold: 위험 판정 임계값
        trajectory: 기동이 반영된 보호 위성 궤적 (없으면 무기동 궤적)

    Returns:
        TCA 순으로 정렬된 Conjunction 목록
    """
    screener = ConjunctionScreener(protected, debris, window, screen_distance, model, danger_threshold)
    if trajectory is None:
        trajectory = Trajectory(protected.elements)
    return screener.screen(trajectory)
