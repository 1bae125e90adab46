"""
Session Simulator

위험 상황(보호 위성 + 파편 + 시간 창)에 기동 목록을 적용해서 한 세션을 실행합니다.

세션 결과:
    - 근접 접근 목록과 전체 충돌확률
    - 연료 (기동 크기의 합)
    - 시간 창 끝에서의 궤도요소 편차 (기동 - 무기동)
    - 보상
"""

import logging
import multiprocessing
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.common.conjunction import (
    DEFAULT_SCREEN_DISTANCE,
    Conjunction,
    ConjunctionScreener,
    ProbabilityModel,
    total_collision_probability,
)
from src.common.orbit import (
    ElementDeviations,
    OrbitalElements,
    StateVector,
    Trajectory,
    canonical_elements,
    propagate_elements,
    state_to_elements,
    wrap_angle,
)
from src.common.reward import RewardBreakdown, RewardConfig, score_components

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpaceObject:
    """
    궤도 물체.

    Attributes:
        name: 이름 (보호 위성은 보통 "PROTECTED")
        elements: 궤도요소
        radius: 충돌 반경 (m)
        pos_sigma: 위치 불확도 (m), 없으면 확률 모델 기본값
    """

    name: str
    elements: OrbitalElements
    radius: float
    pos_sigma: Optional[float] = None

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError(f"{self.name}: 반경은 양수여야 합니다 ({self.radius})")
        if self.pos_sigma is not None and not self.pos_sigma > 0:
            raise ValueError(f"{self.name}: 위치 불확도는 양수여야 합니다 ({self.pos_sigma})")


@dataclass(frozen=True, eq=False)
class Maneuver:
    """
    순간 속도 변화 기동.

    Attributes:
        dv: 속도 변화 벡터 (m/s, 관성좌표계)
        epoch: 기동 시각 (mjd2000)
    """

    dv: np.ndarray
    epoch: float

    def __post_init__(self):
        dv = np.asarray(self.dv, dtype=float).reshape(3)
        if not np.all(np.isfinite(dv)) or not np.isfinite(self.epoch):
            raise ValueError(f"기동 값이 유한하지 않습니다: dv={dv}, epoch={self.epoch}")
        object.__setattr__(self, "dv", dv)
        object.__setattr__(self, "epoch", float(self.epoch))

    @property
    def magnitude(self) -> float:
        return float(np.linalg.norm(self.dv))

    def __repr__(self) -> str:
        return f"Maneuver(dv={self.dv.tolist()}, epoch={self.epoch})"


@dataclass(frozen=True)
class DangerousSituation:
    """
    위험 상황: 보호 위성, 파편들, 세션 시간 창.

    파편이 없어도 유효합니다 (근접 접근 없는 세션).
    """

    protected: SpaceObject
    debris: Tuple[SpaceObject, ...]
    window: Tuple[float, float]
    name: str = "situation"

    def __post_init__(self):
        object.__setattr__(self, "debris", tuple(self.debris))
        start, end = (float(t) for t in self.window)
        if not end > start:
            raise ValueError(f"시간 창의 끝은 시작보다 뒤여야 합니다: {self.window}")
        object.__setattr__(self, "window", (start, end))

    @property
    def start(self) -> float:
        return self.window[0]

    @property
    def end(self) -> float:
        return self.window[1]


@dataclass
class SessionResult:
    """세션 실행 결과."""

    total_probability: float
    fuel: float
    deviations: ElementDeviations
    conjunctions: List[Conjunction]
    reward: RewardBreakdown
    maneuvers: List[Maneuver] = field(default_factory=list)

    @property
    def dangerous(self) -> List[Conjunction]:
        return [c for c in self.conjunctions if c.danger]


def apply_maneuver(state: StateVector, maneuver: Maneuver) -> StateVector:
    """
    순간 기동: 위치는 그대로, 속도에 dv를 더합니다.

    Raises:
        ValueError: 상태 시각과 기동 시각이 다를 때
    """
    if not np.isclose(state.epoch, maneuver.epoch, rtol=0.0, atol=1e-9):
        raise ValueError(f"상태 시각({state.epoch})과 기동 시각({maneuver.epoch})이 다릅니다")
    return StateVector(state.position.copy(), state.velocity + maneuver.dv, state.epoch)


def deviations(maneuvered: OrbitalElements, nominal: OrbitalElements) -> ElementDeviations:
    """
    같은 시각의 두 궤도요소 차이 (maneuvered - nominal).

    각도 차이는 (-pi, pi]로 감쌉니다. 예: 2pi - 0.001 과 0.001 의 차이는 -0.002.

    Raises:
        ValueError: 두 궤도요소의 시각이 다를 때
    """
    if not np.isclose(maneuvered.epoch, nominal.epoch, rtol=0.0, atol=1e-9):
        raise ValueError(f"편차는 같은 시각에서만 계산합니다: {maneuvered.epoch} != {nominal.epoch}")
    return ElementDeviations(
        a=maneuvered.a - nominal.a,
        e=maneuvered.e - nominal.e,
        i=wrap_angle(maneuvered.i - nominal.i),
        raan=wrap_angle(maneuvered.raan - nominal.raan),
        argp=wrap_angle(maneuvered.argp - nominal.argp),
        mean_anomaly=wrap_angle(maneuvered.mean_anomaly - nominal.mean_anomaly),
    )


class SessionSimulator:
    """
    한 위험 상황에 대한 반복 세션 실행기.

    파편 궤적 샘플과 무기동 최종 궤도요소를 캐시해 두고, run()마다
    보호 위성 궤적만 새로 만듭니다. 최적화기는 이 객체를 목적함수로 사용합니다.

    Example:
        >>> sim = SessionSimulator(situation)
        >>> result = sim.run([Maneuver([0.0, 0.1, 0.0], 6599.96)])
        >>> print(result.reward.total)
    """

    def __init__(
        self,
        situation: DangerousSituation,
        reward_cfg: RewardConfig = RewardConfig(),
        model: ProbabilityModel = ProbabilityModel(),
        screen_distance: float = DEFAULT_SCREEN_DISTANCE,
        danger_threshold: Optional[float] = None,
    ):
        self.situation = situation
        self.reward_cfg = reward_cfg
        if danger_threshold is None:
            danger_threshold = reward_cfg.collision_probability

        self.screener = ConjunctionScreener(
            situation.protected,
            situation.debris,
            situation.window,
            screen_distance=screen_distance,
            model=model,
            danger_threshold=danger_threshold,
        )
        self.nominal_trajectory = Trajectory(situation.protected.elements)
        self.nominal_final = canonical_elements(
            propagate_elements(situation.protected.elements, situation.end)
        )
        self.n_runs = 0
        self._nominal_result: Optional[SessionResult] = None
        self._pool = None

    def __getstate__(self):
        state = self.__dict__.copy()
        state["_pool"] = None
        return state

    @property
    def protected_period(self) -> float:
        """보호 위성 주기 (초)."""
        return self.situation.protected.elements.period

    def build_trajectory(self, maneuvers: Sequence[Maneuver]) -> Trajectory:
        """
        기동 목록을 반영한 보호 위성 궤적.

        기동은 시각 순으로 적용하고, 같은 시각의 기동은 dv를 합칩니다.
        크기 0인 기동은 궤적을 바꾸지 않습니다.

        Raises:
            ValueError: 시간 창 밖의 기동
        """
        start, end = self.situation.window
        for m in maneuvers:
            if not start <= m.epoch <= end:
                raise ValueError(f"기동 시각 {m.epoch}이 시간 창 [{start}, {end}] 밖입니다")

        combined = {}
        for m in sorted(maneuvers, key=lambda m: m.epoch):
            combined[m.epoch] = combined.get(m.epoch, 0.0) + m.dv

        trajectory = self.nominal_trajectory
        for epoch, dv in combined.items():
            if not np.any(dv):
                continue
            state = trajectory.state_at(epoch)
            state = apply_maneuver(state, Maneuver(dv, epoch))
            trajectory = trajectory.appended(epoch, state_to_elements(state))
        return trajectory

    def run(self, maneuvers: Sequence[Maneuver] = ()) -> SessionResult:
        """
        기동 목록으로 세션을 실행합니다.

        Args:
            maneuvers: 기동 목록 (비어 있으면 무기동 세션)

        Returns:
            SessionResult
        """
        maneuvers = list(maneuvers)
        trajectory = self.build_trajectory(maneuvers)
        conjunctions = self.screener.screen(trajectory)

        total_probability = total_collision_probability(c.probability for c in conjunctions)
        fuel = float(sum(m.magnitude for m in maneuvers))
        final = canonical_elements(trajectory.elements_at(self.situation.end))
        devs = deviations(final, self.nominal_final)
        reward = score_components(total_probability, fuel, devs.as_dict(), self.reward_cfg)

        self.n_runs += 1
        return SessionResult(
            total_probability=total_probability,
            fuel=fuel,
            deviations=devs,
            conjunctions=conjunctions,
            reward=reward,
            maneuvers=maneuvers,
        )

    @property
    def nominal_result(self) -> SessionResult:
        """무기동 세션 결과 (캐시)."""
        if self._nominal_result is None:
            self._nominal_result = self.run([])
            logger.debug(
                "%s: nominal session has %d conjunctions (%d dangerous), Pc=%.3e",
                self.situation.name,
                len(self._nominal_result.conjunctions),
                len(self._nominal_result.dangerous),
                self._nominal_result.total_probability,
            )
        return self._nominal_result

    def run_many(self, maneuver_lists: Sequence[Sequence[Maneuver]]) -> List[SessionResult]:
        """
        여러 기동 목록을 차례로 실행합니다 (입력 순서 유지).

        parallel() 블록 안에서는 워커 프로세스들이 나눠 실행합니다.
        세션은 입력만의 함수이므로 결과는 직렬 실행과 같습니다.
        """
        maneuver_lists = [list(m) for m in maneuver_lists]
        if self._pool is None:
            return [self.run(m) for m in maneuver_lists]
        results = self._pool.map(_run_in_worker, maneuver_lists)
        self.n_runs += len(results)
        return results

    @contextmanager
    def parallel(self, workers: int) -> Iterator["SessionSimulator"]:
        """
        run_many를 workers개 프로세스로 나눠 실행하는 블록.

        워커마다 시뮬레이터(파편 샘플 캐시 포함)를 한 번만 복사해 둡니다.
        workers <= 1이거나 이미 병렬 블록 안이면 아무것도 하지 않습니다.

        Example:
            >>> with simulator.parallel(4):
            ...     result = cross_entropy(simulator, init)
        """
        if workers <= 1 or self._pool is not None:
            yield self
            return

        _ = self.nominal_result
        with multiprocessing.Pool(workers, initializer=_init_worker, initargs=(self,)) as pool:
            self._pool = pool
            try:
                yield self
            finally:
                self._pool = None


def run_session(
    situation: DangerousSituation,
    maneuvers: Sequence[Maneuver] = (),
    reward_cfg: RewardConfig = RewardConfig(),
    model: ProbabilityModel = ProbabilityModel(),
    screen_distance: float = DEFAULT_SCREEN_DISTANCE,
    danger_threshold: Optional[float] = None,
) -> SessionResult:
    """SessionSimulator를 한 번 만들어 세션 하나를 실행합니다."""
    simulator = SessionSimulator(situation, reward_cfg, model, screen_distance, danger_threshold)
    return simulator.run(maneuvers)


# 워커 프로세스 쪽 시뮬레이터 (SessionSimulator.parallel의 풀 초기화에서 설정)
_worker_simulator: Optional[SessionSimulator] = None


def _init_worker(simulator: SessionSimulator) -> None:
    global _worker_simulator
    _worker_simulator = simulator


def _run_in_worker(maneuvers: List[Maneuver]) -> SessionResult:
    return _worker_simulator.run(maneuvers)
