"""
Cross-Entropy Maneuver Optimizer

대각 가우시안 샘플링 분포를 엘리트 샘플 쪽으로 옮겨가는 교차 엔트로피 최적화.

한 반복:
    1. N(mean, diag(sigma^2))에서 population개 샘플 -> 경계 클리핑 -> dv 구 투영
    2. 보상 상위 elite_fraction 샘플 선택
    3. mean <- (1 - lr) mean + lr * elite_mean
       sigma <- max(floor, decay * ((1 - lr) sigma + lr * elite_std))
초기값을 포함해 지금까지 본 최고 샘플을 항상 유지하므로 결과는 초기값보다 나빠지지 않습니다.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from src.common.orbit import SECONDS_PER_DAY
from src.env.simulator import SessionSimulator
from src.optimize.maneuver import (
    ManeuverMode,
    ManeuverParam,
    OptimizationResult,
    Timing,
    auto_timing_bounds,
    decode,
    project_to_ball,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CrossEntropyConfig:
    """
    교차 엔트로피 설정.

    Attributes:
        population: 반복당 샘플 수
        elite_fraction: 엘리트 비율
        iterations: 반복 수 (0이면 초기값 그대로)
        initial_sigma: dv 성분 초기 표준편차 (dv_max 배수)
        initial_sigma_epoch: 기동 시각 초기 표준편차 (보호 위성 주기 배수)
        learning_rate: 평균/표준편차 갱신 비율
        sigma_decay: 반복마다 표준편차 감쇠
        sigma_floor: 표준편차 하한 (dv_max 또는 주기 배수)
        restarts: 독립 재시작 수 (최고 결과 선택)
        rng_seed: 난수 seed
    """

    population: int = 100
    elite_fraction: float = 0.1
    iterations: int = 30
    initial_sigma: float = 0.2
    initial_sigma_epoch: float = 0.1
    learning_rate: float = 0.8
    sigma_decay: float = 0.98
    sigma_floor: float = 1e-4
    restarts: int = 2
    rng_seed: int = 0

    def __post_init__(self):
        if self.population < 2:
            raise ValueError(f"population은 2 이상이어야 합니다: {self.population}")
        if not 0.0 < self.elite_fraction < 1.0:
            raise ValueError(f"elite_fraction은 (0, 1) 범위여야 합니다: {self.elite_fraction}")
        if self.population * self.elite_fraction < 2.0 - 1e-9:
            raise ValueError(
                f"엘리트가 2개 이상이어야 합니다: population={self.population}, elite_fraction={self.elite_fraction}"
            )
        if self.iterations < 0 or self.restarts < 1:
            raise ValueError("iterations >= 0, restarts >= 1 이어야 합니다")
        if not 0.0 < self.learning_rate <= 1.0:
            raise ValueError(f"learning_rate는 (0, 1] 범위여야 합니다: {self.learning_rate}")
        if self.initial_sigma < 0 or self.initial_sigma_epoch < 0 or self.sigma_floor < 0:
            raise ValueError("표준편차 설정은 음수일 수 없습니다")

    @property
    def n_elite(self) -> int:
        return max(2, int(round(self.population * self.elite_fraction)))


@dataclass
class SearchOutcome:
    """CE 탐색 결과 (벡터 공간)."""

    best_x: np.ndarray
    best_value: float
    mean: np.ndarray
    history: List[float] = field(default_factory=list)
    n_evaluations: int = 0


class CrossEntropyOptimizer:
    """
    박스 경계 안의 일반 교차 엔트로피 최대화기.

    Args:
        objective: x -> 최대화할 값
        lower, upper: 박스 경계
        sigma0: 초기 표준편차 (0인 성분은 초기값에 고정)
        cfg: CE 설정
        sigma_floor: 성분별 표준편차 하한 (sigma0 > 0인 성분에만 적용)
        project: 클리핑 뒤에 적용할 투영 (예: dv 구)
        batch_objective: 샘플 행렬 -> 값 배열. 주면 population 평가에 사용 (병렬 평가용)

    Example:
        >>> opt = CrossEntropyOptimizer(lambda x: -np.sum(x**2), -np.ones(2), np.ones(2), 0.2 * np.ones(2))
        >>> outcome = opt.run(np.array([0.5, 0.5]))
    """

    def __init__(
        self,
        objective: Callable[[np.ndarray], float],
        lower: np.ndarray,
        upper: np.ndarray,
        sigma0: np.ndarray,
        cfg: CrossEntropyConfig = CrossEntropyConfig(),
        sigma_floor: Optional[np.ndarray] = None,
        project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        batch_objective: Optional[Callable[[np.ndarray], np.ndarray]] = None,
    ):
        self.objective = objective
        self.lower = np.asarray(lower, dtype=float)
        self.upper = np.asarray(upper, dtype=float)
        self.sigma0 = np.asarray(sigma0, dtype=float)
        self.fixed = self.sigma0 == 0
        self.cfg = cfg
        floor = np.zeros_like(self.sigma0) if sigma_floor is None else np.asarray(sigma_floor, dtype=float)
        self.floor = np.where(self.fixed, 0.0, floor)
        self.project = project or (lambda x: x)
        self.batch_objective = batch_objective or (lambda xs: np.array([objective(x) for x in xs]))

    def _feasible(self, x: np.ndarray) -> np.ndarray:
        return self.project(np.clip(x, self.lower, self.upper))

    def _run_once(self, init: np.ndarray, rng: np.random.Generator, history: List[float]) -> SearchOutcome:
        cfg = self.cfg
        best_x = self._feasible(init)
        best_value = self.objective(best_x)
        n_evaluations = 1
        mean = best_x.copy()
        sigma = self.sigma0.copy()

        for it in range(cfg.iterations):
            samples = mean + sigma * rng.standard_normal((cfg.population, mean.size))
            samples[:, self.fixed] = mean[self.fixed]
            samples = np.array([self._feasible(x) for x in samples])
            values = np.asarray(self.batch_objective(samples), dtype=float)
            n_evaluations += cfg.population

            order = np.argsort(-values, kind="stable")
            elite = samples[order[: cfg.n_elite]]
            if values[order[0]] > best_value:
                best_value = float(values[order[0]])
                best_x = samples[order[0]].copy()

            # 고정 성분은 평균도 초기값 그대로 (부동소수점 드리프트 없음)
            lr = cfg.learning_rate
            mean = np.where(self.fixed, mean, mean + lr * (elite.mean(axis=0) - mean))
            sigma = np.maximum(self.floor, cfg.sigma_decay * ((1.0 - lr) * sigma + lr * elite.std(axis=0)))
            sigma[self.fixed] = 0.0
            history.append(max(best_value, history[-1]) if history else best_value)
            logger.debug("CE iteration %d: best %.5f, mean sigma %.3e", it + 1, history[-1], float(np.mean(sigma)))

        return SearchOutcome(best_x, float(best_value), mean, n_evaluations=n_evaluations)

    def run(self, init: np.ndarray) -> SearchOutcome:
        """restarts번 독립 실행하고 최고 결과를 돌려줍니다. history는 전체 최고값 추이."""
        init = np.asarray(init, dtype=float)
        history: List[float] = []
        best: Optional[SearchOutcome] = None
        n_evaluations = 0

        for restart in range(self.cfg.restarts):
            rng = np.random.default_rng([self.cfg.rng_seed, restart])
            outcome = self._run_once(init, rng, history)
            n_evaluations += outcome.n_evaluations
            if best is None or outcome.best_value > best.best_value:
                best = outcome

        if not history:
            history.append(best.best_value)

        best.history = history
        best.n_evaluations = n_evaluations
        return best


def cross_entropy(
    simulator: SessionSimulator,
    init: ManeuverParam,
    cfg: CrossEntropyConfig = CrossEntropyConfig(),
    dv_max: float = 1.0,
    algorithm: str = "ce",
) -> OptimizationResult:
    """
    단일 기동 교차 엔트로피 최적화.

    population 평가는 simulator.run_many로 하므로 simulator.parallel() 안에서
    호출하면 워커 프로세스로 나뉩니다. 결과는 직렬 실행과 같습니다.

    Args:
        simulator: 세션 시뮬레이터
        init: 초기 변수 (mode/timing도 여기서 정함)
        cfg: CE 설정
        dv_max: 기동 크기 상한 (m/s)
        algorithm: 결과에 기록할 알고리즘 id

    Returns:
        OptimizationResult (보상이 decode(init) 이상)

    Raises:
        ValueError: auto 타이밍인데 기동 가능 시각 범위가 비었을 때
    """
    mode, timing = init.mode, init.timing
    n = mode.n_values
    period_days = simulator.protected_period / SECONDS_PER_DAY

    lower = -dv_max * np.ones(n)
    upper = dv_max * np.ones(n)
    sigma0 = cfg.initial_sigma * dv_max * np.ones(n)
    floor = cfg.sigma_floor * dv_max * np.ones(n)
    if timing is Timing.AUTO:
        t_lo, t_hi = auto_timing_bounds(simulator)
        lower = np.append(lower, t_lo)
        upper = np.append(upper, t_hi)
        sigma0 = np.append(sigma0, cfg.initial_sigma_epoch * period_days)
        floor = np.append(floor, cfg.sigma_floor * period_days)

    def project(x: np.ndarray) -> np.ndarray:
        x = x.copy()
        x[:n] = project_to_ball(x[:n], dv_max)
        return x

    def to_maneuvers(x: np.ndarray):
        param = ManeuverParam.from_vector(mode, timing, x, init.epoch)
        if not np.any(param.values):
            return []
        return [decode(param, simulator, dv_max)]

    def objective(x: np.ndarray) -> float:
        return simulator.run(to_maneuvers(x)).reward.total

    def batch_objective(samples: np.ndarray) -> np.ndarray:
        results = simulator.run_many([to_maneuvers(x) for x in samples])
        return np.array([r.reward.total for r in results])

    optimizer = CrossEntropyOptimizer(objective, lower, upper, sigma0, cfg, floor, project, batch_objective)
    outcome = optimizer.run(init.to_vector())

    maneuvers = to_maneuvers(outcome.best_x)
    result = simulator.run(maneuvers)
    best = ManeuverParam.from_vector(mode, timing, outcome.best_x, init.epoch)
    logger.debug(
        "%s: reward %.4f after %d evaluations (values=%s, epoch=%.5f)",
        algorithm, result.reward.total, outcome.n_evaluations, np.round(best.values, 4).tolist(), best.epoch,
    )
    return OptimizationResult(
        algorithm,
        maneuvers,
        result,
        maneuver_epoch=best.epoch,
        parameters=best.values,
        history=outcome.history,
        n_evaluations=outcome.n_evaluations + 1,
    )
