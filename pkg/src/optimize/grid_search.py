"""
Grid Search Maneuver Optimizers

in-track 기동 크기를 균등 격자에서 전수 탐색합니다.

    - grid_search_general: 첫 위험 근접 접근 반주기 전에 기동 1회
    - grid_search_baseline: 위험 근접 접근을 앞에서부터 하나씩 처리하는 반복 기동 (최대 5회)

동점이면 |s|가 작은 쪽을 고르므로 기동이 필요 없으면 s = 0 (기동 없음)이 됩니다.
"""

import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from src.env.simulator import Maneuver, SessionResult, SessionSimulator
from src.optimize.maneuver import (
    ManeuverMode,
    ManeuverParam,
    OptimizationResult,
    decode,
    first_dangerous_epoch,
    maneuver_epoch,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class GridSearchConfig:
    """
    격자 탐색 설정.

    Attributes:
        dv_max: 기동 크기 상한 (m/s)
        grid_points: 격자 점 수 (홀수, 0 포함 대칭 격자)
        periods_before: 반주기 기동 시각을 추가로 앞당길 주기 수
        max_restarts: baseline의 최대 기동 횟수
    """

    dv_max: float = 1.0
    grid_points: int = 201
    periods_before: int = 0
    max_restarts: int = 5

    def __post_init__(self):
        if not self.dv_max > 0:
            raise ValueError(f"dv_max는 양수여야 합니다: {self.dv_max}")
        if self.grid_points < 1 or self.grid_points % 2 == 0:
            raise ValueError(f"grid_points는 양의 홀수여야 합니다: {self.grid_points}")
        if self.periods_before < 0 or self.max_restarts < 1:
            raise ValueError("periods_before >= 0, max_restarts >= 1 이어야 합니다")

    def grid(self) -> np.ndarray:
        """-dv_max ... dv_max 균등 격자 (0 포함)."""
        half = self.grid_points // 2
        if half == 0:
            return np.zeros(1)
        return self.dv_max * np.arange(-half, half + 1) / half


def search_in_track(
    simulator: SessionSimulator,
    epoch: float,
    cfg: GridSearchConfig = GridSearchConfig(),
    prior_maneuvers: Sequence[Maneuver] = (),
    limit: Optional[float] = None,
) -> Tuple[float, Optional[Maneuver], SessionResult, int]:
    """
    기동 시각 epoch에서 in-track 크기 s를 격자 탐색합니다.

    Args:
        simulator: 세션 시뮬레이터
        epoch: 기동 시각
        cfg: 격자 설정
        prior_maneuvers: 이미 확정된 기동 (궤적/연료에 포함)
        limit: |s| 상한 (남은 연료), 없으면 dv_max

    Returns:
        (최적 s, 최적 기동 또는 None, 세션 결과, 실행 횟수)
    """
    limit = cfg.dv_max if limit is None else limit
    grid = cfg.grid()
    grid = grid[np.abs(grid) <= limit * (1.0 + 1e-12)]
    # |s| 오름차순: 동점이면 작은 기동이 이김
    order = sorted(grid, key=lambda s: (abs(s), s))

    candidates: List[Optional[Maneuver]] = []
    for s in order:
        param = ManeuverParam(ManeuverMode.IN_TRACK, [s], epoch)
        candidates.append(None if s == 0.0 else decode(param, simulator, cfg.dv_max, prior_maneuvers))
    results = simulator.run_many([[*prior_maneuvers, *([m] if m is not None else [])] for m in candidates])

    best: Optional[Tuple[float, Optional[Maneuver], SessionResult]] = None
    for s, maneuver, result in zip(order, candidates, results):
        if best is None or result.reward.total > best[2].reward.total:
            best = (float(s), maneuver, result)

    return best[0], best[1], best[2], len(order)


def grid_search_general(
    simulator: SessionSimulator, cfg: GridSearchConfig = GridSearchConfig()
) -> OptimizationResult:
    """
    첫 위험 근접 접근 TCA - (periods_before + 1/2) T 시각에 in-track 기동 1회.

    위험 근접 접근이 없거나 최적 s가 0이면 기동 없음.
    """
    nominal = simulator.nominal_result
    tca = first_dangerous_epoch(nominal)
    if tca is None:
        return OptimizationResult("gs", [], nominal, n_evaluations=1)

    epoch = maneuver_epoch(tca, simulator.protected_period, cfg.periods_before, simulator.situation.start)
    s, maneuver, result, n = search_in_track(simulator, epoch, cfg)
    logger.debug("gs: epoch %.5f, s=%.3f, reward %.4f", epoch, s, result.reward.total)

    maneuvers = [maneuver] if maneuver is not None else []
    return OptimizationResult(
        "gs", maneuvers, result, maneuver_epoch=epoch, parameters=np.array([s]), n_evaluations=n + 1
    )


def grid_search_baseline(
    simulator: SessionSimulator, cfg: GridSearchConfig = GridSearchConfig()
) -> OptimizationResult:
    """
    위험 근접 접근을 시간순으로 하나씩 처리하는 반복 격자 탐색.

    매 반복에서 이전 대상보다 늦은 첫 위험 근접 접근을 골라 반주기 전에
    in-track 기동을 탐색합니다. 남은 연료(dv_max - 사용량)가 크기 상한이 됩니다.
    max_restarts번 반복하거나 더 처리할 위험이 없으면 끝납니다.
    """
    result = simulator.nominal_result
    maneuvers: List[Maneuver] = []
    fuel_used = 0.0
    last_target = -np.inf
    first_epoch: Optional[float] = None
    n_evaluations = 1

    for _ in range(cfg.max_restarts):
        last_maneuver = maneuvers[-1].epoch if maneuvers else simulator.situation.start
        target = None
        for c in sorted(result.dangerous, key=lambda c: c.epoch):
            if c.epoch <= last_target + simulator.screener.pass_separation:
                continue
            epoch = maneuver_epoch(c.epoch, simulator.protected_period, cfg.periods_before, simulator.situation.start)
            if last_maneuver <= epoch < c.epoch:
                target = (c, epoch)
                break
        if target is None:
            break

        budget = cfg.dv_max - fuel_used
        if budget <= 0:
            break

        conjunction, epoch = target
        first_epoch = epoch if first_epoch is None else first_epoch
        last_target = conjunction.epoch

        s, maneuver, candidate, n = search_in_track(simulator, epoch, cfg, maneuvers, limit=budget)
        n_evaluations += n
        logger.debug("baseline: target %s @ %.5f, s=%.3f", conjunction.debris_name, conjunction.epoch, s)
        if maneuver is None:
            continue

        maneuvers.append(maneuver)
        fuel_used += abs(s)
        result = candidate

    return OptimizationResult(
        "baseline", maneuvers, result, maneuver_epoch=first_epoch, n_evaluations=n_evaluations
    )
