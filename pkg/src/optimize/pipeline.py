"""
Algorithm Pipeline

알고리즘 id로 최적화기를 골라 실행합니다.

    baseline               반복 격자 탐색 (위험 근접 접근마다 in-track 기동)
    gs                     격자 탐색 1회
    gs-ce                  격자 탐색 결과를 초기값으로 in-plane CE
    ce-<mode>-half         첫 위험 반주기 전 고정 시각, 모드별 CE
    ce-<mode>-auto         기동 시각까지 탐색하는 CE
"""

import logging
from typing import Dict, Tuple

import numpy as np

from src.env.simulator import SessionSimulator
from src.optimize.cross_entropy import CrossEntropyConfig, cross_entropy
from src.optimize.grid_search import GridSearchConfig, grid_search_baseline, grid_search_general
from src.optimize.maneuver import (
    ManeuverMode,
    ManeuverParam,
    OptimizationResult,
    Timing,
    auto_timing_bounds,
    first_dangerous_epoch,
    maneuver_epoch,
)

CE_VARIANTS: Dict[str, Tuple[ManeuverMode, Timing]] = {
    "ce-in-track-half": (ManeuverMode.IN_TRACK, Timing.FIXED),
    "ce-in-plane-half": (ManeuverMode.IN_PLANE, Timing.FIXED),
    "ce-out-of-plane-half": (ManeuverMode.OUT_OF_PLANE, Timing.FIXED),
    "ce-in-track-auto": (ManeuverMode.IN_TRACK, Timing.AUTO),
    "ce-in-plane-auto": (ManeuverMode.IN_PLANE, Timing.AUTO),
    "ce-out-of-plane-auto": (ManeuverMode.OUT_OF_PLANE, Timing.AUTO),
}

ALGORITHMS = ("baseline", "gs", "gs-ce") + tuple(CE_VARIANTS)

logger = logging.getLogger(__name__)


def gs_ce(
    simulator: SessionSimulator,
    gs_cfg: GridSearchConfig = GridSearchConfig(),
    ce_cfg: CrossEntropyConfig = CrossEntropyConfig(),
) -> OptimizationResult:
    """
    격자 탐색 -> in-plane CE 정제.

    CE 초기값은 격자 탐색의 (s, 0) at 같은 기동 시각이므로 결과 보상은 격자 탐색 이상입니다.
    """
    gs = grid_search_general(simulator, gs_cfg)
    if gs.maneuver_epoch is None:
        gs.algorithm = "gs-ce"
        return gs

    s = float(gs.parameters[0]) if gs.maneuvers else 0.0
    init = ManeuverParam(ManeuverMode.IN_PLANE, [s, 0.0], gs.maneuver_epoch, Timing.FIXED)

    refined = cross_entropy(simulator, init, ce_cfg, gs_cfg.dv_max, algorithm="gs-ce")
    refined.n_evaluations += gs.n_evaluations
    return refined


def run_ce_variant(
    algorithm: str,
    simulator: SessionSimulator,
    gs_cfg: GridSearchConfig = GridSearchConfig(),
    ce_cfg: CrossEntropyConfig = CrossEntropyConfig(),
) -> OptimizationResult:
    """ce-<mode>-<half|auto> 변형을 실행합니다. 초기값은 반주기 시각의 0 기동."""
    mode, timing = CE_VARIANTS[algorithm]
    nominal = simulator.nominal_result
    tca = first_dangerous_epoch(nominal)
    if tca is None:
        return OptimizationResult(algorithm, [], nominal, n_evaluations=1)

    epoch = maneuver_epoch(tca, simulator.protected_period, gs_cfg.periods_before, simulator.situation.start)
    if timing is Timing.AUTO:
        epoch = float(np.clip(epoch, *auto_timing_bounds(simulator)))

    init = ManeuverParam(mode, np.zeros(mode.n_values), epoch, timing)
    return cross_entropy(simulator, init, ce_cfg, gs_cfg.dv_max, algorithm=algorithm)


def solve(
    algorithm: str,
    simulator: SessionSimulator,
    gs_cfg: GridSearchConfig = GridSearchConfig(),
    ce_cfg: CrossEntropyConfig = CrossEntropyConfig(),
) -> OptimizationResult:
    """
    알고리즘 id로 최적화를 실행합니다.

    Raises:
        ValueError: 알 수 없는 알고리즘 id
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"알 수 없는 알고리즘: {algorithm} (가능: {', '.join(ALGORITHMS)})")

    logger.info("%s: solving %s", algorithm, simulator.situation.name)
    if algorithm == "baseline":
        result = grid_search_baseline(simulator, gs_cfg)
    elif algorithm == "gs":
        result = grid_search_general(simulator, gs_cfg)
    elif algorithm == "gs-ce":
        result = gs_ce(simulator, gs_cfg, ce_cfg)
    else:
        result = run_ce_variant(algorithm, simulator, gs_cfg, ce_cfg)

    logger.info(
        "%s: %s done, reward %.4f, %d maneuver(s), %d sessions",
        algorithm, simulator.situation.name, result.reward, len(result.maneuvers), result.n_evaluations,
    )
    return result
