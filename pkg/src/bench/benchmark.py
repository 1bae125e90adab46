"""
Benchmark Harness

상황 집합 x 알고리즘 목록을 모두 실행하고 메트릭 표를 계산합니다.

    - 셀(상황, 알고리즘)은 정확히 한 번 실행되며, 실패한 셀은 경고 로그 후 None으로 기록
    - 셀마다 SessionSimulator를 새로 만들어 실행 (셀은 서로 독립이라 실행 순서와 무관한 결과)
    - benchmark.workers가 1이 아니면 셀을 프로세스 풀로 나눠 실행 (0은 CPU 수)
    - out_dir를 주면 셀별 결과 JSON과 실행 설정을 저장
"""

import logging
import multiprocessing
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

from tqdm import tqdm

from src.common.metrics import MetricsRow, compute_metrics
from src.common.situation_io import session_result_to_dict, write_json
from src.env.simulator import DangerousSituation, SessionResult
from src.optimize.maneuver import OptimizationResult
from src.optimize.pipeline import ALGORITHMS, solve
from src.utils.config import RunConfig

logger = logging.getLogger(__name__)


@dataclass
class BenchmarkResult:
    """
    벤치마크 결과.

    Attributes:
        matrix: 상황 이름 -> 알고리즘 id -> SessionResult (실패는 None)
        rows: 알고리즘별 메트릭
        outcomes: 상황 이름 -> 알고리즘 id -> OptimizationResult (실패는 없음)
        errors: (상황 이름, 알고리즘 id) -> 에러 메시지
    """

    matrix: Dict[str, Dict[str, Optional[SessionResult]]]
    rows: List[MetricsRow]
    outcomes: Dict[str, Dict[str, OptimizationResult]] = field(default_factory=dict)
    errors: Dict[tuple, str] = field(default_factory=dict)


def _cell_record(situation: str, outcome: OptimizationResult) -> dict:
    record = {
        "situation": situation,
        "algorithm": outcome.algorithm,
        "maneuver_epoch": outcome.maneuver_epoch,
        "n_evaluations": outcome.n_evaluations,
        "history": [float(h) for h in outcome.history],
    }
    record.update(session_result_to_dict(outcome.result))
    return record


def _solve_cell(task: Tuple[DangerousSituation, str, RunConfig]) -> Tuple[Optional[OptimizationResult], Optional[str]]:
    """셀 하나 실행. 실패하면 (None, 에러 메시지)."""
    situation, algorithm, run_cfg = task
    try:
        simulator = run_cfg.simulator(situation)
        return solve(algorithm, simulator, run_cfg.grid_search, run_cfg.cross_entropy), None
    except Exception as e:  # 셀 실패는 기록만 하고 계속
        return None, str(e)


def run_benchmark(
    situations: Sequence[DangerousSituation],
    algorithms: Sequence[str] = ALGORITHMS,
    run_cfg: RunConfig = RunConfig(),
    out_dir: Optional[Union[str, Path]] = None,
    progress: bool = True,
) -> BenchmarkResult:
    """
    모든 (상황, 알고리즘) 셀을 실행하고 메트릭을 계산합니다.

    Args:
        situations: 위험 상황 목록 (이름이 서로 달라야 함)
        algorithms: 알고리즘 id 목록
        run_cfg: 실행 설정
        out_dir: 셀별 JSON 저장 디렉토리 (None이면 저장하지 않음)
        progress: tqdm 진행 표시

    Returns:
        BenchmarkResult

    Raises:
        ValueError: 빈 입력, 알 수 없는 알고리즘, 중복된 상황 이름
    """
    if not situations:
        raise ValueError("상황 목록이 비어 있습니다")
    if not algorithms:
        raise ValueError("알고리즘 목록이 비어 있습니다")
    unknown = [a for a in algorithms if a not in ALGORITHMS]
    if unknown:
        raise ValueError(f"알 수 없는 알고리즘: {unknown} (가능: {', '.join(ALGORITHMS)})")
    names = [s.name for s in situations]
    if len(set(names)) != len(names):
        raise ValueError("상황 이름이 중복되었습니다")

    out_dir = Path(out_dir) if out_dir is not None else None
    if out_dir is not None:
        write_json(run_cfg.to_dict(), out_dir / "config.json")

    matrix: Dict[str, Dict[str, Optional[SessionResult]]] = {}
    outcomes: Dict[str, Dict[str, OptimizationResult]] = {}
    errors: Dict[tuple, str] = {}

    tasks = [(s, a, run_cfg) for s in situations for a in algorithms]
    workers = min(run_cfg.benchmark.n_workers, len(tasks))
    if workers > 1:
        logger.info("benchmark: %d cells on %d workers", len(tasks), workers)
        with multiprocessing.Pool(workers) as pool:
            cells = list(
                tqdm(pool.imap(_solve_cell, tasks), total=len(tasks), desc="Benchmark", disable=not progress)
            )
    else:
        cells = [_solve_cell(task) for task in tqdm(tasks, desc="Benchmark", disable=not progress)]

    for (situation, algorithm, _), (outcome, error) in zip(tasks, cells):
        matrix.setdefault(situation.name, {})
        outcomes.setdefault(situation.name, {})
        if outcome is None:
            logger.warning("%s / %s failed: %s", situation.name, algorithm, error)
            matrix[situation.name][algorithm] = None
            errors[(situation.name, algorithm)] = error
            continue

        matrix[situation.name][algorithm] = outcome.result
        outcomes[situation.name][algorithm] = outcome
        logger.info("%s / %s: reward %.4f", situation.name, algorithm, outcome.reward)
        if out_dir is not None:
            write_json(_cell_record(situation.name, outcome), out_dir / "cells" / situation.name / f"{algorithm}.json")

    rows = compute_metrics(
        matrix,
        algorithms,
        reward_cfg=run_cfg.reward,
        top_fraction=run_cfg.benchmark.top_fraction,
        relative_top=run_cfg.benchmark.relative_top,
    )
    return BenchmarkResult(matrix=matrix, rows=rows, outcomes=outcomes, errors=errors)
