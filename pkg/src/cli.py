"""
cam-lab 명령줄 도구

    cam-lab generate      --count N --out DIR [--debris K]
    cam-lab solve         --situation F --algorithm ID --out F2 [--workers W]
    cam-lab conjunctions  --situation F [--maneuvers M] [--out F.json|F.csv]
    cam-lab evaluate      --situations DIR [--algorithms a,b,...] --out CSV [--report] [--plot PNG] [--workers W]
    cam-lab reward-curve  --threshold T [--max V] [--out CSV] [--plot PNG]
    cam-lab golden        --out F

공통 옵션: --config C, --seed S, --log-level LEVEL, --no-progress
종료 코드: 0 성공, 1 도메인 오류, 2 입력 오류
"""

import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, List, Optional

import numpy as np
import pandas as pd

from src.bench.benchmark import run_benchmark
from src.common.metrics import generate_evaluation_report, plot_metrics, plot_reward_curve, save_metrics_csv
from src.common.reward import component_reward
from src.common.situation_io import (
    conjunctions_to_records,
    load_maneuvers,
    load_situation,
    save_conjunctions,
    save_maneuvers,
    save_situation,
    session_result_to_dict,
    write_json,
)
from src.env.generator import generate_situations
from src.fixtures.golden import export_golden_situation
from src.optimize.pipeline import ALGORITHMS, solve
from src.utils.config import RunConfig, load_config
from src.utils.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_DOMAIN_ERROR = 1
EXIT_INPUT_ERROR = 2


class InputError(Exception):
    """잘못된 입력 파일/인자 (종료 코드 2)."""


def _load(fn: Callable[..., Any], *args: Any, **kwargs: Any) -> Any:
    try:
        return fn(*args, **kwargs)
    except (OSError, ValueError, TypeError) as e:
        raise InputError(str(e)) from e


def _config(args: argparse.Namespace) -> RunConfig:
    cfg = _load(load_config, args.config)
    if args.seed is not None:
        cfg = cfg.with_seed(args.seed)
    return cfg


def _algorithm(name: str) -> str:
    if name not in ALGORITHMS:
        raise InputError(f"알 수 없는 알고리즘: {name} (가능: {', '.join(ALGORITHMS)})")
    return name


# 명령

def cmd_generate(args: argparse.Namespace) -> int:
    if args.count < 0:
        raise InputError(f"--count는 음수일 수 없습니다: {args.count}")
    cfg = _config(args)
    generator_cfg = cfg.generator
    if args.debris is not None:
        generator_cfg = _load(replace, generator_cfg, n_debris=args.debris)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    situations = generate_situations(generator_cfg, args.count, progress=not args.no_progress)
    for situation in situations:
        save_situation(situation, out / f"{situation.name}.json")

    print(f"상황 {len(situations)}개 저장 완료: {out}")
    return EXIT_OK


def cmd_solve(args: argparse.Namespace) -> int:
    cfg = _config(args)
    algorithm = _algorithm(args.algorithm)
    situation = _load(load_situation, args.situation)

    if args.workers < 0:
        raise InputError(f"--workers는 음수일 수 없습니다: {args.workers}")

    simulator = cfg.simulator(situation)
    before = simulator.nominal_result
    with simulator.parallel(args.workers or os.cpu_count() or 1):
        outcome = solve(algorithm, simulator, cfg.grid_search, cfg.cross_entropy)

    after = session_result_to_dict(outcome.result)
    report = {
        "situation": situation.name,
        "algorithm": algorithm,
        "maneuver_epoch": outcome.maneuver_epoch,
        "n_evaluations": outcome.n_evaluations,
        "maneuvers": after["maneuvers"],
        "reward": after["reward"],
        "total_probability": after["total_probability"],
        "fuel": after["fuel"],
        "deviations": after["deviations"],
        "conjunctions_before": conjunctions_to_records(before.conjunctions),
        "conjunctions_after": after["conjunctions"],
    }

    out = Path(args.out)
    write_json(report, out)
    save_maneuvers(outcome.maneuvers, out.with_name(f"{out.stem}_maneuvers.json"))
    print(f"{algorithm}: 보상 {outcome.reward:.4f}, 기동 {len(outcome.maneuvers)}개, 저장 완료: {out}")
    return EXIT_OK


def cmd_conjunctions(args: argparse.Namespace) -> int:
    cfg = _config(args)
    situation = _load(load_situation, args.situation)
    maneuvers = _load(load_maneuvers, args.maneuvers) if args.maneuvers else []

    result = cfg.simulator(situation).run(maneuvers)
    if args.out:
        save_conjunctions(result.conjunctions, args.out, args.format)
        print(f"근접 접근 {len(result.conjunctions)}건 (위험 {len(result.dangerous)}건), 저장 완료: {args.out}")
    else:
        print(json.dumps(conjunctions_to_records(result.conjunctions), indent=2, ensure_ascii=False))
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    cfg = _config(args)
    directory = Path(args.situations)
    if not directory.is_dir():
        raise InputError(f"상황 디렉토리가 없습니다: {directory}")
    files = sorted(directory.glob("*.json"))
    if not files:
        raise InputError(f"상황 파일이 없습니다: {directory}")

    algorithms = [_algorithm(a.strip()) for a in args.algorithms.split(",") if a.strip()]
    if not algorithms:
        raise InputError("--algorithms가 비어 있습니다")
    situations = [_load(load_situation, f) for f in files]
    if args.workers is not None:
        cfg = replace(cfg, benchmark=_load(replace, cfg.benchmark, workers=args.workers))

    out = Path(args.out)
    result = run_benchmark(
        situations,
        algorithms,
        cfg,
        out_dir=out.with_name(f"{out.stem}_cells"),
        progress=not args.no_progress,
    )
    save_metrics_csv(result.rows, out)

    if args.report:
        print(generate_evaluation_report(result.rows, result.matrix))
    if args.plot:
        plot_metrics(result.rows, save_path=args.plot)
    if result.errors:
        print(f"실패한 셀 {len(result.errors)}개", file=sys.stderr)
    print(f"상황 {len(situations)}개 x 알고리즘 {len(algorithms)}개 평가 완료: {out}")
    return EXIT_OK


def reward_curve(threshold: float, max_value: Optional[float] = None, points: int = 201) -> pd.DataFrame:
    """
    성분 패널티 곡선 샘플 (임계값 지점 포함).

    Raises:
        ValueError: threshold <= 0, max_value <= 0, points < 2
    """
    if not threshold > 0:
        raise ValueError(f"임계값은 양수여야 합니다: {threshold}")
    max_value = 2.0 * threshold if max_value is None else max_value
    if not max_value > 0 or points < 2:
        raise ValueError(f"잘못된 범위: max={max_value}, points={points}")

    values = np.linspace(0.0, max_value, points)
    if threshold <= max_value:
        values = np.union1d(values, [threshold])
    return pd.DataFrame({"value": values, "reward": component_reward(values, threshold)})


def cmd_reward_curve(args: argparse.Namespace) -> int:
    curve = _load(reward_curve, args.threshold, args.max, args.points)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        curve.to_csv(args.out, index=False)
        print(f"보상 곡선 저장 완료: {args.out}")
    else:
        print(curve.to_csv(index=False), end="")
    if args.plot:
        plot_reward_curve(curve["value"].to_numpy(), curve["reward"].to_numpy(), args.threshold, save_path=args.plot)
    return EXIT_OK


def cmd_golden(args: argparse.Namespace) -> int:
    situation = export_golden_situation(args.out)
    print(f"기준 상황 저장 완료 (파편 {len(situation.debris)}개): {args.out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="설정 파일 (JSON/YAML), 기본값: $CAM_LAB_CONFIG")
    common.add_argument("--seed", type=int, default=None, help="설정의 seed 덮어쓰기")
    common.add_argument("--log-level", default=None, help="DEBUG, INFO, WARNING (기본), ERROR")
    common.add_argument("--no-progress", action="store_true", help="진행 표시 끄기")

    parser = argparse.ArgumentParser(prog="cam-lab", description="Collision avoidance maneuver lab")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("generate", parents=[common], help="위험 상황 생성")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--out", required=True, help="출력 디렉토리")
    p.add_argument("--debris", type=int, default=None, help="상황당 파편 수")
    p.set_defaults(func=cmd_generate)

    p = commands.add_parser("solve", parents=[common], help="한 상황에 알고리즘 실행")
    p.add_argument("--situation", required=True)
    p.add_argument("--algorithm", required=True, help=", ".join(ALGORITHMS))
    p.add_argument("--out", required=True, help="결과 JSON")
    p.add_argument("--workers", type=int, default=1, help="세션 평가 프로세스 수 (0이면 CPU 수)")
    p.set_defaults(func=cmd_solve)

    p = commands.add_parser("conjunctions", parents=[common], help="근접 접근 표")
    p.add_argument("--situation", required=True)
    p.add_argument("--maneuvers", default=None, help="기동 JSON")
    p.add_argument("--out", default=None, help="출력 파일 (없으면 stdout JSON)")
    p.add_argument("--format", choices=["json", "csv"], default=None)
    p.set_defaults(func=cmd_conjunctions)

    p = commands.add_parser("evaluate", parents=[common], help="벤치마크 메트릭")
    p.add_argument("--situations", required=True, help="상황 JSON 디렉토리")
    p.add_argument("--algorithms", default=",".join(ALGORITHMS))
    p.add_argument("--out", required=True, help="메트릭 CSV")
    p.add_argument("--report", action="store_true", help="텍스트 리포트 출력")
    p.add_argument("--plot", default=None, help="메트릭 히트맵 PNG")
    p.add_argument("--workers", type=int, default=None, help="셀 실행 프로세스 수 (0이면 CPU 수, 기본은 설정값)")
    p.set_defaults(func=cmd_evaluate)

    p = commands.add_parser("reward-curve", parents=[common], help="보상 성분 곡선")
    p.add_argument("--threshold", type=float, required=True)
    p.add_argument("--max", type=float, default=None, help="최대 값 (기본 2 x threshold)")
    p.add_argument("--points", type=int, default=201)
    p.add_argument("--out", default=None, help="CSV (없으면 stdout)")
    p.add_argument("--plot", default=None, help="PNG")
    p.set_defaults(func=cmd_reward_curve)

    p = commands.add_parser("golden", parents=[common], help="기준 상황 내보내기")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_golden)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        setup_logging(args.log_level)
    except ValueError as e:
        print(f"입력 오류: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR

    try:
        return args.func(args)
    except InputError as e:
        print(f"입력 오류: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except OSError as e:
        print(f"파일 오류: {e}", file=sys.stderr)
        return EXIT_INPUT_ERROR
    except (ValueError, RuntimeError) as e:
        logger.debug("command failed", exc_info=True)
        print(f"오류: {e}", file=sys.stderr)
        return EXIT_DOMAIN_ERROR


if __name__ == "__main__":
    sys.exit(main())
