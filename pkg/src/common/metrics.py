"""
충돌 회피 알고리즘 평가 메트릭.

상황 x 알고리즘 결과 행렬에서 알고리즘별 성공률(%)을 계산하고,
CSV/텍스트 리포트/히트맵으로 정리합니다.

    top10         최고 알고리즘과의 보상 차이가 10% 이내
    leq_thr       모든 성분 값이 임계값 이하
    o/c baseline  baseline보다 보상이 큼 (strict)
    o/c GS        gs보다 보상이 큼 (strict)
    Pc<=1e-4 ...  전체 충돌확률이 기준 이하

실패한 셀(None)은 모든 메트릭을 만족하지 않는 것으로 셉니다.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Union

import matplotlib.pyplot as plt
import numpy as np
import pandas as pd
import seaborn as sns

from src.common.reward import RewardConfig, component_values
from src.env.simulator import SessionResult

# Seaborn 스타일 설정
sns.set_style("whitegrid")
plt.rcParams["font.size"] = 12

ResultMatrix = Mapping[str, Mapping[str, Optional[SessionResult]]]

PC_BOUNDS = (1e-4, 2e-4, 1e-3)
METRIC_COLUMNS = ("top10", "leq_thr", "o/c baseline", "o/c GS", "Pc<=1e-4", "Pc<=2e-4", "Pc<=1e-3")
MISSING = "-"


@dataclass(frozen=True)
class MetricsRow:
    """
    알고리즘 하나의 메트릭 (상황 집합에 대한 백분율, 0~100).

    overcome_* 값이 None이면 비교 대상이 자기 자신이거나 없음 ("-"로 출력).
    """

    algorithm: str
    top10_pct: float
    leq_thr_pct: float
    overcome_baseline_pct: Optional[float]
    overcome_gs_pct: Optional[float]
    pc_leq_1e4_pct: float
    pc_leq_2e4_pct: float
    pc_leq_1e3_pct: float

    def values(self) -> List[Optional[float]]:
        return [
            self.top10_pct,
            self.leq_thr_pct,
            self.overcome_baseline_pct,
            self.overcome_gs_pct,
            self.pc_leq_1e4_pct,
            self.pc_leq_2e4_pct,
            self.pc_leq_1e3_pct,
        ]

    def as_record(self) -> Dict[str, Union[str, float]]:
        record: Dict[str, Union[str, float]] = {"algorithm": self.algorithm}
        for column, value in zip(METRIC_COLUMNS, self.values()):
            record[column] = MISSING if value is None else round(value, 2)
        return record


def within_thresholds(result: SessionResult, cfg: RewardConfig = RewardConfig()) -> bool:
    """모든 패널티 성분 값이 임계값 이하인지 확인합니다."""
    values = component_values(result.total_probability, result.fuel, result.deviations.as_dict())
    return all(values[name] <= threshold for name, threshold in cfg.thresholds().items())


def _reward(result: Optional[SessionResult]) -> float:
    return -np.inf if result is None else result.reward.total


def _top_mask(rewards: np.ndarray, top_fraction: float, relative_top: bool) -> np.ndarray:
    finite = np.isfinite(rewards)
    if not finite.any():
        return np.zeros(len(rewards), dtype=bool)
    best = rewards[finite].max()
    margin = top_fraction * abs(best) if relative_top else top_fraction
    return finite & (rewards >= best - margin)


def compute_metrics(
    matrix: ResultMatrix,
    algorithms: Optional[Sequence[str]] = None,
    reward_cfg: RewardConfig = RewardConfig(),
    top_fraction: float = 0.1,
    relative_top: bool = True,
) -> List[MetricsRow]:
    """
    결과 행렬로 알고리즘별 메트릭을 계산합니다.

    Args:
        matrix: 상황 이름 -> 알고리즘 id -> SessionResult (실패한 셀은 None 또는 누락)
        algorithms: 출력 순서 (None이면 행렬에 나온 순서)
        reward_cfg: leq_thr 기준 임계값
        top_fraction: top10 기준 비율
        relative_top: True면 |최고 보상| 대비, False면 절대 차이

    Returns:
        알고리즘 순서대로 MetricsRow 목록

    Raises:
        ValueError: 상황이 하나도 없을 때

    Example:
        >>> rows = compute_metrics({"s0": {"gs": gs_result, "gs-ce": gs_ce_result}})
        >>> rows[1].overcome_gs_pct
        100.0
    """
    if not matrix:
        raise ValueError("결과 행렬이 비어 있습니다")

    if algorithms is None:
        algorithms = list(dict.fromkeys(a for cells in matrix.values() for a in cells))
    algorithms = list(algorithms)
    n = len(matrix)

    # 상황 x 알고리즘
    rewards = np.array([[_reward(cells.get(a)) for a in algorithms] for cells in matrix.values()])
    top = np.array([_top_mask(row, top_fraction, relative_top) for row in rewards])

    rows = []
    for k, algorithm in enumerate(algorithms):
        results = [cells.get(algorithm) for cells in matrix.values()]
        done = [r for r in results if r is not None]

        def pct(count: int) -> float:
            return 100.0 * count / n

        def overcome(reference: str) -> Optional[float]:
            if reference == algorithm or reference not in algorithms:
                return None
            j = algorithms.index(reference)
            return pct(int(np.sum(rewards[:, k] > rewards[:, j])))

        pc = [pct(sum(r.total_probability <= bound for r in done)) for bound in PC_BOUNDS]
        rows.append(
            MetricsRow(
                algorithm=algorithm,
                top10_pct=pct(int(top[:, k].sum())),
                leq_thr_pct=pct(sum(within_thresholds(r, reward_cfg) for r in done)),
                overcome_baseline_pct=overcome("baseline"),
                overcome_gs_pct=overcome("gs"),
                pc_leq_1e4_pct=pc[0],
                pc_leq_2e4_pct=pc[1],
                pc_leq_1e3_pct=pc[2],
            )
        )
    return rows


def metrics_frame(rows: Sequence[MetricsRow]) -> pd.DataFrame:
    return pd.DataFrame([row.as_record() for row in rows], columns=["algorithm", *METRIC_COLUMNS])


def results_frame(matrix: ResultMatrix) -> pd.DataFrame:
    """셀별 결과 표 (상황, 알고리즘, 보상, 연료, 충돌확률, 기동 수, 실패 여부)."""
    records = []
    for situation, cells in matrix.items():
        for algorithm, result in cells.items():
            records.append(
                {
                    "situation": situation,
                    "algorithm": algorithm,
                    "reward": np.nan if result is None else result.reward.total,
                    "fuel": np.nan if result is None else result.fuel,
                    "total_probability": np.nan if result is None else result.total_probability,
                    "n_maneuvers": 0 if result is None else len(result.maneuvers),
                    "failed": result is None,
                }
            )
    return pd.DataFrame(records)


def save_metrics_csv(rows: Sequence[MetricsRow], path: Union[str, Path]) -> None:
    """메트릭 표를 CSV로 저장합니다 (알고리즘당 한 행)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        metrics_frame(rows).to_csv(path, index=False)
    except OSError as e:
        raise IOError(f"CSV를 저장할 수 없습니다: {path}\n에러: {e}")


def generate_evaluation_report(rows: Sequence[MetricsRow], matrix: Optional[ResultMatrix] = None) -> str:
    """
    텍스트 평가 리포트를 생성합니다.

    Args:
        rows: compute_metrics 결과
        matrix: 결과 행렬 (주면 알고리즘별 평균 보상/연료/충돌확률도 출력)

    Returns:
        포맷팅된 리포트 문자열
    """
    lines = ["=" * 60, "충돌 회피 알고리즘 평가 리포트", "=" * 60, ""]
    lines.append("메트릭 (%):")
    lines.append("-" * 10)
    lines.append(metrics_frame(rows).to_string(index=False))

    if matrix:
        summary = (
            results_frame(matrix)
            .groupby("algorithm", sort=False)[["reward", "fuel", "total_probability", "failed"]]
            .agg({"reward": "mean", "fuel": "mean", "total_probability": "mean", "failed": "sum"})
        )
        lines += ["", "알고리즘별 평균:", "-" * 10, summary.to_string(float_format=lambda v: f"{v:.4g}")]

    lines += ["", "=" * 60]
    return "\n".join(lines)


def plot_metrics(rows: Sequence[MetricsRow], title: Optional[str] = None, save_path: Optional[str] = None) -> None:
    """
    메트릭 표를 히트맵으로 그립니다 ("-" 칸은 비워 둠).

    Args:
        rows: compute_metrics 결과
        title: 플롯 제목
        save_path: 저장 경로 (없으면 화면 표시)
    """
    data = np.array([[np.nan if v is None else v for v in row.values()] for row in rows], dtype=float)

    fig, ax = plt.subplots(figsize=(10, 1.0 + 0.6 * len(rows)))
    sns.heatmap(
        data,
        annot=True,
        fmt=".0f",
        cmap="Blues",
        vmin=0,
        vmax=100,
        cbar=True,
        xticklabels=list(METRIC_COLUMNS),
        yticklabels=[row.algorithm for row in rows],
        ax=ax,
    )
    ax.set_title(title or "Results (%)", fontsize=14, pad=20)
    plt.tight_layout()

    if save_path:
        fig.savefig(save_path, dpi=300, bbox_inches="tight")
        plt.close(fig)
        print(f"메트릭 히트맵이 {save_path}에 저장되었습니다")
    else:
        plt.show()


def plot_reward_curve(
    values: np.ndarray,
    penalties: np.ndarray,
    threshold: float,
    title: Optional[str] = None,
    save_path: Optional[str] = None,
) -> None:
    """
    성분 패널티 곡선을 그립니다 (임계값 위치 표시).

    Args:
        values: 성분 값
        penalties: component_reward(values, threshold)
        threshold: 임계값
        title: 플롯 제목
        save_path: 저장 경로 (없으면 화면 표시)
    """
    fig, ax = plt.subplots(figsize=(8, 6))
    ax.plot(values, penalties, "b-", linewidth=2, label="penalty")
    ax.axvline(threshold, color="r", linestyle="--", linewidth=1, label=f"threshold = {threshold:g}")

    ax.set_xlabel("value", fontsize=12)
    ax.set_ylabel("reward", fontsize=12)
    ax.set_title(title or f"Reward component, threshold = {threshold:g}", fontsize=14, pad=20)
    ax.legend(loc="lower left")
    plt.tight_layout()

    if save_path:
        fig.savefig(save_path, dpi=300, bbox_inches="tight")
        plt.close(fig)
        print(f"보상 곡선이 {save_path}에 저장되었습니다")
    else:
        plt.show()
