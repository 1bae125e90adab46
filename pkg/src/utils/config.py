"""
Run Configuration

실험 설정(보상, 확률 모델, 스크리닝, 최적화기, 생성기, 벤치마크, seed)을 한 문서로 관리합니다.

설정 파일은 JSON 문서이며 (YAML도 허용), 알 수 없는 키는 오류입니다.
경로를 주지 않으면 환경변수 CAM_LAB_CONFIG (.env 파일 포함)를 사용하고,
그것도 없으면 기본값을 씁니다.
"""

import os
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Dict, Optional, Union

import yaml
from dotenv import load_dotenv

from src.common.conjunction import DEFAULT_SCREEN_DISTANCE, ProbabilityModel
from src.common.reward import RewardConfig
from src.env.generator import GeneratorConfig
from src.env.simulator import DangerousSituation, SessionSimulator
from src.optimize.cross_entropy import CrossEntropyConfig
from src.optimize.grid_search import GridSearchConfig

CONFIG_ENV_VAR = "CAM_LAB_CONFIG"


@dataclass(frozen=True)
class ScreeningConfig:
    """
    근접 접근 스크리닝 설정.

    Attributes:
        screen_distance: 스크린 거리 (m)
        danger_threshold: 위험 판정 임계값 (None이면 reward.collision_probability)
    """

    screen_distance: float = DEFAULT_SCREEN_DISTANCE
    danger_threshold: Optional[float] = None

    def __post_init__(self):
        if not self.screen_distance > 0:
            raise ValueError(f"screen_distance는 양수여야 합니다: {self.screen_distance}")


@dataclass(frozen=True)
class BenchmarkConfig:
    """
    벤치마크 설정.

    Attributes:
        top_fraction: top10 기준 (최고 보상과의 차이 비율)
        relative_top: True면 |최고 보상| 대비 비율, False면 절대 차이
        workers: (상황, 알고리즘) 셀을 나눠 실행할 프로세스 수 (0이면 CPU 수)
    """

    top_fraction: float = 0.1
    relative_top: bool = True
    workers: int = 1

    def __post_init__(self):
        if self.top_fraction < 0:
            raise ValueError(f"top_fraction은 음수일 수 없습니다: {self.top_fraction}")
        if self.workers < 0:
            raise ValueError(f"workers는 음수일 수 없습니다: {self.workers}")

    @property
    def n_workers(self) -> int:
        return self.workers or os.cpu_count() or 1


_SECTIONS = {
    "reward": RewardConfig,
    "probability": ProbabilityModel,
    "screening": ScreeningConfig,
    "grid_search": GridSearchConfig,
    "cross_entropy": CrossEntropyConfig,
    "generator": GeneratorConfig,
    "benchmark": BenchmarkConfig,
}


@dataclass(frozen=True)
class RunConfig:
    """전체 실행 설정."""

    reward: RewardConfig = field(default_factory=RewardConfig)
    probability: ProbabilityModel = field(default_factory=ProbabilityModel)
    screening: ScreeningConfig = field(default_factory=ScreeningConfig)
    grid_search: GridSearchConfig = field(default_factory=GridSearchConfig)
    cross_entropy: CrossEntropyConfig = field(default_factory=CrossEntropyConfig)
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    benchmark: BenchmarkConfig = field(default_factory=BenchmarkConfig)
    seed: int = 0
    output_dir: str = "outputs"

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]]) -> "RunConfig":
        """
        설정 객체를 만듭니다. 빠진 키는 기본값, 알 수 없는 키는 ValueError.

        Example:
            >>> cfg = RunConfig.from_dict({"reward": {"fuel": 2.0}, "seed": 3})
            >>> cfg.reward.fuel, cfg.seed
            (2.0, 3)
        """
        data = {} if data is None else data
        _reject_unknown(data, cls, "config")

        kwargs = {}
        for name, value in data.items():
            section = _SECTIONS.get(name)
            if section is None:
                kwargs[name] = value
                continue
            _reject_unknown(value, section, name)
            kwargs[name] = section(**value)
        return cls(**kwargs)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def with_seed(self, seed: int) -> "RunConfig":
        """seed를 바꾸고 CE/생성기 seed도 같이 맞춥니다."""
        return replace(
            self,
            seed=seed,
            cross_entropy=replace(self.cross_entropy, rng_seed=seed),
            generator=replace(self.generator, rng_seed=seed),
        )

    def simulator(self, situation: DangerousSituation) -> SessionSimulator:
        """이 설정으로 상황의 세션 시뮬레이터를 만듭니다."""
        return SessionSimulator(
            situation,
            reward_cfg=self.reward,
            model=self.probability,
            screen_distance=self.screening.screen_distance,
            danger_threshold=self.screening.danger_threshold,
        )


def _reject_unknown(data: Any, cls: type, where: str) -> None:
    if not isinstance(data, dict):
        raise ValueError(f"{where}: 객체(dict)가 필요합니다, 받은 값: {data!r}")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ValueError(f"{where}: 알 수 없는 설정 키 {unknown}")


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """
    설정 파일을 읽습니다.

    Args:
        path: 설정 파일 경로. None이면 CAM_LAB_CONFIG 환경변수, 그것도 없으면 기본값

    Returns:
        RunConfig

    Raises:
        IOError: 파일 읽기 실패
        ValueError: 형식 오류 또는 알 수 없는 키
    """
    if path is None:
        load_dotenv()
        path = os.environ.get(CONFIG_ENV_VAR) or None
    if path is None:
        return RunConfig()

    try:
        with open(path, "r", encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as e:
        raise ValueError(f"설정 파일 형식이 잘못되었습니다: {path}\n에러: {e}")
    except OSError as e:
        raise IOError(f"설정 파일을 읽을 수 없습니다: {path}\n에러: {e}")

    return RunConfig.from_dict(data)
