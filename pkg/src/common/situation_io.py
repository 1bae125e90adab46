"""
Situation / Maneuver / Result file I/O.

위험 상황, 기동 목록, 세션 결과, 근접 접근 표를 JSON/CSV로 읽고 씁니다.
필드 이름은 고정 스키마이며, 쓰고 다시 읽으면 같은 값이 됩니다.

Situation JSON:
    {"window": {"start", "end"},
     "protected": {"name", "a", "e", "i", "raan", "argp", "mean_anomaly", "epoch", "radius", "pos_sigma"},
     "debris": [같은 형태의 객체들]}
Maneuver JSON:
    [{"dvx", "dvy", "dvz", "epoch"}, ...]
"""

import json
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

import pandas as pd

from src.common.conjunction import Conjunction
from src.common.orbit import OrbitalElements
from src.env.simulator import DangerousSituation, Maneuver, SessionResult, SpaceObject

PathLike = Union[str, Path]

OBJECT_FIELDS = ("name", "a", "e", "i", "raan", "argp", "mean_anomaly", "epoch", "radius", "pos_sigma")
MANEUVER_FIELDS = ("dvx", "dvy", "dvz", "epoch")
CONJUNCTION_COLUMNS = (
    "debris name",
    "miss distance (m)",
    "epoch (mjd2000)",
    "collision probability",
    "collision danger",
)


def _check_keys(record: Dict[str, Any], expected: Sequence[str], what: str) -> None:
    if not isinstance(record, dict):
        raise ValueError(f"{what}: 객체(dict)가 필요합니다, 받은 값: {type(record).__name__}")
    missing = [k for k in expected if k not in record]
    unknown = [k for k in record if k not in expected]
    if missing or unknown:
        raise ValueError(f"{what}: 누락된 필드 {missing}, 알 수 없는 필드 {unknown}")


def space_object_to_dict(obj: SpaceObject) -> Dict[str, Any]:
    record = {"name": obj.name}
    record.update({k: v for k, v in obj.elements.as_dict().items()})
    record["radius"] = obj.radius
    record["pos_sigma"] = obj.pos_sigma
    return record


def space_object_from_dict(record: Dict[str, Any]) -> SpaceObject:
    _check_keys(record, OBJECT_FIELDS, f"object {record.get('name', '?') if isinstance(record, dict) else '?'}")
    elements = OrbitalElements(
        a=float(record["a"]),
        e=float(record["e"]),
        i=float(record["i"]),
        raan=float(record["raan"]),
        argp=float(record["argp"]),
        mean_anomaly=float(record["mean_anomaly"]),
        epoch=float(record["epoch"]),
    )
    pos_sigma = record["pos_sigma"]
    return SpaceObject(
        name=str(record["name"]),
        elements=elements,
        radius=float(record["radius"]),
        pos_sigma=None if pos_sigma is None else float(pos_sigma),
    )


def situation_to_dict(situation: DangerousSituation) -> Dict[str, Any]:
    return {
        "window": {"start": situation.start, "end": situation.end},
        "protected": space_object_to_dict(situation.protected),
        "debris": [space_object_to_dict(d) for d in situation.debris],
    }


def situation_from_dict(data: Dict[str, Any], name: str = "situation") -> DangerousSituation:
    """
    Situation JSON 객체에서 DangerousSituation을 만듭니다.

    Raises:
        ValueError: 필드 누락/추가, 잘못된 값
    """
    _check_keys(data, ("window", "protected", "debris"), "situation")
    _check_keys(data["window"], ("start", "end"), "window")
    if not isinstance(data["debris"], list):
        raise ValueError("debris는 목록이어야 합니다")

    return DangerousSituation(
        protected=space_object_from_dict(data["protected"]),
        debris=tuple(space_object_from_dict(d) for d in data["debris"]),
        window=(float(data["window"]["start"]), float(data["window"]["end"])),
        name=name,
    )


def _read_json(path: PathLike) -> Any:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise ValueError(f"JSON 형식이 잘못되었습니다: {path}\n에러: {e}")
    except OSError as e:
        raise IOError(f"파일을 읽을 수 없습니다: {path}\n에러: {e}")


def write_json(data: Any, path: PathLike) -> None:
    """들여쓰기 2칸 JSON으로 저장합니다 (같은 입력이면 같은 바이트)."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            f.write(json.dumps(data, indent=2, ensure_ascii=False) + "\n")
    except OSError as e:
        raise IOError(f"파일을 저장할 수 없습니다: {path}\n에러: {e}")


def load_situation(path: PathLike) -> DangerousSituation:
    """
    Situation JSON 파일을 읽습니다. 상황 이름은 파일 이름(확장자 제외).

    Raises:
        IOError: 파일 읽기 실패
        ValueError: JSON/스키마 오류

    Example:
        >>> situation = load_situation("situations/situation_0.json")
        >>> print(len(situation.debris))
        10
    """
    return situation_from_dict(_read_json(path), name=Path(path).stem)


def save_situation(situation: DangerousSituation, path: PathLike) -> None:
    write_json(situation_to_dict(situation), path)


def maneuvers_to_list(maneuvers: Sequence[Maneuver]) -> List[Dict[str, float]]:
    return [
        {"dvx": float(m.dv[0]), "dvy": float(m.dv[1]), "dvz": float(m.dv[2]), "epoch": m.epoch}
        for m in maneuvers
    ]


def maneuvers_from_list(records: List[Dict[str, Any]]) -> List[Maneuver]:
    if not isinstance(records, list):
        raise ValueError("기동 JSON은 목록이어야 합니다")
    maneuvers = []
    for n, record in enumerate(records):
        _check_keys(record, MANEUVER_FIELDS, f"maneuver {n}")
        maneuvers.append(
            Maneuver([float(record["dvx"]), float(record["dvy"]), float(record["dvz"])], float(record["epoch"]))
        )
    return maneuvers


def load_maneuvers(path: PathLike) -> List[Maneuver]:
    return maneuvers_from_list(_read_json(path))


def save_maneuvers(maneuvers: Sequence[Maneuver], path: PathLike) -> None:
    write_json(maneuvers_to_list(maneuvers), path)


def conjunctions_to_records(conjunctions: Sequence[Conjunction]) -> List[Dict[str, Any]]:
    return [c.to_row() for c in conjunctions]


def conjunctions_from_records(records: List[Dict[str, Any]]) -> List[Conjunction]:
    """근접 접근 표 레코드(다섯 열)를 Conjunction 목록으로 읽습니다."""
    if not isinstance(records, list):
        raise ValueError("근접 접근 표는 목록이어야 합니다")
    conjunctions = []
    for n, record in enumerate(records):
        _check_keys(record, CONJUNCTION_COLUMNS, f"conjunction {n}")
        conjunctions.append(
            Conjunction(
                debris_name=str(record["debris name"]),
                miss_distance=float(record["miss distance (m)"]),
                epoch=float(record["epoch (mjd2000)"]),
                probability=float(record["collision probability"]),
                danger=bool(record["collision danger"]),
            )
        )
    return conjunctions


def conjunctions_to_frame(conjunctions: Sequence[Conjunction]) -> pd.DataFrame:
    """근접 접근 표 (다섯 열 고정)."""
    return pd.DataFrame(conjunctions_to_records(conjunctions), columns=list(CONJUNCTION_COLUMNS))


def save_conjunctions(conjunctions: Sequence[Conjunction], path: PathLike, fmt: Optional[str] = None) -> None:
    """
    근접 접근 표를 저장합니다.

    Args:
        conjunctions: 근접 접근 목록
        path: 저장 경로
        fmt: 'json' 또는 'csv' (None이면 확장자로 판단, 기본 json)
    """
    fmt = (fmt or Path(path).suffix.lstrip(".") or "json").lower()
    if fmt == "json":
        write_json(conjunctions_to_records(conjunctions), path)
    elif fmt == "csv":
        try:
            Path(path).parent.mkdir(parents=True, exist_ok=True)
            conjunctions_to_frame(conjunctions).to_csv(path, index=False)
        except OSError as e:
            raise IOError(f"파일을 저장할 수 없습니다: {path}\n에러: {e}")
    else:
        raise ValueError(f"지원하지 않는 형식: {fmt} (json, csv)")


def session_result_to_dict(result: SessionResult) -> Dict[str, Any]:
    """SessionResult를 JSON 객체로 변환합니다."""
    return {
        "maneuvers": maneuvers_to_list(result.maneuvers),
        "total_probability": result.total_probability,
        "fuel": result.fuel,
        "deviations": result.deviations.as_dict(),
        "reward": {"total": result.reward.total, "components": dict(result.reward.components)},
        "conjunctions": conjunctions_to_records(result.conjunctions),
    }
