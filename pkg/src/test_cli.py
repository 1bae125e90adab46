"""
명령줄 도구 테스트
"""

import json

import pandas as pd
import pytest

from src.cli import main
from src.common.orbit import OrbitalElements
from src.common.situation_io import load_situation, save_maneuvers, save_situation
from src.env.generator import GeneratorConfig, generate_situation
from src.env.simulator import DangerousSituation, SessionSimulator, SpaceObject
from src.optimize.maneuver import ManeuverMode, ManeuverParam, decode, first_dangerous_epoch, maneuver_epoch

GOLDEN_PROFILE = {
    "screening": {"screen_distance": 500000.0, "danger_threshold": 1e-12},
    "probability": {"sigma_protected": 5000.0, "sigma_debris": 5000.0},
}
SMALL = {
    "grid_search": {"grid_points": 21},
    "cross_entropy": {"population": 8, "elite_fraction": 0.25, "iterations": 2, "restarts": 1},
}


def _write(path, data):
    path.write_text(json.dumps(data))
    return str(path)


@pytest.fixture
def empty_situation(tmp_path):
    el = OrbitalElements(7e6, 0.001, 0.5, 0.0, 0.0, 0.0, 6600.0)
    situation = DangerousSituation(SpaceObject("PROTECTED", el, 10.0), (), (6599.9, 6600.5))
    path = tmp_path / "empty.json"
    save_situation(situation, path)
    return str(path)


def test_generate_is_deterministic(tmp_path):
    args = ["generate", "--count", "3", "--seed", "1", "--debris", "2", "--no-progress"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b")]) == 0

    files = sorted(p.name for p in (tmp_path / "a").glob("*.json"))
    assert files == ["situation_0.json", "situation_1.json", "situation_2.json"]
    for name in files:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    assert all(len(load_situation(tmp_path / "a" / name).debris) == 2 for name in files)

    # --debris 값이 잘못되면 트레이스백이 아니라 입력 오류
    assert main(["generate", "--count", "1", "--debris", "0", "--out", str(tmp_path / "bad")]) == 2

    assert main(["generate", "--count", "0", "--out", str(tmp_path / "none")]) == 0
    assert list((tmp_path / "none").glob("*.json")) == []


def test_golden_conjunctions(tmp_path):
    golden = tmp_path / "golden_example.json"
    assert main(["golden", "--out", str(golden)]) == 0

    config = _write(tmp_path / "golden_profile.json", GOLDEN_PROFILE)
    out = tmp_path / "conj.csv"
    assert main(["conjunctions", "--situation", str(golden), "--config", config, "--out", str(out)]) == 0

    frame = pd.read_csv(out)
    assert list(frame.columns) == [
        "debris name", "miss distance (m)", "epoch (mjd2000)", "collision probability", "collision danger",
    ]
    assert len(frame) >= 10
    assert set(frame["debris name"]) == {f"DEBRIS{k}" for k in range(10)}


def test_solve_zero_debris(tmp_path, empty_situation):
    out = tmp_path / "result.json"
    assert main(["solve", "--situation", empty_situation, "--algorithm", "gs", "--out", str(out)]) == 0

    report = json.loads(out.read_text())
    assert report["maneuvers"] == []
    assert report["conjunctions_before"] == [] and report["conjunctions_after"] == []
    assert report["reward"]["total"] == 0.0
    assert json.loads((tmp_path / "result_maneuvers.json").read_text()) == []


def test_solve_input_errors(tmp_path, empty_situation):
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    out = str(tmp_path / "r.json")

    assert main(["solve", "--situation", str(bad), "--algorithm", "gs", "--out", out]) == 2
    assert main(["solve", "--situation", empty_situation, "--algorithm", "annealing", "--out", out]) == 2
    assert main(["solve", "--situation", str(tmp_path / "missing.json"), "--algorithm", "gs", "--out", out]) == 2

    config = _write(tmp_path / "cfg.json", {"reward": {"fuel_budget": 1.0}})
    assert main(["solve", "--situation", empty_situation, "--algorithm", "gs", "--out", out, "--config", config]) == 2


def test_solve_with_workers_matches_serial(tmp_path):
    situation = generate_situation(GeneratorConfig(n_debris=2, rng_seed=5, protected_radius_range=(20.0, 20.0)), 0)
    path = tmp_path / "situation.json"
    save_situation(situation, path)
    config = _write(tmp_path / "small.json", SMALL)

    args = ["solve", "--situation", str(path), "--algorithm", "gs-ce", "--config", config]
    assert main(args + ["--out", str(tmp_path / "serial.json")]) == 0
    assert main(args + ["--out", str(tmp_path / "parallel.json"), "--workers", "2"]) == 0
    assert json.loads((tmp_path / "serial.json").read_text()) == json.loads((tmp_path / "parallel.json").read_text())

    assert main(args + ["--out", str(tmp_path / "bad.json"), "--workers", "-1"]) == 2


def test_conjunctions_empty_debris(tmp_path, empty_situation, capsys):
    out = tmp_path / "conj.csv"
    assert main(["conjunctions", "--situation", empty_situation, "--out", str(out)]) == 0
    assert pd.read_csv(out).empty

    capsys.readouterr()
    assert main(["conjunctions", "--situation", empty_situation]) == 0
    assert json.loads(capsys.readouterr().out) == []


def test_conjunctions_with_evasive_maneuver(tmp_path):
    cfg = GeneratorConfig(n_debris=2, rng_seed=5, protected_radius_range=(20.0, 20.0))
    situation = generate_situation(cfg, 0)
    simulator = SessionSimulator(situation)
    tca = first_dangerous_epoch(simulator.nominal_result)
    assert tca is not None

    epoch = maneuver_epoch(tca, simulator.protected_period, 0, situation.start)
    burn = decode(ManeuverParam(ManeuverMode.IN_TRACK, [1.0], epoch), simulator)

    situation_path = tmp_path / "situation_0.json"
    maneuvers_path = tmp_path / "maneuvers.json"
    save_situation(situation, situation_path)
    save_maneuvers([burn], maneuvers_path)

    before, after = tmp_path / "before.csv", tmp_path / "after.csv"
    assert main(["conjunctions", "--situation", str(situation_path), "--out", str(before)]) == 0
    assert main([
        "conjunctions", "--situation", str(situation_path), "--maneuvers", str(maneuvers_path), "--out", str(after),
    ]) == 0

    dangerous_before = pd.read_csv(before)["collision danger"].sum()
    dangerous_after = pd.read_csv(after)["collision danger"].sum()
    assert dangerous_after < dangerous_before


def test_reward_curve(tmp_path):
    out = tmp_path / "curve.csv"
    assert main(["reward-curve", "--threshold", "10", "--out", str(out)]) == 0

    curve = pd.read_csv(out)

    def at(value):
        return curve.loc[curve["value"] == value, "reward"].iloc[0]

    assert at(0.0) == 0.0
    assert at(10.0) == pytest.approx(-1.0)
    assert at(20.0) == pytest.approx(-10.0)

    assert main(["reward-curve", "--threshold", "7", "--max", "10", "--points", "4", "--out", str(out)]) == 0
    assert 7.0 in pd.read_csv(out)["value"].tolist()

    assert main(["reward-curve", "--threshold", "0"]) == 2


def test_evaluate_single_algorithm(tmp_path):
    situations = tmp_path / "situations"
    assert main(["generate", "--count", "2", "--debris", "2", "--seed", "4", "--out", str(situations), "--no-progress"]) == 0
    config = _write(tmp_path / "small.json", SMALL)

    first, second = tmp_path / "m1.csv", tmp_path / "m2.csv"
    args = ["evaluate", "--situations", str(situations), "--algorithms", "gs", "--config", config, "--no-progress"]
    assert main(args + ["--out", str(first)]) == 0
    assert main(args + ["--out", str(second)]) == 0

    frame = pd.read_csv(first)
    assert frame["algorithm"].tolist() == ["gs"]
    assert frame.loc[0, "o/c GS"] == "-"
    assert first.read_bytes() == second.read_bytes()

    third = tmp_path / "m3.csv"
    assert main(args + ["--out", str(third), "--workers", "2"]) == 0
    assert third.read_bytes() == first.read_bytes()
    assert (tmp_path / "m1_cells" / "config.json").exists()

    assert main(["evaluate", "--situations", str(tmp_path / "nowhere"), "--out", str(first)]) == 2


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
