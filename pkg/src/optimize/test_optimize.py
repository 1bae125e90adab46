"""
기동 최적화 테스트 (변수 변환, 격자 탐색, 교차 엔트로피, 파이프라인)
"""

from dataclasses import replace

import numpy as np
import pytest

from src.common.orbit import SECONDS_PER_DAY, OrbitalElements, elements_to_state, propagate
from src.env.generator import GeneratorConfig, construct_debris, generate_situation
from src.env.simulator import DangerousSituation, SessionSimulator, SpaceObject
from src.optimize.cross_entropy import CrossEntropyConfig, CrossEntropyOptimizer, cross_entropy
from src.optimize.grid_search import GridSearchConfig, grid_search_baseline, grid_search_general
from src.optimize.maneuver import (
    ManeuverMode,
    ManeuverParam,
    Timing,
    auto_timing_bounds,
    decode,
    first_dangerous_epoch,
    maneuver_epoch,
)
from src.optimize.pipeline import ALGORITHMS, gs_ce, solve

SMALL_GS = GridSearchConfig(grid_points=21)
SMALL_CE = CrossEntropyConfig(population=8, elite_fraction=0.25, iterations=3, restarts=1, rng_seed=3)


def _dangerous_situation(n_debris=2, seed=5):
    cfg = GeneratorConfig(n_debris=n_debris, rng_seed=seed, protected_radius_range=(20.0, 20.0))
    return generate_situation(cfg, 0)


@pytest.fixture(scope="module")
def simulator():
    sim = SessionSimulator(_dangerous_situation())
    assert first_dangerous_epoch(sim.nominal_result) is not None, "테스트 상황에 위험 근접 접근이 없습니다"
    return sim


@pytest.fixture(scope="module")
def quiet_simulator():
    el = OrbitalElements(7e6, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
    return SessionSimulator(DangerousSituation(SpaceObject("PROTECTED", el, 5.0), (), (0.0, 1.0)))


# 변수 변환

def test_decode_in_track_circular_equatorial(quiet_simulator):
    m = decode(ManeuverParam(ManeuverMode.IN_TRACK, [0.1], 0.0), quiet_simulator)
    assert np.allclose(m.dv, [0.0, 0.1, 0.0], atol=1e-12)
    assert m.epoch == 0.0


def test_decode_out_of_plane_axes(quiet_simulator):
    m = decode(ManeuverParam(ManeuverMode.OUT_OF_PLANE, [0.0, 0.2, 0.3], 0.0), quiet_simulator)
    assert np.allclose(m.dv, [0.2, 0.0, 0.3], atol=1e-12)


def test_decode_rejects_oversized(quiet_simulator):
    with pytest.raises(ValueError):
        decode(ManeuverParam(ManeuverMode.IN_PLANE, [0.8, 0.8], 0.0), quiet_simulator, dv_max=1.0)
    with pytest.raises(ValueError):
        decode(ManeuverParam(ManeuverMode.IN_TRACK, [0.1], 2.0), quiet_simulator)


def test_param_vector_round_trip():
    param = ManeuverParam(ManeuverMode.IN_PLANE, [0.1, -0.2], 6599.95, Timing.AUTO)
    vector = param.to_vector()
    assert vector.tolist() == [0.1, -0.2, 6599.95]

    back = ManeuverParam.from_vector("in_plane", "auto", vector, epoch=0.0)
    assert back.epoch == 6599.95 and back.values.tolist() == [0.1, -0.2]

    with pytest.raises(ValueError):
        ManeuverParam(ManeuverMode.OUT_OF_PLANE, [0.1], 6599.95)


def test_maneuver_epoch():
    period = 86400.0 / 10
    assert maneuver_epoch(10.0, period, 0, 0.0) == pytest.approx(9.95)
    assert maneuver_epoch(10.0, period, 1, 0.0) == pytest.approx(9.85)
    assert maneuver_epoch(10.0, period, 0, 9.99) == 9.99


def test_auto_timing_bounds(simulator, quiet_simulator):
    lower, upper = auto_timing_bounds(simulator)
    tca = first_dangerous_epoch(simulator.nominal_result)
    assert lower == simulator.situation.start
    assert upper == pytest.approx(tca - 60.0 / 86400.0)

    with pytest.raises(ValueError):
        auto_timing_bounds(quiet_simulator)


def test_auto_timing_bounds_too_close(simulator):
    tca = first_dangerous_epoch(simulator.nominal_result)
    situation = simulator.situation
    tight = DangerousSituation(situation.protected, situation.debris, (tca - 40.0 / 86400.0, situation.end))
    with pytest.raises(ValueError):
        auto_timing_bounds(SessionSimulator(tight))


# 격자 탐색

def test_grid():
    assert GridSearchConfig(grid_points=5).grid().tolist() == [-1.0, -0.5, 0.0, 0.5, 1.0]
    assert 0.0 in GridSearchConfig().grid()
    with pytest.raises(ValueError):
        GridSearchConfig(grid_points=4)


def test_gs_without_danger(quiet_simulator):
    result = grid_search_general(quiet_simulator, SMALL_GS)
    assert result.maneuvers == []
    assert result.maneuver_epoch is None


def test_gs_improves_on_nominal(simulator):
    result = grid_search_general(simulator, SMALL_GS)
    nominal = simulator.nominal_result

    assert result.reward >= nominal.reward.total
    tca = first_dangerous_epoch(nominal)
    expected = max(tca - 0.5 * simulator.protected_period / 86400.0, simulator.situation.start)
    assert result.maneuver_epoch == pytest.approx(expected)
    assert all(m.magnitude <= 1.0 + 1e-12 for m in result.maneuvers)


T1 = 6600.0
DEBRIS_CFG = GeneratorConfig(
    first_offset_sigma=5.0, speed_sigma=200.0, plane_angle_range=(1.2, 1.2), debris_radius_range=(0.5, 0.5)
)


def _protected():
    el = OrbitalElements(7.0e6, 0.002, 0.9, 1.0, 0.5, 0.0, T1)
    return SpaceObject("PROTECTED", el, 20.0, 100.0)


def _debris(protected, epoch, cfg, name, head_on):
    """
    epoch에서 보호 위성과 만나는 파편 (seed를 차례로 시도해 조건을 맞춤).

    속력 차이가 100 m/s 이상이어야 시간 창 안에서 같은 파편과 다시 만나지 않습니다.
    head_on이면 속도가 보호 위성과 반대 방향인 파편만 받습니다.
    """
    state = propagate(protected.elements, epoch)
    v_ref = np.linalg.norm(state.velocity)
    for seed in range(200):
        candidate = construct_debris(state, True, cfg, np.random.default_rng(seed), name)
        velocity = elements_to_state(candidate.elements).velocity
        if abs(np.linalg.norm(velocity) - v_ref) > 100.0 and bool(velocity @ state.velocity < 0) == head_on:
            return candidate
    raise AssertionError(f"{name}: 조건에 맞는 파편을 만들지 못했습니다")


def _window(protected):
    return (T1 - protected.elements.period / SECONDS_PER_DAY, T1 + 1.0)


@pytest.fixture(scope="module")
def single_target_simulator():
    protected = _protected()
    first = _debris(protected, T1, DEBRIS_CFG, "DEBRIS0", head_on=False)
    return SessionSimulator(DangerousSituation(protected, (first,), _window(protected), name="single_target"))


@pytest.fixture(scope="module")
def chained_simulator():
    """
    DEBRIS0은 T1에 비스듬히 교차하고, DEBRIS1은 T1 + T/2에 정면으로 다가옵니다.

    첫 기동 시각(T1 - T/2)에서 한 주기 뒤에는 in-track 기동의 반경 방향 변위가 0으로
    돌아오고 진행 방향 변위는 정면 접근의 근접 거리를 바꾸지 못하므로,
    첫 파편을 피하는 기동으로는 두 번째 파편의 위험이 남습니다.
    """
    protected = _protected()
    half_period = 0.5 * protected.elements.period / SECONDS_PER_DAY
    first = _debris(protected, T1, DEBRIS_CFG, "DEBRIS0", head_on=False)
    second = _debris(
        protected, T1 + half_period, replace(DEBRIS_CFG, plane_angle_range=(3.14159, 3.14159)), "DEBRIS1", head_on=True
    )
    return SessionSimulator(DangerousSituation(protected, (first, second), _window(protected), name="chained"))


def test_baseline_single_target_matches_gs(single_target_simulator):
    sim = single_target_simulator
    assert len(sim.nominal_result.dangerous) == 1

    gs = grid_search_general(sim, SMALL_GS)
    baseline = grid_search_baseline(sim, SMALL_GS)

    assert len(gs.maneuvers) == 1
    assert len(baseline.maneuvers) == len(gs.maneuvers)
    assert np.array_equal(baseline.maneuvers[0].dv, gs.maneuvers[0].dv)
    assert baseline.maneuver_epoch == gs.maneuver_epoch
    assert baseline.reward == gs.reward


def test_baseline_handles_chained_danger(chained_simulator):
    sim = chained_simulator
    assert {c.debris_name for c in sim.nominal_result.dangerous} == {"DEBRIS0", "DEBRIS1"}

    gs = grid_search_general(sim, SMALL_GS)
    baseline = grid_search_baseline(sim, SMALL_GS)
    print(
        f"gs: Pc {gs.result.total_probability:.3e}, reward {gs.reward:.3f} / "
        f"baseline: {len(baseline.maneuvers)} maneuvers, Pc {baseline.result.total_probability:.3e}, "
        f"reward {baseline.reward:.3f}"
    )

    # 한 번의 기동으로는 정면 접근 파편이 계속 위험
    assert "DEBRIS1" in {c.debris_name for c in gs.result.dangerous}
    assert np.array_equal(baseline.maneuvers[0].dv, gs.maneuvers[0].dv)
    assert len(baseline.maneuvers) >= 2
    assert baseline.result.total_probability < gs.result.total_probability
    assert baseline.reward > gs.reward
    assert baseline.result.fuel <= 1.0 + 1e-9


def test_baseline_limits(simulator):
    result = grid_search_baseline(simulator, SMALL_GS)
    assert len(result.maneuvers) <= 5
    assert result.result.fuel <= 1.0 + 1e-9
    assert result.reward >= simulator.nominal_result.reward.total


# 교차 엔트로피

def _surrogate_optimizer(cfg, sigma0=0.2):
    target = np.array([0.3, -0.2])
    return CrossEntropyOptimizer(
        lambda x: -float(np.sum((x - target) ** 2)),
        lower=-np.ones(2),
        upper=np.ones(2),
        sigma0=sigma0 * np.ones(2),
        cfg=cfg,
        sigma_floor=1e-4 * np.ones(2),
    )


def test_ce_finds_surrogate_optimum():
    outcome = _surrogate_optimizer(CrossEntropyConfig(rng_seed=0)).run(np.zeros(2))
    print(f"best={outcome.best_x}, mean={outcome.mean}")
    assert np.linalg.norm(outcome.mean - [0.3, -0.2]) <= 0.05
    assert np.linalg.norm(outcome.best_x - [0.3, -0.2]) <= 0.05


def test_ce_history_is_monotone():
    outcome = _surrogate_optimizer(CrossEntropyConfig(iterations=10)).run(np.zeros(2))
    assert all(a <= b for a, b in zip(outcome.history, outcome.history[1:]))
    assert outcome.history[-1] == outcome.best_value


def test_ce_is_reproducible():
    cfg = CrossEntropyConfig(iterations=5, rng_seed=42)
    a = _surrogate_optimizer(cfg).run(np.zeros(2))
    b = _surrogate_optimizer(cfg).run(np.zeros(2))
    assert np.array_equal(a.best_x, b.best_x)
    assert a.history == b.history


def test_ce_zero_iterations_or_sigma_returns_init():
    init = np.array([0.1, 0.1])
    outcome = _surrogate_optimizer(CrossEntropyConfig(iterations=0)).run(init)
    assert np.array_equal(outcome.best_x, init)

    frozen = CrossEntropyConfig(initial_sigma=0.0, iterations=5)
    outcome = _surrogate_optimizer(frozen, sigma0=0.0).run(init)
    assert np.array_equal(outcome.best_x, init)
    assert np.array_equal(outcome.mean, init)


def test_ce_zero_sigma_component_stays_fixed():
    init = np.array([0.1, 0.1])
    optimizer = CrossEntropyOptimizer(
        lambda x: -float(np.sum((x - [0.3, -0.2]) ** 2)),
        lower=-np.ones(2),
        upper=np.ones(2),
        sigma0=np.array([0.2, 0.0]),
        cfg=CrossEntropyConfig(iterations=10, rng_seed=1),
        sigma_floor=1e-4 * np.ones(2),
    )
    outcome = optimizer.run(init)

    assert outcome.best_x[1] == init[1]
    assert outcome.mean[1] == init[1]
    assert outcome.best_x[0] == pytest.approx(0.3, abs=0.05)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"elite_fraction": 1.0},
        {"elite_fraction": 0.0},
        {"population": 10, "elite_fraction": 0.1},
        {"population": 2, "elite_fraction": 0.5},
    ],
)
def test_ce_config_rejects_small_elite(kwargs):
    with pytest.raises(ValueError):
        CrossEntropyConfig(**kwargs)


def test_ce_config_elite_count():
    assert CrossEntropyConfig().n_elite == 10
    assert CrossEntropyConfig(population=8, elite_fraction=0.25).n_elite == 2


def test_ce_never_worse_than_init(simulator):
    epoch = maneuver_epoch(
        first_dangerous_epoch(simulator.nominal_result), simulator.protected_period, 0, simulator.situation.start
    )
    init = ManeuverParam(ManeuverMode.IN_PLANE, [0.2, 0.0], epoch)
    init_reward = simulator.run([decode(init, simulator)]).reward.total

    result = cross_entropy(simulator, init, SMALL_CE)
    assert result.reward >= init_reward


def test_ce_frozen_returns_init_maneuver(simulator):
    epoch = simulator.situation.start + 0.01
    init = ManeuverParam(ManeuverMode.OUT_OF_PLANE, [0.1, -0.1, 0.05], epoch)
    cfg = CrossEntropyConfig(initial_sigma=0.0, initial_sigma_epoch=0.0, iterations=3, restarts=1)

    result = cross_entropy(simulator, init, cfg)
    assert np.array_equal(result.maneuvers[0].dv, decode(init, simulator).dv)


# 파이프라인

def test_gs_ce_dominates_gs(simulator):
    gs = grid_search_general(simulator, SMALL_GS)
    refined = gs_ce(simulator, SMALL_GS, SMALL_CE)
    assert refined.algorithm == "gs-ce"
    assert refined.reward >= gs.reward


@pytest.mark.parametrize("algorithm", ALGORITHMS)
def test_solve_every_algorithm(simulator, algorithm):
    result = solve(algorithm, simulator, SMALL_GS, SMALL_CE)
    assert result.algorithm == algorithm
    assert result.result.fuel <= 1.0 + 1e-9
    start, end = simulator.situation.window
    assert all(start <= m.epoch <= end for m in result.maneuvers)


def test_solve_unknown_algorithm(simulator):
    with pytest.raises(ValueError):
        solve("simulated-annealing", simulator)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
