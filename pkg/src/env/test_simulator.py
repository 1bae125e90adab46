"""
세션 시뮬레이터 테스트
"""

import numpy as np
import pytest

from src.common.orbit import OrbitalElements, StateVector, TWO_PI, elements_to_state
from src.env.generator import GeneratorConfig, generate_situation
from src.env.simulator import (
    DangerousSituation,
    Maneuver,
    SessionSimulator,
    SpaceObject,
    apply_maneuver,
    deviations,
    run_session,
)


@pytest.fixture(scope="module")
def situation():
    return generate_situation(GeneratorConfig(n_debris=3, rng_seed=7), index=0)


@pytest.fixture(scope="module")
def simulator(situation):
    return SessionSimulator(situation)


def _numbers(result):
    return (
        result.total_probability,
        result.fuel,
        result.deviations,
        [c.to_row() for c in result.conjunctions],
        result.reward.total,
    )


def test_apply_maneuver():
    state = StateVector([7e6, 0.0, 0.0], [0.0, 7500.0, 0.0], 6600.0)
    after = apply_maneuver(state, Maneuver([0.0, 0.1, 0.0], 6600.0))

    assert np.array_equal(after.position, state.position)
    assert np.allclose(after.velocity, [0.0, 7500.1, 0.0])

    with pytest.raises(ValueError):
        apply_maneuver(state, Maneuver([0.0, 0.1, 0.0], 6600.1))


def test_deviation_wraps_angles():
    base = dict(a=7e6, e=0.001, i=0.5, raan=1.0, argp=2.0, epoch=6601.0)
    maneuvered = OrbitalElements(mean_anomaly=TWO_PI - 0.001, **base)
    nominal = OrbitalElements(mean_anomaly=0.001, **base)

    assert deviations(maneuvered, nominal).mean_anomaly == pytest.approx(-0.002, abs=1e-12)

    with pytest.raises(ValueError):
        deviations(maneuvered, OrbitalElements(mean_anomaly=0.001, **{**base, "epoch": 6600.0}))


def test_no_maneuver_neutrality(simulator):
    result = simulator.run([])
    assert result.fuel == 0.0
    assert all(abs(v) < 1e-9 for v in result.deviations.as_dict().values())

    zero = simulator.run([Maneuver([0.0, 0.0, 0.0], simulator.situation.start)])
    assert _numbers(zero) == _numbers(result)


def test_nominal_has_first_conjunction(simulator):
    nominal = simulator.nominal_result
    first = [c for c in nominal.conjunctions if c.debris_name == "DEBRIS0"]
    assert first, "첫 파편과의 근접 접근이 없습니다"
    assert min(c.miss_distance for c in first) < 2000.0


def test_superposition(simulator):
    epoch = simulator.situation.start + 0.01
    dv = np.array([0.05, -0.02, 0.03])

    whole = simulator.run([Maneuver(dv, epoch)])
    halves = simulator.run([Maneuver(dv / 2, epoch), Maneuver(dv / 2, epoch)])

    assert halves.total_probability == pytest.approx(whole.total_probability, abs=1e-9)
    for a, b in zip(halves.deviations.as_dict().values(), whole.deviations.as_dict().values()):
        assert a == pytest.approx(b, abs=1e-9)


def test_fuel_is_sum_of_magnitudes(simulator):
    start = simulator.situation.start
    maneuvers = [Maneuver([0.3, 0.4, 0.0], start + 0.01), Maneuver([0.0, 0.0, -0.2], start + 0.02)]
    assert simulator.run(maneuvers).fuel == pytest.approx(0.7)


def test_prograde_burn_raises_orbit(simulator):
    epoch = simulator.situation.start + 0.01
    state = simulator.nominal_trajectory.state_at(epoch)
    along = 0.1 * state.velocity / np.linalg.norm(state.velocity)

    result = simulator.run([Maneuver(along, epoch)])
    assert result.deviations.a > 0.0
    assert result.fuel == pytest.approx(0.1)


def test_maneuver_outside_window(simulator):
    with pytest.raises(ValueError):
        simulator.run([Maneuver([0.1, 0.0, 0.0], simulator.situation.end + 0.1)])


def test_determinism(situation, simulator):
    maneuvers = [Maneuver([0.02, 0.05, -0.01], situation.start + 0.02)]
    assert _numbers(simulator.run(maneuvers)) == _numbers(simulator.run(maneuvers))
    assert _numbers(run_session(situation, maneuvers)) == _numbers(simulator.run(maneuvers))


def test_run_many_matches_run(situation, simulator):
    start = situation.start
    batches = [[], [Maneuver([0.02, 0.05, -0.01], start + 0.02)], [Maneuver([0.0, -0.3, 0.0], start + 0.05)]]
    expected = [_numbers(simulator.run(m)) for m in batches]

    assert [_numbers(r) for r in simulator.run_many(batches)] == expected
    with simulator.parallel(2):
        assert [_numbers(r) for r in simulator.run_many(batches)] == expected
    assert simulator.run_many([]) == []


def test_situation_without_debris(situation):
    empty = DangerousSituation(situation.protected, (), situation.window, name="empty")
    result = run_session(empty)
    assert result.conjunctions == []
    assert result.total_probability == 0.0
    assert result.reward.total == 0.0


def test_invalid_objects():
    el = OrbitalElements(7e6, 0.0, 0.1, 0.0, 0.0, 0.0, 6600.0)
    with pytest.raises(ValueError):
        SpaceObject("X", el, radius=0.0)
    with pytest.raises(ValueError):
        DangerousSituation(SpaceObject("X", el, 1.0), (), (6600.0, 6599.0))
    with pytest.raises(ValueError):
        Maneuver([np.nan, 0.0, 0.0], 6600.0)


def test_maneuver_keeps_position(simulator):
    epoch = simulator.situation.start + 0.03
    before = simulator.nominal_trajectory.state_at(epoch)
    after = simulator.build_trajectory([Maneuver([0.1, 0.1, 0.1], epoch)]).state_at(epoch)
    assert np.linalg.norm(after.position - before.position) < 1e-3
    assert np.allclose(after.velocity - before.velocity, [0.1, 0.1, 0.1], atol=1e-6)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
