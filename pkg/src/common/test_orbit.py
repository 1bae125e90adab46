"""
궤도역학 모듈 테스트
"""

import numpy as np
import pytest

from src.common.orbit import (
    MU,
    OrbitalElements,
    StateVector,
    Trajectory,
    canonical_elements,
    elements_to_state,
    orbit_frame,
    orbital_period,
    propagate,
    propagate_elements,
    solve_kepler,
    state_to_elements,
    wrap_angle,
)


def _angle_diff(a, b):
    return abs(wrap_angle(a - b))


@pytest.mark.parametrize(
    "M, e",
    [(0.0, 0.0), (0.3, 0.003), (1.0, 0.5), (3.1, 0.9), (-2.0, 0.95), (25.0, 0.2), (-40.0, 0.7)],
)
def test_solve_kepler_residual(M, e):
    E = solve_kepler(M, e)
    assert abs(E - e * np.sin(E) - M) < 1e-12, f"잔차가 큽니다: M={M}, e={e}"
    # 같은 2pi 가지
    assert abs(E - M) <= np.pi + 1.0


def test_solve_kepler_known_values():
    assert solve_kepler(0.0, 0.5) == 0.0
    assert solve_kepler(np.pi, 0.9) == pytest.approx(np.pi, abs=1e-12)


def test_solve_kepler_vectorized():
    M = np.linspace(-10.0, 10.0, 101)
    E = solve_kepler(M, 0.3)
    assert E.shape == M.shape
    assert np.all(np.abs(E - 0.3 * np.sin(E) - M) < 1e-12)


def test_solve_kepler_rejects_bad_eccentricity():
    with pytest.raises(ValueError):
        solve_kepler(1.0, 1.0)
    with pytest.raises(ValueError):
        solve_kepler(1.0, -0.1)


def test_elements_validation():
    with pytest.raises(ValueError):
        OrbitalElements(a=-1.0, e=0.0, i=0.0, raan=0.0, argp=0.0, mean_anomaly=0.0, epoch=0.0)
    with pytest.raises(ValueError):
        OrbitalElements(a=7e6, e=1.2, i=0.0, raan=0.0, argp=0.0, mean_anomaly=0.0, epoch=0.0)
    with pytest.raises(ValueError):
        OrbitalElements(a=7e6, e=0.0, i=np.nan, raan=0.0, argp=0.0, mean_anomaly=0.0, epoch=0.0)


def test_circular_equatorial_state():
    el = OrbitalElements(a=7e6, e=0.0, i=0.0, raan=0.0, argp=0.0, mean_anomaly=0.0, epoch=0.0)
    sv = elements_to_state(el)

    assert np.allclose(sv.position, [7e6, 0.0, 0.0], atol=1e-6)
    assert np.allclose(sv.velocity, [0.0, np.sqrt(MU / 7e6), 0.0], atol=1e-9)


def test_state_to_elements_circular_equatorial():
    sv = StateVector([7e6, 0.0, 0.0], [0.0, np.sqrt(MU / 7e6), 0.0], 0.0)
    el = state_to_elements(sv)

    assert el.a == pytest.approx(7e6, rel=1e-12)
    assert el.e == pytest.approx(0.0, abs=1e-12)
    assert el.i == pytest.approx(0.0, abs=1e-12)
    assert el.raan == 0.0
    assert el.argp == 0.0
    assert _angle_diff(el.mean_anomaly, 0.0) < 1e-12


@pytest.mark.parametrize(
    "elements",
    [
        (7530537.215, 0.003, 0.562, 2.551, 0.153, 2.153),
        (8033345.687, 0.060, 0.896, 5.957, 6.143, 0.0),
        (6203113.774, 0.212, 2.103, 3.738, 3.677, 3.139),
        (7200000.0, 0.4, 1.2, 0.5, 4.0, 5.5),
    ],
)
def test_round_trip(elements):
    a, e, i, raan, argp, M = elements
    el = OrbitalElements(a, e, i, raan, argp, M, 6600.0)
    back = state_to_elements(elements_to_state(el))

    assert back.a == pytest.approx(a, rel=1e-9)
    assert back.e == pytest.approx(e, abs=1e-9)
    assert back.i == pytest.approx(i, abs=1e-9)
    for original, recovered in [(raan, back.raan), (argp, back.argp), (M, back.mean_anomaly)]:
        assert _angle_diff(original, recovered) < 1e-9


def test_random_orbits_invariants():
    rng = np.random.default_rng(2024)
    n = 300
    a = rng.uniform(6.6e6, 4.2e7, n)
    e = rng.uniform(0.01, 0.8, n)
    i = rng.uniform(0.05, np.pi - 0.05, n)
    angles = rng.uniform(0.0, 2.0 * np.pi, (n, 3))

    for k in range(n):
        el = OrbitalElements(a[k], e[k], i[k], *angles[k], 6600.0)
        state = elements_to_state(el)
        back = state_to_elements(state)

        assert state.specific_energy == pytest.approx(-MU / (2.0 * a[k]), rel=1e-9)
        h = np.linalg.norm(state.angular_momentum)
        assert h == pytest.approx(np.sqrt(MU * a[k] * (1.0 - e[k] ** 2)), rel=1e-9)

        assert back.a == pytest.approx(a[k], rel=1e-9)
        assert back.e == pytest.approx(e[k], abs=1e-9)
        assert back.i == pytest.approx(i[k], abs=1e-9)
        for original, recovered in zip(angles[k], (back.raan, back.argp, back.mean_anomaly)):
            assert _angle_diff(original, recovered) < 1e-9, f"orbit {k}: {el}"


def test_state_round_trip_position():
    sv = StateVector([6.9e6, 1.2e6, -0.4e6], [-1200.0, 7100.0, 1500.0], 6600.0)
    back = elements_to_state(state_to_elements(sv))

    assert np.linalg.norm(back.position - sv.position) < 1e-4
    assert np.linalg.norm(back.velocity - sv.velocity) < 1e-7


def test_unbound_orbit_rejected():
    escape = np.sqrt(2 * MU / 7e6)
    with pytest.raises(ValueError):
        state_to_elements(StateVector([7e6, 0.0, 0.0], [0.0, 1.01 * escape, 0.0], 0.0))


def test_propagate_one_period_returns_same_state():
    el = OrbitalElements(7.5e6, 0.05, 0.9, 1.0, 2.0, 0.7, 0.0)
    start = elements_to_state(el)
    after = propagate(el, el.period / 86400.0)

    assert np.linalg.norm(after.position - start.position) < 1e-6
    assert np.linalg.norm(after.velocity - start.velocity) < 1e-9


def test_propagate_is_a_flow():
    el = OrbitalElements(7.5e6, 0.1, 0.9, 1.0, 2.0, 0.7, 0.0)
    t1, t2 = 0.13, 0.41

    direct = propagate(el, t2)
    chained = propagate(propagate_elements(el, t1), t2)
    assert np.linalg.norm(direct.position - chained.position) < 1e-6

    # 상태 벡터를 거치는 경로
    via_state = propagate(propagate(el, t1), t2)
    assert np.linalg.norm(direct.position - via_state.position) < 1e-6


def test_propagate_backwards():
    el = OrbitalElements(7.5e6, 0.01, 0.3, 1.0, 2.0, 0.7, 10.0)
    back = propagate(el, 9.5)
    forward = propagate(back, 10.0)
    assert np.linalg.norm(forward.position - elements_to_state(el).position) < 1e-5


def test_orbital_period():
    assert orbital_period(7e6) == pytest.approx(2 * np.pi * np.sqrt(7e6**3 / MU))
    with pytest.raises(ValueError):
        orbital_period(0.0)


def test_orbit_frame_circular_equatorial():
    sv = StateVector([7e6, 0.0, 0.0], [0.0, np.sqrt(MU / 7e6), 0.0], 0.0)
    frame = orbit_frame(sv)

    assert np.allclose(frame.in_track, [0.0, 1.0, 0.0])
    assert np.allclose(frame.radial_in_plane, [1.0, 0.0, 0.0])
    assert np.allclose(frame.cross_track, [0.0, 0.0, 1.0])


def test_orbit_frame_orthonormal():
    sv = elements_to_state(OrbitalElements(7.1e6, 0.2, 1.1, 0.4, 2.5, 1.9, 0.0))
    basis = np.array(orbit_frame(sv))
    assert np.allclose(basis @ basis.T, np.eye(3), atol=1e-12)


def test_orbit_frame_degenerate():
    with pytest.raises(ValueError):
        orbit_frame(StateVector([7e6, 0.0, 0.0], [0.0, 0.0, 0.0], 0.0))
    with pytest.raises(ValueError):
        orbit_frame(StateVector([7e6, 0.0, 0.0], [100.0, 0.0, 0.0], 0.0))


def test_canonical_elements_keeps_state():
    el = OrbitalElements(7.4e6, 0.02, 4.0, 1.0, 0.5, -2.0, 0.0)
    canon = canonical_elements(el)

    assert 0.0 <= canon.i <= np.pi
    assert np.linalg.norm(elements_to_state(el).position - elements_to_state(canon).position) < 1e-6


def test_trajectory_segments():
    el = OrbitalElements(7.5e6, 0.01, 0.5, 1.0, 2.0, 0.0, 0.0)
    other = OrbitalElements(7.6e6, 0.01, 0.5, 1.0, 2.0, 1.0, 0.5)
    traj = Trajectory(el).appended(0.5, other)

    positions, _ = traj.states_at([0.1, 0.5, 0.7])
    assert np.allclose(positions[0], propagate(el, 0.1).position)
    # 기동 시각에는 기동 후 구간이 적용됨
    assert np.allclose(positions[1], elements_to_state(other).position)
    assert np.allclose(positions[2], propagate(other, 0.7).position)

    with pytest.raises(ValueError):
        traj.appended(0.2, other)


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
