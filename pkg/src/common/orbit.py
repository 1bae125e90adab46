"""
Keplerian 궤도역학 모듈.

2체(Keplerian) 운동만 고려하는 궤도 계산 함수들.
충돌 회피 기동 시뮬레이션의 모든 물체 상태는 이 모듈로 표현/전파됩니다.

주요 기능:
- solve_kepler: 평균근점이각 -> 이심근점이각 (Newton 반복)
- elements_to_state / state_to_elements: 궤도요소 <-> 위치/속도 벡터
- propagate: 2체 전파 (평균근점이각만 n*dt 만큼 진행)
- orbit_frame: in-track / radial / cross-track 국소 기저
- Trajectory: 기동 시점에서 나뉘는 구간별 Keplerian 궤적

시간은 일(mjd2000) 단위로 다루고, 초 단위 변환은 전파 내부에서만 합니다.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Dict, List, NamedTuple, Sequence, Tuple, Union

import numpy as np


@dataclass(frozen=True)
class PhysicalConstants:
    """물리 상수 (변경 금지)."""

    mu: float = 3.986004418e14  # 지구 중력상수 (m^3/s^2)
    earth_radius: float = 6_371_000.0  # m
    seconds_per_day: float = 86_400.0


CONSTANTS = PhysicalConstants()
MU = CONSTANTS.mu
EARTH_RADIUS = CONSTANTS.earth_radius
SECONDS_PER_DAY = CONSTANTS.seconds_per_day

TWO_PI = 2.0 * np.pi

# Kepler 방정식 수렴 조건
KEPLER_TOL = 1e-12
KEPLER_MAX_ITER = 50

# 원궤도/적도궤도 판정 기준
DEGENERATE_TOL = 1e-11


@dataclass(frozen=True)
class OrbitalElements:
    """
    접촉(osculating) Keplerian 궤도요소.

    Attributes:
        a: 반장축 (m)
        e: 이심률
        i: 경사각 (rad)
        raan: 승교점 경도 (rad)
        argp: 근지점 인수 (rad)
        mean_anomaly: 평균근점이각 (rad), 음수도 그대로 보관
        epoch: 기준 시각 (mjd2000, 일)
    """

    a: float
    e: float
    i: float
    raan: float
    argp: float
    mean_anomaly: float
    epoch: float

    def __post_init__(self):
        values = (self.a, self.e, self.i, self.raan, self.argp, self.mean_anomaly, self.epoch)
        if not all(np.isfinite(v) for v in values):
            raise ValueError(f"궤도요소에 유한하지 않은 값이 있습니다: {values}")
        if self.a <= 0:
            raise ValueError(f"반장축은 양수여야 합니다: a={self.a}")
        if not 0.0 <= self.e < 1.0:
            raise ValueError(f"이심률은 [0, 1) 범위여야 합니다: e={self.e}")

    @property
    def mean_motion(self) -> float:
        """평균 운동 n (rad/s)."""
        return float(np.sqrt(MU / self.a**3))

    @property
    def period(self) -> float:
        """궤도 주기 (초)."""
        return orbital_period(self.a)

    def as_dict(self) -> Dict[str, float]:
        return {
            "a": self.a,
            "e": self.e,
            "i": self.i,
            "raan": self.raan,
            "argp": self.argp,
            "mean_anomaly": self.mean_anomaly,
            "epoch": self.epoch,
        }


@dataclass(frozen=True, eq=False)
class StateVector:
    """
    지구 중심 관성좌표계의 위치/속도.

    Attributes:
        position: 위치 (m), shape (3,)
        velocity: 속도 (m/s), shape (3,)
        epoch: 시각 (mjd2000, 일)
    """

    position: np.ndarray
    velocity: np.ndarray
    epoch: float

    def __post_init__(self):
        position = np.asarray(self.position, dtype=float).reshape(3)
        velocity = np.asarray(self.velocity, dtype=float).reshape(3)
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "velocity", velocity)

    @property
    def specific_energy(self) -> float:
        """비역학 에너지 v^2/2 - mu/r (J/kg)."""
        return float(self.velocity @ self.velocity / 2.0 - MU / np.linalg.norm(self.position))

    @property
    def angular_momentum(self) -> np.ndarray:
        return np.cross(self.position, self.velocity)


@dataclass(frozen=True)
class ElementDeviations:
    """기동 궤적과 무기동 궤적의 궤도요소 차이 (기동 - 무기동)."""

    a: float = 0.0
    e: float = 0.0
    i: float = 0.0
    raan: float = 0.0
    argp: float = 0.0
    mean_anomaly: float = 0.0

    def as_dict(self) -> Dict[str, float]:
        return {
            "a": self.a,
            "e": self.e,
            "i": self.i,
            "raan": self.raan,
            "argp": self.argp,
            "mean_anomaly": self.mean_anomaly,
        }


class OrbitFrame(NamedTuple):
    """국소 궤도 좌표계 (정규직교 기저)."""

    in_track: np.ndarray
    radial_in_plane: np.ndarray
    cross_track: np.ndarray


def wrap_angle(angle: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """각도를 (-pi, pi] 범위로 감쌉니다."""
    wrapped = angle - TWO_PI * np.ceil((np.asarray(angle) - np.pi) / TWO_PI)
    return float(wrapped) if np.ndim(wrapped) == 0 else wrapped


def solve_kepler(mean_anomaly: Union[float, np.ndarray], e: float) -> Union[float, np.ndarray]:
    """
    Kepler 방정식 E - e*sin(E) = M 을 풉니다.

    M을 (-pi, pi]로 환원해서 Newton 반복을 돌린 뒤 원래의 2pi 가지(branch)로
    되돌립니다. 초기값은 e < 0.8이면 M, 그 이상이면 pi입니다.
    스칼라와 numpy 배열 입력을 모두 지원합니다 (전파 시 시간 격자 전체를 한번에 풂).

    Args:
        mean_anomaly: 평균근점이각 M (rad)
        e: 이심률, 0 <= e < 1

    Returns:
        이심근점이각 E (rad), M과 같은 2pi 가지

    Raises:
        ValueError: e가 [0, 1) 범위 밖일 때
        RuntimeError: 반복 상한(50회) 안에 1e-12 rad로 수렴하지 못했을 때

    Examples:
        >>> solve_kepler(0.0, 0.5)
        0.0
        >>> round(solve_kepler(1.0, 0.5), 4)
        1.4987
    """
    if not 0.0 <= e < 1.0:
        raise ValueError(f"이심률은 [0, 1) 범위여야 합니다: e={e}")

    M = np.asarray(mean_anomaly, dtype=float)
    branch = np.ceil((M - np.pi) / TWO_PI)
    M0 = M - TWO_PI * branch

    if e < 0.8:
        E = M0.copy()
    else:
        E = np.where(M0 >= 0.0, np.pi, -np.pi)

    for _ in range(KEPLER_MAX_ITER):
        residual = E - e * np.sin(E) - M0
        if np.all(np.abs(residual) <= KEPLER_TOL):
            break
        E = E - residual / (1.0 - e * np.cos(E))
    else:
        raise RuntimeError(f"Kepler 방정식이 {KEPLER_MAX_ITER}회 안에 수렴하지 않았습니다 (e={e})")

    # 수렴한 잔차로 한 번 더 보정 (기계 정밀도까지)
    E = E - residual / (1.0 - e * np.cos(E))
    E = E + TWO_PI * branch

    return float(E) if E.ndim == 0 else E


def orbital_period(a: float) -> float:
    """
    궤도 주기 T = 2*pi*sqrt(a^3/mu) (초).

    Examples:
        >>> round(orbital_period(7_530_537.215), 1)
        6503.5
    """
    if a <= 0:
        raise ValueError(f"반장축은 양수여야 합니다: a={a}")
    return float(TWO_PI * np.sqrt(a**3 / MU))


def _perifocal_basis(i: float, raan: float, argp: float) -> Tuple[np.ndarray, np.ndarray]:
    # P: 근지점 방향, Q: 궤도면 내 P에 수직인 방향
    cO, sO = np.cos(raan), np.sin(raan)
    cw, sw = np.cos(argp), np.sin(argp)
    ci, si = np.cos(i), np.sin(i)

    P = np.array([cO * cw - sO * sw * ci, sO * cw + cO * sw * ci, sw * si])
    Q = np.array([-cO * sw - sO * cw * ci, -sO * sw + cO * cw * ci, cw * si])
    return P, Q


def _rv_from_elements(el: OrbitalElements, mean_anomaly) -> Tuple[np.ndarray, np.ndarray]:
    """평균근점이각(스칼라 또는 배열)에서 위치/속도를 계산합니다."""
    E = solve_kepler(mean_anomaly, el.e)
    cosE, sinE = np.cos(E), np.sin(E)
    root = np.sqrt(1.0 - el.e**2)

    x = el.a * (cosE - el.e)
    y = el.a * root * sinE
    r = el.a * (1.0 - el.e * cosE)
    coef = np.sqrt(MU * el.a) / r
    vx = -coef * sinE
    vy = coef * root * cosE

    P, Q = _perifocal_basis(el.i, el.raan, el.argp)
    position = np.multiply.outer(x, P) + np.multiply.outer(y, Q)
    velocity = np.multiply.outer(vx, P) + np.multiply.outer(vy, Q)
    return position, velocity


def elements_to_state(el: OrbitalElements) -> StateVector:
    """
    궤도요소를 관성좌표계 위치/속도로 변환합니다.

    Args:
        el: 궤도요소

    Returns:
        StateVector (epoch는 el.epoch)

    Examples:
        >>> sv = elements_to_state(OrbitalElements(7e6, 0, 0, 0, 0, 0, 0.0))
        >>> sv.position
        array([7000000.,       0.,       0.])
    """
    position, velocity = _rv_from_elements(el, el.mean_anomaly)
    return StateVector(position, velocity, el.epoch)


def state_to_elements(sv: StateVector) -> OrbitalElements:
    """
    위치/속도를 궤도요소로 변환합니다 (elements_to_state의 역변환).

    퇴화 궤도 규칙:
        - e < 1e-11: argp = 0, 근점이각은 승교점에서부터 측정
        - sin(i) < 1e-11: raan = 0, 승교점 방향을 x축으로 둠
    따라서 오류 없이 결정적인 왕복 변환이 됩니다.

    Args:
        sv: 속박 궤도(에너지 < 0)의 상태 벡터

    Returns:
        OrbitalElements, 각도는 [0, 2pi)

    Raises:
        ValueError: 비속박 궤도이거나 각운동량이 0일 때
    """
    r = sv.position
    v = sv.velocity
    r_norm = float(np.linalg.norm(r))
    v2 = float(v @ v)

    energy = v2 / 2.0 - MU / r_norm
    if energy >= 0.0:
        raise ValueError(f"속박 궤도가 아닙니다 (비에너지 {energy:.3f} >= 0)")
    a = -MU / (2.0 * energy)

    h = np.cross(r, v)
    h_norm = float(np.linalg.norm(h))
    if h_norm == 0.0:
        raise ValueError("각운동량이 0입니다 (위치와 속도가 평행)")
    h_hat = h / h_norm

    e_vec = ((v2 - MU / r_norm) * r - float(r @ v) * v) / MU
    e = float(np.linalg.norm(e_vec))
    i = float(np.arccos(np.clip(h_hat[2], -1.0, 1.0)))

    if np.hypot(h_hat[0], h_hat[1]) < DEGENERATE_TOL:
        raan = 0.0
    else:
        raan = float(np.arctan2(h_hat[0], -h_hat[1]))

    node = np.array([np.cos(raan), np.sin(raan), 0.0])
    q_hat = np.cross(h_hat, node)

    if e < DEGENERATE_TOL:
        argp = 0.0
    else:
        argp = float(np.arctan2(e_vec @ q_hat, e_vec @ node))

    latitude = float(np.arctan2(r @ q_hat, r @ node))
    nu = latitude - argp
    E = 2.0 * np.arctan2(np.sqrt(1.0 - e) * np.sin(nu / 2.0), np.sqrt(1.0 + e) * np.cos(nu / 2.0))
    M = E - e * np.sin(E)

    return OrbitalElements(
        a=float(a),
        e=e,
        i=i,
        raan=float(np.mod(raan, TWO_PI)),
        argp=float(np.mod(argp, TWO_PI)),
        mean_anomaly=float(np.mod(M, TWO_PI)),
        epoch=sv.epoch,
    )


def canonical_elements(el: OrbitalElements) -> OrbitalElements:
    """
    같은 궤도를 표준 표현으로 바꿉니다: i in [0, pi], 나머지 각도 [0, 2pi).

    i가 (pi, 2pi)이면 (2pi - i, raan + pi, argp + pi)와 동일한 회전이므로
    위치/속도는 바뀌지 않습니다. 편차 계산 전에 양쪽을 같은 표현으로 맞출 때 사용합니다.
    """
    i = float(np.mod(el.i, TWO_PI))
    raan, argp = el.raan, el.argp
    if i > np.pi:
        i = TWO_PI - i
        raan = raan + np.pi
        argp = argp + np.pi
    return replace(
        el,
        i=i,
        raan=float(np.mod(raan, TWO_PI)),
        argp=float(np.mod(argp, TWO_PI)),
        mean_anomaly=float(np.mod(el.mean_anomaly, TWO_PI)),
    )


def propagate_elements(el: OrbitalElements, to_epoch: float) -> OrbitalElements:
    """2체 전파: 평균근점이각만 n*dt 만큼 진행한 궤도요소를 돌려줍니다."""
    if not np.isfinite(to_epoch):
        raise ValueError(f"전파 시각이 유한하지 않습니다: {to_epoch}")
    dt = (to_epoch - el.epoch) * SECONDS_PER_DAY
    return replace(el, mean_anomaly=el.mean_anomaly + el.mean_motion * dt, epoch=to_epoch)


def propagate(el: Union[OrbitalElements, StateVector], to_epoch: float) -> StateVector:
    """
    Keplerian 전파 (역방향 전파 허용).

    a, e, i, raan, argp는 그대로이고 평균근점이각만 n*dt 만큼 진행합니다.

    Args:
        el: 궤도요소 또는 상태 벡터 (상태 벡터는 먼저 궤도요소로 변환)
        to_epoch: 목표 시각 (mjd2000)

    Returns:
        to_epoch 시각의 StateVector
    """
    if isinstance(el, StateVector):
        el = state_to_elements(el)
    return elements_to_state(propagate_elements(el, to_epoch))


def orbit_frame(sv: StateVector) -> OrbitFrame:
    """
    국소 궤도 좌표계를 계산합니다.

    - in_track: 속도 방향 단위벡터
    - cross_track: 궤도면 법선 (r x v 방향)
    - radial_in_plane: in_track x cross_track, 궤도면 안에서 in_track에 수직 (지구 바깥쪽)

    Raises:
        ValueError: 속도가 0이거나 위치와 속도가 평행할 때
    """
    v_norm = float(np.linalg.norm(sv.velocity))
    if v_norm == 0.0:
        raise ValueError("속도가 0인 상태에서는 궤도 좌표계를 만들 수 없습니다")
    in_track = sv.velocity / v_norm

    h = np.cross(sv.position, sv.velocity)
    h_norm = float(np.linalg.norm(h))
    if h_norm <= 1e-12 * float(np.linalg.norm(sv.position)) * v_norm:
        raise ValueError("위치와 속도가 평행합니다 (퇴화 궤도)")
    cross_track = h / h_norm

    radial_in_plane = np.cross(in_track, cross_track)
    return OrbitFrame(in_track, radial_in_plane, cross_track)


class Trajectory:
    """
    구간별 Keplerian 궤적.

    초기 궤도요소 하나로 시작하고, 기동 시각마다 새 궤도요소 구간을 덧붙입니다.
    시각 t에서는 start <= t 인 마지막 구간이 적용됩니다 (기동 시각에는 기동 후 상태).
    """

    def __init__(self, initial: OrbitalElements):
        self._starts: List[float] = []
        self._elements: List[OrbitalElements] = [initial]

    @property
    def segments(self) -> List[Tuple[float, OrbitalElements]]:
        """(구간 시작 시각, 궤도요소) 목록. 첫 구간의 시작은 -inf."""
        return list(zip([-np.inf] + self._starts, self._elements))

    @property
    def last_start(self) -> float:
        return self._starts[-1] if self._starts else -np.inf

    def appended(self, epoch: float, elements: OrbitalElements) -> "Trajectory":
        """epoch부터 elements를 따르는 새 궤적을 만듭니다 (원본은 그대로)."""
        if epoch < self.last_start:
            raise ValueError(f"구간은 시간순으로 추가해야 합니다: {epoch} < {self.last_start}")
        new = Trajectory(self._elements[0])
        new._starts = self._starts + [float(epoch)]
        new._elements = self._elements + [elements]
        return new

    def _segment_index(self, epochs: np.ndarray) -> np.ndarray:
        return np.searchsorted(np.asarray(self._starts, dtype=float), epochs, side="right")

    def states_at(self, epochs: Sequence[float]) -> Tuple[np.ndarray, np.ndarray]:
        """
        여러 시각의 위치/속도를 한번에 계산합니다.

        Args:
            epochs: 시각 배열 (mjd2000)

        Returns:
            (위치 (N, 3), 속도 (N, 3))
        """
        epochs = np.atleast_1d(np.asarray(epochs, dtype=float))
        positions = np.empty((epochs.size, 3))
        velocities = np.empty((epochs.size, 3))

        index = self._segment_index(epochs)
        for k in np.unique(index):
            mask = index == k
            el = self._elements[k]
            M = el.mean_anomaly + el.mean_motion * (epochs[mask] - el.epoch) * SECONDS_PER_DAY
            positions[mask], velocities[mask] = _rv_from_elements(el, M)

        return positions, velocities

    def state_at(self, epoch: float) -> StateVector:
        positions, velocities = self.states_at([epoch])
        return StateVector(positions[0], velocities[0], float(epoch))

    def elements_at(self, epoch: float) -> OrbitalElements:
        """epoch에 적용되는 구간의 궤도요소를 epoch까지 전파한 접촉 궤도요소."""
        k = int(self._segment_index(np.array([epoch]))[0])
        return propagate_elements(self._elements[k], epoch)
