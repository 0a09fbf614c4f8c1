"""
Arithmetic on the unit circle and on the discrete circle of N equi-spaced spins

Angles are radians. Spins of a discrete circle are integer state indices k,
standing for exp(i k theta) with theta = 2 pi / N.
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property

import numpy as np

TWO_PI = 2 * math.pi
# q = phi / theta closer than this to an integer counts as that integer
SNAP_TOLERANCE = 1e-11
# radius inside which geodesics toward a common end point are asserted stable
STABILITY_RADIUS = 0.5


def wrap_psi(t):
    """
    t - Q(t) with Q(t) the closest point of 2 pi Z, ties resolved toward the one of
    minimal modulus, so wrap_psi(pi) = pi and wrap_psi(-pi) = -pi.
    Accepts scalars and numpy arrays.
    """
    t_arr = np.asarray(t, dtype=float)
    wrapped = np.remainder(t_arr + np.pi, TWO_PI) - np.pi
    # ties land on -pi after the shift
    wrapped = np.where(wrapped <= -np.pi, np.copysign(np.pi, t_arr), wrapped)
    if wrapped.ndim == 0:
        return float(wrapped)
    return wrapped


def wrap_steps(dk, n_states: int):
    """Integer form of wrap_psi for differences of state indices, result in [-N/2, N/2]."""
    dk = np.asarray(dk, dtype=np.int64)
    steps = np.remainder(dk, n_states)
    steps = np.where(2 * steps > n_states, steps - n_states, steps)
    steps = np.where((2 * steps == n_states) & (dk < 0), -steps, steps)
    if steps.ndim == 0:
        return int(steps)
    return steps


@dataclass(frozen=True)
class UnitVector:
    angle: float

    def __post_init__(self):
        object.__setattr__(self, "angle", float(self.angle) % TWO_PI)

    @classmethod
    def from_components(cls, x: float, y: float) -> "UnitVector":
        if x == 0 and y == 0:
            raise ValueError("Zero vector has no direction")
        return cls(math.atan2(y, x))

    @property
    def cos(self) -> float:
        return math.cos(self.angle)

    @property
    def sin(self) -> float:
        return math.sin(self.angle)

    @property
    def components(self) -> np.ndarray:
        return np.array([self.cos, self.sin])


E1 = UnitVector(0.0)
E2 = UnitVector(math.pi / 2)


@dataclass(frozen=True)
class DiscreteCircle:
    n_states: int

    def __post_init__(self):
        if int(self.n_states) != self.n_states or self.n_states < 2:
            raise ValueError(f"A discrete circle needs at least 2 states, got {self.n_states}")
        object.__setattr__(self, "n_states", int(self.n_states))

    @classmethod
    def from_theta(cls, theta: float) -> "DiscreteCircle":
        # snap to the closest circle with theta dividing 2 pi
        if theta <= 0:
            raise ValueError(f"theta must be positive, got {theta}")
        return cls(max(2, round(TWO_PI / theta)))

    @property
    def theta(self) -> float:
        return TWO_PI / self.n_states

    def angles(self, states) -> np.ndarray:
        return np.remainder(np.asarray(states, dtype=np.int64), self.n_states) * self.theta

    def vector(self, state: int) -> UnitVector:
        return UnitVector((state % self.n_states) * self.theta)

    @cached_property
    def chord_squared_table(self) -> np.ndarray:
        """|u - v|^2 indexed by the state difference mod N."""
        d = np.arange(self.n_states)
        return 4.0 * np.sin(np.pi * d / self.n_states) ** 2

    @cached_property
    def chord_table(self) -> np.ndarray:
        d = np.arange(self.n_states)
        return 2.0 * np.abs(np.sin(np.pi * d / self.n_states))

    @cached_property
    def distance_table(self) -> np.ndarray:
        """Geodesic distance indexed by the state difference mod N."""
        d = np.arange(self.n_states)
        return np.minimum(d, self.n_states - d) * self.theta


class Orientation(Enum):
    COUNTERCLOCKWISE = 1
    CLOCKWISE = -1


@dataclass(frozen=True)
class GeodesicPath:
    start: UnitVector
    end: UnitVector
    length: float
    orientation: Orientation = field(default=Orientation.COUNTERCLOCKWISE)


def geodesic_distance(u: UnitVector, v: UnitVector) -> float:
    return abs(wrap_psi(v.angle - u.angle))


def geodesic(u: UnitVector, v: UnitVector) -> GeodesicPath:
    delta = wrap_psi(v.angle - u.angle)
    if abs(delta) >= math.pi:
        # antipodal pairs always turn counterclockwise
        return GeodesicPath(u, v, math.pi, Orientation.COUNTERCLOCKWISE)
    orientation = Orientation.COUNTERCLOCKWISE if delta >= 0 else Orientation.CLOCKWISE
    return GeodesicPath(u, v, abs(delta), orientation)


def geo_eval(path: GeodesicPath, t: float) -> UnitVector:
    if t >= path.length:
        return path.end
    step = min(max(t, 0.0), path.length)
    return UnitVector(path.start.angle + path.orientation.value * step)


def midpoint(u: UnitVector, v: UnitVector) -> UnitVector:
    path = geodesic(u, v)
    return geo_eval(path, 0.5 * path.length)


def geo_angles(start, end, t):
    """Vectorised Geo[start, end](t) on angles, returned in [0, 2 pi)."""
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    delta = wrap_psi(end - start)
    delta = np.where(np.abs(delta) >= np.pi, np.pi, delta)
    length = np.abs(delta)
    step = np.clip(t, 0.0, length)
    angle = np.where(t >= length, end, start + np.sign(delta) * step)
    return np.remainder(angle, TWO_PI)


def mid_angles(first, second):
    first = np.asarray(first, dtype=float)
    delta = wrap_psi(np.asarray(second, dtype=float) - first)
    delta = np.where(np.abs(delta) >= np.pi, np.pi, delta)
    return np.remainder(first + 0.5 * delta, TWO_PI)


def project_angles(angles, circle: DiscreteCircle) -> np.ndarray:
    """State index floor(phi / theta) mod N for every angle."""
    q = np.remainder(np.asarray(angles, dtype=float), TWO_PI) / circle.theta
    nearest = np.rint(q)
    k = np.where(np.abs(q - nearest) < SNAP_TOLERANCE, nearest, np.floor(q))
    return np.remainder(k.astype(np.int64), circle.n_states).astype(np.int32)


def project_to_discrete(u: UnitVector, circle: DiscreteCircle) -> int:
    return int(project_angles(u.angle, circle))


def within_stability_radius(
    u1: UnitVector, u2: UnitVector, b: UnitVector, radius: float = STABILITY_RADIUS
) -> bool:
    return max(geodesic_distance(u1, b), geodesic_distance(u2, b)) <= radius
