"""
Continuum spin maps u: R^2 -> S^1, described by their phase and its gradient

Products are taken in the complex sense, so phases add and degrees add.
"""

import math

import numpy as np
from structlog import get_logger

from clock_xy_lab.circle_geometry import TWO_PI, UnitVector
from clock_xy_lab.utils import ConstructionError

LOGGER = get_logger(__name__)

Point = tuple[float, float]


class SpinMap:
    def angle(self, x, y) -> np.ndarray:
        raise NotImplementedError

    def angle_gradient(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    @property
    def singularities(self) -> list[tuple[Point, int]]:
        return []

    def unit(self, x: float, y: float) -> UnitVector:
        return UnitVector(float(self.angle(np.float64(x), np.float64(y))))


class ConstantMap(SpinMap):
    def __init__(self, angle: float = 0.0):
        self.value = float(angle) % TWO_PI

    def angle(self, x, y):
        return np.full(np.broadcast(x, y).shape, self.value)

    def angle_gradient(self, x, y):
        zeros = np.zeros(np.broadcast(x, y).shape)
        return zeros, zeros.copy()


class VortexMap(SpinMap):
    """((x - c) / |x - c|)^degree; degree -1 is the reflected vortex."""

    def __init__(self, center: Point = (0.0, 0.0), degree: int = 1):
        if degree == 0:
            raise ValueError("A vortex needs a nonzero degree")
        self.center = (float(center[0]), float(center[1]))
        self.degree = int(degree)

    def angle(self, x, y):
        phase = np.arctan2(np.asarray(y) - self.center[1], np.asarray(x) - self.center[0])
        return np.remainder(self.degree * phase, TWO_PI)

    def angle_gradient(self, x, y):
        dx = np.asarray(x, dtype=float) - self.center[0]
        dy = np.asarray(y, dtype=float) - self.center[1]
        r2 = dx**2 + dy**2
        return -self.degree * dy / r2, self.degree * dx / r2

    @property
    def singularities(self):
        return [(self.center, self.degree)]


class RotatedMap(SpinMap):
    """Post-composition with a fixed rotation of the target."""

    def __init__(self, base: SpinMap, rotation: float):
        self.base = base
        self.rotation = float(rotation)

    def angle(self, x, y):
        return np.remainder(self.base.angle(x, y) + self.rotation, TWO_PI)

    def angle_gradient(self, x, y):
        return self.base.angle_gradient(x, y)

    @property
    def singularities(self):
        return self.base.singularities


class HalfPlaneJumpMap(SpinMap):
    """Phase 0 left of the line x = x0, phase jump on and right of it."""

    def __init__(self, x0: float, jump: float):
        self.x0 = float(x0)
        self.jump = float(jump) % TWO_PI

    def angle(self, x, y):
        return np.where(np.asarray(x) >= self.x0, self.jump, 0.0) + np.zeros_like(
            np.asarray(y, dtype=float)
        )

    def angle_gradient(self, x, y):
        zeros = np.zeros(np.broadcast(x, y).shape)
        return zeros, zeros.copy()


class ProductMap(SpinMap):
    def __init__(self, factors: list[SpinMap]):
        if not factors:
            raise ValueError("A product map needs at least one factor")
        self.factors = list(factors)

    def angle(self, x, y):
        total = sum(factor.angle(x, y) for factor in self.factors)
        return np.remainder(total, TWO_PI)

    def angle_gradient(self, x, y):
        gx, gy = self.factors[0].angle_gradient(x, y)
        for factor in self.factors[1:]:
            fx, fy = factor.angle_gradient(x, y)
            gx, gy = gx + fx, gy + fy
        return gx, gy

    @property
    def singularities(self):
        degrees: dict[Point, int] = {}
        for factor in self.factors:
            for point, degree in factor.singularities:
                degrees[point] = degrees.get(point, 0) + degree
        return [(point, degree) for point, degree in degrees.items() if degree != 0]


def vortex_product(positions: list[Point], signs: list[int]) -> SpinMap:
    if len(positions) != len(signs):
        raise ValueError("Every vortex needs a position and a sign")
    if len(positions) == 1:
        return VortexMap(positions[0], signs[0])
    return ProductMap([VortexMap(p, s) for p, s in zip(positions, signs, strict=True)])


def split_degree(spin_map: SpinMap, tau: float, at: Point | None = None) -> SpinMap:
    """
    Replace a singularity of degree d, |d| >= 2, by one of degree d - sign(d) at the
    same point and one of degree sign(d) at distance tau along e1.
    """
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    singularities = spin_map.singularities
    if at is None:
        candidates = [(p, d) for p, d in singularities if abs(d) >= 2]
    else:
        candidates = [(p, d) for p, d in singularities if math.dist(p, at) < 1e-12]
    if not candidates or abs(candidates[0][1]) < 2:
        raise ValueError("No singularity of degree at least 2 to split")
    point, degree = candidates[0]
    sign = 1 if degree > 0 else -1
    new_point = (point[0] + tau, point[1])
    for other, _ in singularities:
        if other != point and math.dist(other, new_point) < 1e-9:
            raise ConstructionError(f"Split point {new_point} collides with a singularity")
    LOGGER.info(f"Splitting degree {degree} at {point} with tau={tau}")
    return ProductMap([spin_map, VortexMap(point, -sign), VortexMap(new_point, sign)])


def split_all(spin_map: SpinMap, tau: float) -> SpinMap:
    """Split repeatedly with tau, tau/2, tau/4, ... until every degree is +-1."""
    while any(abs(d) >= 2 for _, d in spin_map.singularities):
        spin_map = split_degree(spin_map, tau)
        tau /= 2
    return spin_map
