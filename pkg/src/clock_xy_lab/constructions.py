"""
Explicit spin-field constructions: sector vortices, geodesic boundary data on cell sides and
the cell-by-cell recovery of a piecewise-constant map
"""

import math
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from structlog import get_logger

from clock_xy_lab.circle_geometry import (
    TWO_PI,
    DiscreteCircle,
    UnitVector,
    geo_angles,
    mid_angles,
    project_angles,
    wrap_psi,
)
from clock_xy_lab.lattice_field import CellField, LatticeDomain, SpinField, field_from_states
from clock_xy_lab.utils import ConstructionError

LOGGER = get_logger(__name__)

DEFAULT_C0 = TWO_PI + 0.1
# nearest sides are tried in this order, the first minimum wins
SIDE_ORDER = ("bottom", "right", "top", "left")
SIDE_STARTS = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])
SIDE_HORIZONTAL = np.array([True, False, True, False])

ValueLookup = Callable[[np.ndarray, np.ndarray], np.ndarray]


def vortex_field(
    center: tuple[float, float],
    sign: int,
    domain: LatticeDomain,
    circle: DiscreteCircle,
    phase: float = 0.0,
) -> SpinField:
    """
    Sector discretisation of exp(i phase) (x - center)/|x - center| for sign +1 and of its
    reflection for sign -1. The center site gets the state of exp(i phase), 0 by default.
    """
    if sign not in (1, -1):
        raise ValueError(f"Vortex sign must be +1 or -1, got {sign}")
    x, y = domain.coordinates()
    dx = x[domain.mask] - center[0]
    dy = y[domain.mask] - center[1]
    # sign -1 takes the sector of the point reflected across the horizontal axis
    states = project_angles(np.arctan2(sign * dy, dx) + phase, circle).astype(np.int64)
    states[(dx == 0) & (dy == 0)] = project_angles(phase, circle)
    return field_from_states(domain, circle, states)


def radius_r_eps(epsilon: float, theta: float) -> float:
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return 4 * epsilon / theta


def datum_angles(v1, v2, v3, t, width, length):
    """
    Boundary datum along a side of the given length: v1 up to width, a geodesic ramp to v2,
    the v2 plateau, a ramp to v3 ending width before the far end, then v3.
    """
    v1 = np.asarray(v1, dtype=float)
    v2 = np.asarray(v2, dtype=float)
    v3 = np.asarray(v3, dtype=float)
    t = np.asarray(t, dtype=float)
    d12 = np.abs(wrap_psi(v2 - v1))
    d23 = np.abs(wrap_psi(v3 - v2))
    first = geo_angles(v1, v2, d12 / width * (t - width))
    second = geo_angles(v2, v3, d23 / width * (t - (length - 2 * width)))
    return np.where(t < 0.5 * length, first, second)


@dataclass(frozen=True)
class BoundaryDatum:
    side: tuple[tuple[float, float], tuple[float, float]]
    values: tuple[UnitVector, UnitVector, UnitVector]
    c0: float
    theta: float
    epsilon: float
    scale: float = 1.0

    def __post_init__(self):
        if self.length < 4 * self.ramp_width:
            raise ConstructionError(
                f"Side of length {self.length} is shorter than four ramps of {self.ramp_width}"
            )

    @property
    def length(self) -> float:
        return math.dist(*self.side)

    @property
    def ramp_width(self) -> float:
        return self.c0 * self.epsilon / self.theta * self.scale

    def angles(self, t):
        v1, v2, v3 = (v.angle for v in self.values)
        return datum_angles(v1, v2, v3, t, self.ramp_width, self.length)

    def evaluate(self, t: float) -> UnitVector:
        return UnitVector(float(self.angles(t)))


def boundary_datum(
    side: tuple[tuple[float, float], tuple[float, float]],
    traces: tuple[UnitVector, UnitVector],
    corners: tuple[UnitVector, UnitVector],
    c0: float,
    epsilon: float,
    theta: float,
    scale: float = 1.0,
) -> BoundaryDatum:
    middle = UnitVector(float(mid_angles(traces[0].angle, traces[1].angle)))
    return BoundaryDatum(side, (corners[0], middle, corners[1]), c0, theta, epsilon, scale)


def nearest_side(lx, ly, size):
    """Index into SIDE_ORDER of the closest side of [0, size)^2 and the distance to it."""
    distances = np.stack([ly, size - lx, size - ly, lx])
    side = np.argmin(distances, axis=0)
    return side, np.take_along_axis(distances, side[None, :], axis=0)[0]


def side_data(sx, sy, horizontal, length, value_at: ValueLookup):
    """(corner at start, mid of the traces, corner at end) of the given sides."""
    quarter = 0.25 * length
    ex = np.where(horizontal, length, 0.0)
    ey = length - ex
    start = value_at(sx + quarter, sy + quarter)
    end = value_at(sx + ex + quarter, sy + ey + quarter)
    # traces are (below, above) for horizontal sides and (left, right) for vertical ones
    mx, my = sx + 0.5 * ex, sy + 0.5 * ey
    ox, oy = 0.5 * ey, 0.5 * ex
    first = value_at(mx - ox, my - oy)
    second = value_at(mx + ox, my + oy)
    return start, mid_angles(first, second), end


def interpolate_cells(
    x,
    y,
    corner_x,
    corner_y,
    size: float,
    scale: float,
    values,
    value_at: ValueLookup,
    c0: float,
    epsilon: float,
    theta: float,
    split_side: Callable | None = None,
):
    """
    Angles of the geodesic interpolation between the boundary datum at the nearest side
    and the cell value. split_side(sx, sy, horizontal, size) marks sides that are made of
    two half-length sides of the next finer level.
    """
    side, distance = nearest_side(x - corner_x, y - corner_y, size)
    horizontal = SIDE_HORIZONTAL[side]
    sx = corner_x + SIDE_STARTS[side, 0] * size
    sy = corner_y + SIDE_STARTS[side, 1] * size
    t = np.where(horizontal, x - corner_x, y - corner_y)
    length = np.full(t.shape, float(size))
    side_scale = np.full(t.shape, float(scale))
    if split_side is not None:
        split = split_side(sx, sy, horizontal, size)
        half = 0.5 * size
        shift = np.where(split, np.floor(t / half) * half, 0.0)
        sx = sx + np.where(horizontal, shift, 0.0)
        sy = sy + np.where(horizontal, 0.0, shift)
        t = t - shift
        length = np.where(split, half, length)
        side_scale = np.where(split, 0.5 * scale, side_scale)
    v1, v2, v3 = side_data(sx, sy, horizontal, length, value_at)
    datum = datum_angles(v1, v2, v3, t, c0 * epsilon / theta * side_scale, length)
    return geo_angles(datum, values, theta / (epsilon * scale) * distance)


def check_flat_scales(epsilon: float, theta: float, lam: float, c0: float):
    if not math.pi * epsilon / theta < lam / 4:
        raise ConstructionError(
            f"Cells of side {lam} are too small for eps={epsilon}, theta={theta}"
        )
    if lam < 4 * c0 * epsilon / theta:
        raise ConstructionError(
            f"Cell side {lam} is shorter than four ramps of width {c0 * epsilon / theta}"
        )


def almost_continuity(pc: CellField) -> float:
    """Largest geodesic distance between the values of edge-adjacent cells."""
    values = pc.values
    gaps = [
        np.abs(wrap_psi(np.diff(values, axis=axis)))
        for axis in (0, 1)
        if values.shape[axis] > 1
    ]
    return max((float(np.max(g)) for g in gaps), default=0.0)


def recovery_flat(
    pc: CellField,
    domain: LatticeDomain,
    circle: DiscreteCircle,
    c0: float = DEFAULT_C0,
    delta: float | None = None,
) -> SpinField:
    epsilon, theta, lam = domain.epsilon, circle.theta, pc.lam
    check_flat_scales(epsilon, theta, lam, c0)
    if delta is not None and almost_continuity(pc) > delta:
        raise ConstructionError(
            f"Adjacent cells differ by {almost_continuity(pc)}, more than delta={delta}"
        )
    x, y = domain.coordinates()
    x, y = x[domain.mask], y[domain.mask]
    zx, zy = pc.cell_of(x, y)
    angles = interpolate_cells(
        x,
        y,
        lam * zx,
        lam * zy,
        lam,
        1.0,
        pc.value_at_cells(zx, zy),
        pc.value_at_points,
        c0,
        epsilon,
        theta,
    )
    LOGGER.info(f"Built flat recovery on {domain.n_sites} sites, lambda={lam}")
    return field_from_states(domain, circle, project_angles(angles, circle))
