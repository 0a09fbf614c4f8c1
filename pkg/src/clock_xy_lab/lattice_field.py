"""
Lattice domains, spin fields on them, bonds, jump sets and piecewise-constant cell fields

Sites are eps * (i, j) with integer i, j. Grids are stored as (ny, nx) arrays indexed
[row j, column i], so row-major order walks x fastest.
"""

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, ClassVar

import numpy as np

from clock_xy_lab.circle_geometry import (
    DiscreteCircle,
    UnitVector,
    geodesic_distance,
    project_angles,
)

if TYPE_CHECKING:
    from clock_xy_lab.maps import SpinMap


@dataclass(frozen=True)
class Rectangle:
    """Half-open box [lower, upper) per axis."""

    lower: tuple[float, float]
    upper: tuple[float, float]
    tag: ClassVar[str] = "rectangle"

    def __post_init__(self):
        if not (self.upper[0] > self.lower[0] and self.upper[1] > self.lower[1]):
            raise ValueError(f"Degenerate rectangle {self.lower} - {self.upper}")

    def bounds(self) -> tuple[float, float, float, float]:
        return (self.lower[0], self.lower[1], self.upper[0], self.upper[1])

    def contains(self, x, y):
        lx, ly, ux, uy = self.bounds()
        return (x >= lx) & (x < ux) & (y >= ly) & (y < uy)

    def signed_distance(self, x, y):
        lx, ly, ux, uy = self.bounds()
        dx = np.maximum(lx - np.asarray(x, dtype=float), np.asarray(x, dtype=float) - ux)
        dy = np.maximum(ly - np.asarray(y, dtype=float), np.asarray(y, dtype=float) - uy)
        outside = np.hypot(np.maximum(dx, 0.0), np.maximum(dy, 0.0))
        return outside + np.minimum(np.maximum(dx, dy), 0.0)

    def boundary_distance(self, x, y):
        return np.maximum(-self.signed_distance(x, y), 0.0)

    def to_dict(self) -> dict[str, Any]:
        return {"type": self.tag, "lower": list(self.lower), "upper": list(self.upper)}


@dataclass(frozen=True, init=False)
class Square(Rectangle):
    origin: tuple[float, float]
    side: float
    tag: ClassVar[str] = "square"

    def __init__(self, origin: tuple[float, float], side: float):
        if side <= 0:
            raise ValueError(f"Square side must be positive, got {side}")
        origin = (float(origin[0]), float(origin[1]))
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "side", float(side))
        object.__setattr__(self, "lower", origin)
        object.__setattr__(self, "upper", (origin[0] + side, origin[1] + side))

    def to_dict(self) -> dict[str, Any]:
        return {"type": self.tag, "origin": list(self.origin), "side": self.side}


@dataclass(frozen=True)
class Ball:
    """Closed disk."""

    center: tuple[float, float]
    radius: float
    tag: ClassVar[str] = "ball"

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError(f"Ball radius must be positive, got {self.radius}")

    def bounds(self) -> tuple[float, float, float, float]:
        cx, cy = self.center
        return (cx - self.radius, cy - self.radius, cx + self.radius, cy + self.radius)

    def contains(self, x, y):
        cx, cy = self.center
        return (x - cx) ** 2 + (y - cy) ** 2 <= self.radius**2

    def signed_distance(self, x, y):
        cx, cy = self.center
        return np.hypot(np.asarray(x, dtype=float) - cx, np.asarray(y, dtype=float) - cy) - (
            self.radius
        )

    def boundary_distance(self, x, y):
        return np.maximum(-self.signed_distance(x, y), 0.0)

    def to_dict(self) -> dict[str, Any]:
        return {"type": self.tag, "center": list(self.center), "radius": self.radius}


Shape = Rectangle | Ball


def shape_from_dict(shape_config: dict) -> Shape:
    match shape_config["type"]:
        case "square":
            return Square(tuple(shape_config["origin"]), shape_config["side"])
        case "rectangle":
            return Rectangle(tuple(shape_config["lower"]), tuple(shape_config["upper"]))
        case "ball":
            return Ball(tuple(shape_config["center"]), shape_config["radius"])
        case _:
            raise ValueError(f"Unknown shape type {shape_config['type']}")


@dataclass(frozen=True, eq=False)
class LatticeDomain:
    epsilon: float
    shape: Shape
    # integer coordinates (i, j) of grid cell [0, 0]
    offset: tuple[int, int]
    mask: np.ndarray

    @property
    def dims(self) -> tuple[int, int]:
        ny, nx = self.mask.shape
        return (nx, ny)

    @property
    def n_sites(self) -> int:
        return int(self.mask.sum())

    @property
    def bond_count(self) -> int:
        horizontal, vertical = bond_masks(self)
        return int(horizontal.sum() + vertical.sum())

    def index_grids(self) -> tuple[np.ndarray, np.ndarray]:
        ny, nx = self.mask.shape
        i = np.arange(nx, dtype=np.int64) + self.offset[0]
        j = np.arange(ny, dtype=np.int64) + self.offset[1]
        return np.broadcast_to(i[None, :], (ny, nx)), np.broadcast_to(j[:, None], (ny, nx))

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        i, j = self.index_grids()
        return i * self.epsilon, j * self.epsilon

    def sites(self) -> np.ndarray:
        """Integer coordinates of the sites, row-major."""
        i, j = self.index_grids()
        return np.stack([i[self.mask], j[self.mask]], axis=1)

    def region_mask(self, region: Shape | None = None) -> np.ndarray:
        if region is None:
            return self.mask
        x, y = self.coordinates()
        return self.mask & region.contains(x, y)


def build_domain(shape: Shape, epsilon: float) -> LatticeDomain:
    if epsilon <= 0:
        raise ValueError(f"Lattice spacing must be positive, got {epsilon}")
    xmin, ymin, xmax, ymax = shape.bounds()
    i = np.arange(math.floor(xmin / epsilon) - 1, math.ceil(xmax / epsilon) + 2, dtype=np.int64)
    j = np.arange(math.floor(ymin / epsilon) - 1, math.ceil(ymax / epsilon) + 2, dtype=np.int64)
    mask = np.asarray(shape.contains(i[None, :] * epsilon, j[:, None] * epsilon))
    if not mask.any():
        raise ValueError(f"No lattice site of spacing {epsilon} inside {shape.to_dict()}")
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    mask = mask[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1].copy()
    mask.flags.writeable = False
    return LatticeDomain(
        epsilon=epsilon,
        shape=shape,
        offset=(int(i[cols[0]]), int(j[rows[0]])),
        mask=mask,
    )


def bond_masks(domain: LatticeDomain, region: Shape | None = None):
    """Horizontal and vertical bonds (left/bottom endpoint indexed) with both ends inside."""
    inside = domain.region_mask(region)
    return inside[:, :-1] & inside[:, 1:], inside[:-1, :] & inside[1:, :]


@dataclass(frozen=True, eq=False)
class SpinField:
    domain: LatticeDomain
    circle: DiscreteCircle
    grid: np.ndarray

    def __post_init__(self):
        grid = np.array(self.grid, dtype=np.int32, copy=True)
        if grid.shape != self.domain.mask.shape:
            raise ValueError(
                f"State grid of shape {grid.shape} does not match domain {self.domain.mask.shape}"
            )
        states = grid[self.domain.mask]
        if states.size and (states.min() < 0 or states.max() >= self.circle.n_states):
            raise ValueError(f"State indices must lie in [0, {self.circle.n_states})")
        grid[~self.domain.mask] = -1
        grid.flags.writeable = False
        object.__setattr__(self, "grid", grid)

    @property
    def epsilon(self) -> float:
        return self.domain.epsilon

    @property
    def states(self) -> np.ndarray:
        return self.grid[self.domain.mask]

    def angle_grid(self) -> np.ndarray:
        return np.where(self.domain.mask, self.circle.angles(self.grid), np.nan)


def field_from_states(domain: LatticeDomain, circle: DiscreteCircle, states) -> SpinField:
    grid = np.full(domain.mask.shape, -1, dtype=np.int32)
    grid[domain.mask] = np.asarray(states, dtype=np.int32)
    return SpinField(domain, circle, grid)


def bond_steps(field: SpinField, region: Shape | None = None) -> np.ndarray:
    """State differences mod N over the bonds inside region."""
    horizontal, vertical = bond_masks(field.domain, region)
    grid = field.grid.astype(np.int64)
    steps_h = (grid[:, 1:] - grid[:, :-1])[horizontal]
    steps_v = (grid[1:, :] - grid[:-1, :])[vertical]
    return np.remainder(np.concatenate([steps_h, steps_v]), field.circle.n_states)


@dataclass(frozen=True)
class JumpRecord:
    bond: tuple[tuple[int, int], tuple[int, int]]
    traces: tuple[UnitVector, UnitVector]
    jump_length: float
    # normal of the jump edge, parallel to the bond
    normal: tuple[float, float]
    edge_measure: float


def jump_set(field: SpinField) -> list[JumpRecord]:
    horizontal, vertical = bond_masks(field.domain)
    grid = field.grid
    i_grid, j_grid = field.domain.index_grids()
    records = []
    for mask, shift, normal in (
        (horizontal & (grid[:, 1:] != grid[:, :-1]), (1, 0), (1.0, 0.0)),
        (vertical & (grid[1:, :] != grid[:-1, :]), (0, 1), (0.0, 1.0)),
    ):
        rows, cols = np.nonzero(mask)
        for r, c in zip(rows, cols, strict=True):
            minus = field.circle.vector(int(grid[r, c]))
            plus = field.circle.vector(int(grid[r + shift[1], c + shift[0]]))
            start = (int(i_grid[r, c]), int(j_grid[r, c]))
            records.append(
                JumpRecord(
                    bond=(start, (start[0] + shift[0], start[1] + shift[1])),
                    traces=(minus, plus),
                    jump_length=geodesic_distance(minus, plus),
                    normal=normal,
                    edge_measure=field.epsilon,
                )
            )
    return records


def norm_2_1(matrix) -> float:
    a = np.asarray(matrix, dtype=float)
    return float(np.hypot(a[0, 0], a[1, 0]) + np.hypot(a[0, 1], a[1, 1]))


def norm_1(vector) -> float:
    v = np.asarray(vector, dtype=float)
    return float(abs(v[0]) + abs(v[1]))


def _check_off_singularities(spin_map: "SpinMap", x: np.ndarray, y: np.ndarray):
    for (sx, sy), _ in spin_map.singularities:
        hit = np.hypot(x - sx, y - sy) < 1e-12
        if np.any(hit):
            raise ValueError(f"Sampling point coincides with the singularity at ({sx}, {sy})")


@dataclass(frozen=True, eq=False)
class CellField:
    """Piecewise-constant angles on the cells lam * z + [0, lam)^2."""

    lam: float
    # cell index (zx, zy) of values[0, 0]
    offset: tuple[int, int]
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float, copy=True)
        if values.ndim != 2 or values.size == 0:
            raise ValueError("Cell values must be a non-empty 2d array")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @classmethod
    def from_map(
        cls, spin_map: "SpinMap", lam: float, bounds: tuple[float, float, float, float]
    ) -> "CellField":
        xmin, ymin, xmax, ymax = bounds
        zx = np.arange(math.floor(xmin / lam) - 1, math.floor(xmax / lam) + 2)
        zy = np.arange(math.floor(ymin / lam) - 1, math.floor(ymax / lam) + 2)
        mx = np.broadcast_to(lam * (zx[None, :] + 0.5), (zy.size, zx.size))
        my = np.broadcast_to(lam * (zy[:, None] + 0.5), (zy.size, zx.size))
        _check_off_singularities(spin_map, mx, my)
        return cls(lam, (int(zx[0]), int(zy[0])), spin_map.angle(mx, my))

    def cell_of(self, x, y) -> tuple[np.ndarray, np.ndarray]:
        return (
            np.floor(np.asarray(x) / self.lam).astype(np.int64),
            np.floor(np.asarray(y) / self.lam).astype(np.int64),
        )

    def value_at_cells(self, zx, zy) -> np.ndarray:
        ny, nx = self.values.shape
        cols = np.clip(np.asarray(zx, dtype=np.int64) - self.offset[0], 0, nx - 1)
        rows = np.clip(np.asarray(zy, dtype=np.int64) - self.offset[1], 0, ny - 1)
        return self.values[rows, cols]

    def value_at_points(self, x, y) -> np.ndarray:
        return self.value_at_cells(*self.cell_of(x, y))

    def as_spin_field(self, circle: DiscreteCircle) -> SpinField:
        """The cells viewed as sites lam * z, states projected."""
        ny, nx = self.values.shape
        shape = Rectangle(
            (self.offset[0] * self.lam, self.offset[1] * self.lam),
            ((self.offset[0] + nx) * self.lam, (self.offset[1] + ny) * self.lam),
        )
        domain = build_domain(shape, self.lam)
        return SpinField(domain, circle, project_angles(self.values, circle))


def sample_map(
    spin_map: "SpinMap",
    domain: LatticeDomain,
    circle: DiscreteCircle,
    mode: str = "at_site",
    lam: float | None = None,
) -> SpinField:
    x, y = domain.coordinates()
    match mode:
        case "at_site":
            px, py = x, y
        case "midpoint_of_cell":
            cell = domain.epsilon if lam is None else lam
            px = cell * (np.floor(x / cell) + 0.5)
            py = cell * (np.floor(y / cell) + 0.5)
        case _:
            raise ValueError(f"Unknown sampling mode {mode}")
    px, py = px[domain.mask], py[domain.mask]
    _check_off_singularities(spin_map, px, py)
    return field_from_states(domain, circle, project_angles(spin_map.angle(px, py), circle))


def l1_distance(field: SpinField, spin_map: "SpinMap") -> float:
    """Sum over sites of eps^2 |u_eps - u| with u sampled at the site's cell midpoint."""
    x, y = field.domain.coordinates()
    half = 0.5 * field.epsilon
    target = spin_map.angle(x[field.domain.mask] + half, y[field.domain.mask] + half)
    spins = field.circle.angles(field.states)
    gaps = 2.0 * np.abs(np.sin(0.5 * (spins - target)))
    return math.fsum(gaps.tolist()) * field.epsilon**2
