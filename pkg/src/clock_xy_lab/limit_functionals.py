"""
Continuum limit functionals: anisotropic Dirichlet integral, geodesic jump functional and
the parametric integrand
"""

import math
from dataclasses import dataclass, field

import numpy as np
from structlog import get_logger

from clock_xy_lab.circle_geometry import wrap_psi
from clock_xy_lab.lattice_field import CellField, Shape
from clock_xy_lab.maps import SpinMap

LOGGER = get_logger(__name__)

SUBSAMPLES = 8
SIDE_SAMPLES = 64
# rows of quadrature cells evaluated per batch
ROW_BATCH = 256


@dataclass(frozen=True)
class QuadratureSpec:
    refinement: int
    exclusion_radius: float = 0.0
    singularities: list[tuple[float, float]] = field(default_factory=list)

    def __post_init__(self):
        if self.refinement < 1:
            raise ValueError(f"Refinement must be at least 1, got {self.refinement}")
        if self.exclusion_radius < 0:
            raise ValueError("Exclusion radius must be nonnegative")
        points = self.singularities
        for a in range(len(points)):
            for b in range(a + 1, len(points)):
                if math.dist(points[a], points[b]) <= 2 * self.exclusion_radius:
                    raise ValueError(f"Exclusion disks at {points[a]} and {points[b]} overlap")

    @classmethod
    def around(cls, spin_map: SpinMap, refinement: int, exclusion_radius: float):
        return cls(refinement, exclusion_radius, [p for p, _ in spin_map.singularities])


def phi_parametric(xi) -> float | np.ndarray:
    """
    xi = (xi21, xi22, xi11, xi12, xi0bar0, xi00bar) on the last axis; the last two
    components do not enter.
    """
    xi = np.asarray(xi, dtype=float)
    value = np.hypot(xi[..., 0], xi[..., 1]) + np.hypot(xi[..., 2], xi[..., 3])
    if value.ndim == 0:
        return float(value)
    return value


def gradient_norm_2_1(spin_map: SpinMap, x, y) -> np.ndarray:
    """|grad u|_{2,1} = |d_x phase| + |d_y phase| for u = exp(i phase)."""
    gx, gy = spin_map.angle_gradient(x, y)
    return np.abs(gx) + np.abs(gy)


def _kept(region: Shape, quad: QuadratureSpec, x, y):
    keep = np.asarray(region.contains(x, y), dtype=bool)
    for sx, sy in quad.singularities:
        keep &= np.hypot(x - sx, y - sy) > quad.exclusion_radius
    return keep


def anisotropic_dirichlet(spin_map: SpinMap, region: Shape, quad: QuadratureSpec) -> float:
    """
    Midpoint rule for the integral of |grad u|_{2,1} over region minus the exclusion disks.
    Cells cut by the region boundary or a disk are sub-sampled.
    """
    h = 1.0 / quad.refinement
    half_diagonal = h * math.sqrt(0.5)
    xmin, ymin, xmax, ymax = region.bounds()
    nx = math.ceil((xmax - xmin) / h)
    ny = math.ceil((ymax - ymin) / h)
    cx = xmin + h * (np.arange(nx) + 0.5)
    offsets = h * ((np.arange(SUBSAMPLES) + 0.5) / SUBSAMPLES - 0.5)
    ox, oy = (a.ravel() for a in np.meshgrid(offsets, offsets))
    partial_sums = []
    for row0 in range(0, ny, ROW_BATCH):
        cy = ymin + h * (np.arange(row0, min(ny, row0 + ROW_BATCH)) + 0.5)
        x, y = (a.ravel() for a in np.meshgrid(cx, cy))
        depth = -np.asarray(region.signed_distance(x, y), dtype=float)
        clear = depth - half_diagonal
        for sx, sy in quad.singularities:
            gap = np.hypot(x - sx, y - sy) - quad.exclusion_radius
            clear = np.minimum(clear, gap - half_diagonal)
        inner = clear > 0
        if inner.any():
            values = gradient_norm_2_1(spin_map, x[inner], y[inner])
            partial_sums.append(math.fsum(values.tolist()) * h * h)
        cut = ~inner & (depth > -half_diagonal)
        if cut.any():
            px = (x[cut][:, None] + ox[None, :]).ravel()
            py = (y[cut][:, None] + oy[None, :]).ravel()
            keep = _kept(region, quad, px, py)
            if keep.any():
                values = gradient_norm_2_1(spin_map, px[keep], py[keep])
                partial_sums.append(math.fsum(values.tolist()) * (h / SUBSAMPLES) ** 2)
    total = math.fsum(partial_sums)
    LOGGER.info(f"Anisotropic Dirichlet integral at refinement {quad.refinement}: {total}")
    return total


def _side_fraction(region: Shape | None, x0, y0, dx, dy) -> np.ndarray:
    if region is None:
        return np.ones(np.shape(x0))
    t = (np.arange(SIDE_SAMPLES) + 0.5) / SIDE_SAMPLES
    px = np.asarray(x0)[:, None] + dx * t[None, :]
    py = np.asarray(y0)[:, None] + dy * t[None, :]
    return np.asarray(region.contains(px, py), dtype=float).mean(axis=1)


def jump_functional(pc: CellField, region: Shape | None = None) -> float:
    """
    Sum over the sides between stored cells of |side within region| * d(u-, u+) * |nu|_1,
    with |nu|_1 = 1 for the axis-aligned sides.
    """
    lam = pc.lam
    values = pc.values
    zx0, zy0 = pc.offset
    contributions = []
    # vertical sides between horizontal neighbours
    jumps = np.abs(wrap_psi(values[:, 1:] - values[:, :-1]))
    rows, cols = np.nonzero(jumps)
    if rows.size:
        x0 = lam * (zx0 + cols + 1)
        y0 = lam * (zy0 + rows)
        lengths = lam * _side_fraction(region, x0, y0, 0.0, lam)
        contributions.extend((lengths * jumps[rows, cols]).tolist())
    jumps = np.abs(wrap_psi(values[1:, :] - values[:-1, :]))
    rows, cols = np.nonzero(jumps)
    if rows.size:
        x0 = lam * (zx0 + cols)
        y0 = lam * (zy0 + rows + 1)
        lengths = lam * _side_fraction(region, x0, y0, lam, 0.0)
        contributions.extend((lengths * jumps[rows, cols]).tolist())
    return math.fsum(contributions)


def cantor_part(*_) -> float:
    """Every map built here is smooth off points or piecewise constant: no Cantor part."""
    return 0.0


def limit_energy(
    spin_map: SpinMap, pc: CellField | None, region: Shape, quad: QuadratureSpec
) -> float:
    """Dirichlet part of the map plus the jump part of its piecewise-constant component."""
    total = anisotropic_dirichlet(spin_map, region, quad)
    if pc is not None:
        total += jump_functional(pc, region)
    return total + cantor_part(spin_map, region)
