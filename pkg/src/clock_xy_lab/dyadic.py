"""
Dyadic layers around a singularity and the recovery of a map with vortices

Around a singularity x_h on the lambda grid the square Q_{-1} = x_h + [-2^m lam, 2^m lam)^2
is split into nested squares Q_k. The layer Q_{k-1} minus Q_k is tiled by cubes of side
2^-k lam; the innermost square Q_{k_eps - 1} carries the sector vortex.
"""

import math
from dataclasses import dataclass

import numpy as np
from structlog import get_logger

from clock_xy_lab.circle_geometry import TWO_PI, DiscreteCircle, project_angles
from clock_xy_lab.constructions import (
    check_flat_scales,
    interpolate_cells,
    recovery_flat,
    vortex_field,
)
from clock_xy_lab.lattice_field import CellField, LatticeDomain, SpinField, field_from_states
from clock_xy_lab.maps import SpinMap, VortexMap
from clock_xy_lab.utils import ConstructionError
from clock_xy_lab.vorticity import VorticityMeasure

LOGGER = get_logger(__name__)

VORTEX_C0 = 393.0
# lambda must exceed this multiple of eps / theta before layers are built
SCALE_SEPARATION = 100.0


def cutoff_index(theta: float) -> int:
    """k with 2^-k <= theta < 2^(-k+1)."""
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    _, exponent = math.frexp(theta)
    return 1 - exponent


def maximal_level(lam: float, eta: float) -> int:
    """Largest m with 2^m lam <= eta / 2."""
    if lam <= 0 or eta <= 0:
        raise ValueError("lambda and eta must be positive")
    m = -1
    while 2 ** (m + 1) * lam <= eta / 2:
        m += 1
    return m


@dataclass(frozen=True)
class DyadicDecomposition:
    center: tuple[float, float]
    lam: float
    m_lambda: int
    eta: float
    theta: float
    k_eps: int

    def half_side(self, k: int) -> float:
        if k < -2:
            raise ValueError(f"No square Q_{k}")
        if k == -2:
            return (2**self.m_lambda + 1) * self.lam
        if k == -1:
            return 2**self.m_lambda * self.lam
        return (2**self.m_lambda - 2 + 2.0**-k) * self.lam

    def cube_side(self, k: int) -> float:
        return 2.0 ** -max(k, 0) * self.lam

    def contains(self, x, y, k: int = -1):
        """Membership in the half-open square Q_k."""
        h = self.half_side(k)
        dx = np.asarray(x) - self.center[0]
        dy = np.asarray(y) - self.center[1]
        return (dx >= -h) & (dx < h) & (dy >= -h) & (dy < h)

    def level(self, x, y) -> np.ndarray:
        """-1 outside Q_{-1}; k for points of layer k; k_eps inside the vortex core."""
        level = np.full(np.broadcast(x, y).shape, -1, dtype=np.int64)
        for k in range(self.k_eps + 1):
            level = np.where(self.contains(x, y, k - 1), k, level)
        return level

    def cubes(self, k: int) -> np.ndarray:
        """Bottom-left corners of the cubes tiling layer k, one row per cube."""
        if not 0 <= k < self.k_eps:
            raise ValueError(f"Layer {k} outside 0..{self.k_eps - 1}")
        side = self.cube_side(k)
        outer = round(self.half_side(k - 1) / side)
        inner = round(self.half_side(k) / side)
        a = np.arange(-outer, outer)
        ax, ay = np.meshgrid(a, a)
        inside = (ax >= -inner) & (ax < inner) & (ay >= -inner) & (ay < inner)
        keep = ~inside
        return np.stack(
            [self.center[0] + side * ax[keep], self.center[1] + side * ay[keep]], axis=1
        )


def dyadic_decomposition(
    center: tuple[float, float], lam: float, eta: float, theta: float
) -> DyadicDecomposition:
    m = maximal_level(lam, eta)
    if m < 2:
        raise ConstructionError(f"eta={eta} leaves m={m} < 2 levels for lambda={lam}")
    k_eps = cutoff_index(theta)
    if k_eps < 1:
        raise ConstructionError(f"theta={theta} is too large for dyadic layers")
    return DyadicDecomposition((float(center[0]), float(center[1])), lam, m, eta, theta, k_eps)


class DyadicValues:
    """Piecewise-constant values: cube midpoints inside Q_{-1}, the cell field outside."""

    def __init__(self, decomposition: DyadicDecomposition, spin_map: SpinMap, pc: CellField):
        self.decomposition = decomposition
        self.spin_map = spin_map
        self.pc = pc

    def __call__(self, x, y):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        level = self.decomposition.level(x, y)
        values = self.pc.value_at_points(x, y)
        fine = level >= 1
        if fine.any():
            side = self.decomposition.lam * 2.0 ** -level[fine]
            cx, cy = self.decomposition.center
            mx = cx + side * (np.floor((x[fine] - cx) / side) + 0.5)
            my = cy + side * (np.floor((y[fine] - cy) / side) + 0.5)
            values = values.copy()
            values[fine] = self.spin_map.angle(mx, my)
        return values


def _inner_side_test(decomposition: DyadicDecomposition, k: int):
    h = decomposition.half_side(k)
    cx, cy = decomposition.center

    def split_side(sx, sy, horizontal, size):
        along = np.where(horizontal, sx - cx, sy - cy)
        across = np.where(horizontal, sy - cy, sx - cx)
        on_line = np.isclose(np.abs(across), h, rtol=0.0, atol=1e-12 * decomposition.lam)
        return on_line & (along >= -h) & (along + size <= h)

    return split_side


def _layer_angles(decomposition, values: DyadicValues, x, y, k, c0, epsilon, theta):
    side = decomposition.cube_side(k)
    cx, cy = decomposition.center
    corner_x = cx + side * np.floor((x - cx) / side)
    corner_y = cy + side * np.floor((y - cy) / side)
    cube_values = values(corner_x + 0.5 * side, corner_y + 0.5 * side)
    return interpolate_cells(
        x,
        y,
        corner_x,
        corner_y,
        side,
        side / decomposition.lam,
        cube_values,
        values,
        c0,
        epsilon,
        theta,
        split_side=_inner_side_test(decomposition, k),
    )


def core_phase(spin_map: SpinMap, center: tuple[float, float], charge: int, lam: float) -> float:
    """Phase the map keeps at center once its own vortex factor is divided out."""
    px = center[0] + 1e-9 * lam
    rest = spin_map.angle(px, center[1]) - VortexMap(center, charge).angle(px, center[1])
    phase = float(np.remainder(rest, TWO_PI))
    # rounding noise of an exact vortex must not turn every sector
    return 0.0 if min(phase, TWO_PI - phase) < 1e-12 else phase


def check_singularities(mu: VorticityMeasure, lam: float, eta: float):
    points = [p for p, _ in mu.atoms]
    for point, charge in mu.atoms:
        if abs(charge) != 1:
            raise ConstructionError(f"Singularity at {point} has charge {charge}, not +-1")
        for coordinate in point:
            if abs(coordinate / lam - round(coordinate / lam)) > 1e-9:
                raise ConstructionError(f"Singularity {point} is not on the lambda grid")
    for a in range(len(points)):
        for b in range(a + 1, len(points)):
            if math.dist(points[a], points[b]) < 2 * eta:
                raise ConstructionError(
                    f"Singularities {points[a]} and {points[b]} are closer than 2 eta"
                )


def recovery_with_vortices(
    spin_map: SpinMap,
    mu: VorticityMeasure,
    lam: float,
    eta: float,
    domain: LatticeDomain,
    circle: DiscreteCircle,
    c0: float = VORTEX_C0,
) -> SpinField:
    epsilon, theta = domain.epsilon, circle.theta
    check_singularities(mu, lam, eta)
    decompositions = [
        (dyadic_decomposition(point, lam, eta, theta), charge) for point, charge in mu.atoms
    ]
    x, y = domain.coordinates()
    x, y = x[domain.mask], y[domain.mask]
    levels = [d.level(x, y) for d, _ in decompositions]
    in_core = np.zeros(x.shape, dtype=bool)
    in_layers = np.zeros(x.shape, dtype=bool)
    for (decomposition, _), level in zip(decompositions, levels, strict=True):
        in_core |= level == decomposition.k_eps
        in_layers |= (level >= 0) & (level < decomposition.k_eps)
    flat_part = ~(in_core | in_layers)

    pc = None
    states = np.zeros(x.shape, dtype=np.int64)
    if in_layers.any() or flat_part.any():
        if not epsilon / theta < lam / SCALE_SEPARATION:
            raise ConstructionError(
                f"eps/theta={epsilon / theta} is not below lambda/{SCALE_SEPARATION}"
            )
        check_flat_scales(epsilon, theta, lam, c0)
        pc = CellField.from_map(spin_map, lam, domain.shape.bounds())
        if flat_part.any():
            states = recovery_flat(pc, domain, circle, c0).states.astype(np.int64)

    for (decomposition, charge), level in zip(decompositions, levels, strict=True):
        core = level == decomposition.k_eps
        if core.any():
            phase = core_phase(spin_map, decomposition.center, charge, lam)
            vortex = vortex_field(decomposition.center, charge, domain, circle, phase)
            states[core] = vortex.states[core]
        if pc is None:
            continue
        values = DyadicValues(decomposition, spin_map, pc)
        for k in range(decomposition.k_eps):
            layer = level == k
            if not layer.any():
                continue
            angles = _layer_angles(
                decomposition, values, x[layer], y[layer], k, c0, epsilon, theta
            )
            states[layer] = project_angles(angles, circle)
    LOGGER.info(
        f"Built vortex recovery with {len(decompositions)} singularities on {domain.n_sites} sites"
    )
    return field_from_states(domain, circle, states)


def matching_ring(domain: LatticeDomain, decomposition: DyadicDecomposition) -> np.ndarray:
    """Row-major site mask of the sites within one bond of the boundary of Q_{-1}."""
    x, y = domain.coordinates()
    cx, cy = decomposition.center
    h = decomposition.half_side(-1)
    r = np.maximum(np.abs(x[domain.mask] - cx), np.abs(y[domain.mask] - cy))
    return (r >= h - domain.epsilon) & (r <= h + domain.epsilon)
