"""
Discrete vorticity, atomic vorticity measures, flat distance and winding numbers
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment, linprog
from scipy.sparse import coo_array
from structlog import get_logger

from clock_xy_lab.circle_geometry import TWO_PI, wrap_psi, wrap_steps
from clock_xy_lab.lattice_field import Shape, SpinField
from clock_xy_lab.utils import ResolutionError

LOGGER = get_logger(__name__)

Point = tuple[float, float]


@dataclass(frozen=True)
class VorticityMeasure:
    atoms: list[tuple[Point, int]]
    domain: Shape | None = None

    def __post_init__(self):
        atoms = [((float(p[0]), float(p[1])), int(q)) for p, q in self.atoms if int(q) != 0]
        object.__setattr__(self, "atoms", atoms)

    @property
    def total_variation(self) -> int:
        return sum(abs(q) for _, q in self.atoms)

    @property
    def total_charge(self) -> int:
        return sum(q for _, q in self.atoms)

    def negated(self) -> "VorticityMeasure":
        return VorticityMeasure([(p, -q) for p, q in self.atoms], self.domain)


def plaquette_charges(grid: np.ndarray, n_states: int) -> np.ndarray:
    """
    Charges of all plaquettes on the last two axes of a state grid. Entry [..., j, i] belongs
    to the plaquette with bottom-left corner [..., j, i]. Corners are walked
    counterclockwise; negative states mark missing sites and are not checked here.
    """
    g = np.asarray(grid, dtype=np.int64)
    a = g[..., :-1, :-1]
    b = g[..., :-1, 1:]
    c = g[..., 1:, 1:]
    d = g[..., 1:, :-1]
    circulation = (
        wrap_steps(b - a, n_states)
        + wrap_steps(c - b, n_states)
        + wrap_steps(d - c, n_states)
        + wrap_steps(a - d, n_states)
    )
    return circulation // n_states


def _complete_plaquettes(mask: np.ndarray) -> np.ndarray:
    return mask[:-1, :-1] & mask[:-1, 1:] & mask[1:, 1:] & mask[1:, :-1]


def plaquette_vorticity(field: SpinField, corner: tuple[int, int]) -> int | None:
    """Charge of the plaquette with bottom-left site corner, None when a corner is missing."""
    i0, j0 = field.domain.offset
    col, row = corner[0] - i0, corner[1] - j0
    ny, nx = field.grid.shape
    if not (0 <= col < nx - 1 and 0 <= row < ny - 1):
        return None
    block = field.grid[row : row + 2, col : col + 2]
    if (block < 0).any():
        return None
    return int(plaquette_charges(block, field.circle.n_states)[0, 0])


def vorticity_measure(field: SpinField) -> VorticityMeasure:
    charges = plaquette_charges(field.grid, field.circle.n_states)
    charges = np.where(_complete_plaquettes(field.domain.mask), charges, 0)
    rows, cols = np.nonzero(charges)
    i0, j0 = field.domain.offset
    eps = field.epsilon
    atoms = [
        ((eps * (i0 + c + 1), eps * (j0 + r + 1)), int(charges[r, c]))
        for r, c in zip(rows, cols, strict=True)
    ]
    return VorticityMeasure(atoms, field.domain.shape)


def boundary_winding(
    field: SpinField, lower: tuple[int, int], upper: tuple[int, int]
) -> int:
    """Winding of the states along the counterclockwise boundary of the index box."""
    i0, j0 = field.domain.offset
    c0, r0 = lower[0] - i0, lower[1] - j0
    c1, r1 = upper[0] - i0, upper[1] - j0
    if c1 <= c0 or r1 <= r0:
        raise ValueError(f"Degenerate index box {lower} - {upper}")
    g = field.grid
    loop = np.concatenate(
        [
            g[r0, c0:c1],
            g[r0:r1, c1],
            g[r1, c1:c0:-1],
            g[r1:r0:-1, c0],
        ]
    ).astype(np.int64)
    if (loop < 0).any():
        raise ValueError("Boundary loop leaves the domain")
    steps = wrap_steps(np.roll(loop, -1) - loop, field.circle.n_states)
    return int(steps.sum()) // field.circle.n_states


def _unit_atoms(mu: VorticityMeasure, nu: VorticityMeasure):
    positive: list[Point] = []
    negative: list[Point] = []
    for measure, sign in ((mu, 1), (nu, -1)):
        for point, charge in measure.atoms:
            target = positive if sign * charge > 0 else negative
            target.extend([point] * abs(charge))
    return positive, negative


def flat_distance(mu: VorticityMeasure, nu: VorticityMeasure, domain: Shape) -> float:
    """
    Flat distance between two atomic measures, solved as an assignment of unit atoms of
    mu - nu: positive to negative at cost min(|x - y|, 2), or out through the boundary
    at cost min(dist(x, boundary), 1).
    """
    positive, negative = _unit_atoms(mu, nu)
    p, n = len(positive), len(negative)
    if p + n == 0:
        return 0.0
    pos = np.array(positive, dtype=float).reshape(p, 2)
    neg = np.array(negative, dtype=float).reshape(n, 2)
    exit_pos = np.minimum(domain.boundary_distance(pos[:, 0], pos[:, 1]), 1.0)
    exit_neg = np.minimum(domain.boundary_distance(neg[:, 0], neg[:, 1]), 1.0)
    cost = np.zeros((p + n, n + p))
    if p and n:
        gaps = np.hypot(pos[:, None, 0] - neg[None, :, 0], pos[:, None, 1] - neg[None, :, 1])
        cost[:p, :n] = np.minimum(gaps, 2.0)
    cost[:p, n:] = exit_pos[:, None]
    cost[p:, :n] = exit_neg[None, :]
    rows, cols = linear_sum_assignment(cost)
    return math.fsum(cost[rows, cols].tolist())


def flat_distance_lp(
    mu: VorticityMeasure, nu: VorticityMeasure, domain: Shape, grid: int = 0
) -> float:
    """
    Dual form: maximise the integral of a 1-Lipschitz phi against mu - nu with
    |phi| <= min(1, dist(x, boundary)), phi tested on the atoms plus a grid x grid lattice
    over the domain bounds.
    """
    charges: dict[Point, int] = {}
    for measure, sign in ((mu, 1), (nu, -1)):
        for point, charge in measure.atoms:
            charges[point] = charges.get(point, 0) + sign * charge
    points = list(charges)
    weights = [charges[p] for p in points]
    if grid > 0:
        xmin, ymin, xmax, ymax = domain.bounds()
        for gx in np.linspace(xmin, xmax, grid):
            for gy in np.linspace(ymin, ymax, grid):
                if (float(gx), float(gy)) not in charges:
                    points.append((float(gx), float(gy)))
                    weights.append(0)
    if not any(weights):
        return 0.0
    xy = np.array(points, dtype=float)
    size = len(points)
    first, second = np.nonzero(~np.eye(size, dtype=bool))
    pairs = first.size
    rows = np.repeat(np.arange(pairs), 2)
    cols = np.stack([first, second], axis=1).ravel()
    data = np.tile([1.0, -1.0], pairs)
    a_ub = coo_array((data, (rows, cols)), shape=(pairs, size)).tocsr()
    b_ub = np.hypot(xy[first, 0] - xy[second, 0], xy[first, 1] - xy[second, 1])
    caps = np.minimum(domain.boundary_distance(xy[:, 0], xy[:, 1]), 1.0)
    result = linprog(
        -np.asarray(weights, dtype=float),
        A_ub=a_ub,
        b_ub=b_ub,
        bounds=list(zip(-caps, caps, strict=True)),
        method="highs",
    )
    if not result.success:
        raise RuntimeError(f"Flat distance LP failed: {result.message}")
    return float(-result.fun)


def winding_number(
    spin_map,
    center: Point,
    radius: float,
    samples: int = 512,
    max_step: float = math.pi,
) -> int:
    if radius <= 0 or samples < 3:
        raise ValueError("Winding loop needs a positive radius and at least 3 samples")
    t = TWO_PI * np.arange(samples) / samples
    phases = spin_map.angle(center[0] + radius * np.cos(t), center[1] + radius * np.sin(t))
    increments = wrap_psi(np.roll(phases, -1) - phases)
    if np.max(np.abs(increments)) >= max_step:
        raise ResolutionError(
            f"{samples} samples do not resolve the loop of radius {radius} around {center}"
        )
    return round(math.fsum(increments.tolist()) / TWO_PI)
