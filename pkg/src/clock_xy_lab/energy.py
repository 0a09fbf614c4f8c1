"""
Discrete XY energies of spin fields and their rescalings

Every bond sum is taken over unordered nearest-neighbour bonds with both ends in the
region. Totals are built from a histogram of state differences so they do not depend
on site order.
"""

import math
from dataclasses import dataclass

import numpy as np

from clock_xy_lab.lattice_field import Shape, SpinField, bond_steps


@dataclass(frozen=True)
class EnergyBreakdown:
    xy_total: float
    per_bond_max: float
    bond_count: int
    region: dict | None = None


def _step_histogram(field: SpinField, region: Shape | None) -> np.ndarray:
    steps = bond_steps(field, region)
    return np.bincount(steps, minlength=field.circle.n_states)


def _weighted_sum(counts: np.ndarray, table: np.ndarray) -> float:
    used = np.flatnonzero(counts)
    return math.fsum((counts[used] * table[used]).tolist())


def log_eps(epsilon: float) -> float:
    """|log eps| taken as -ln(eps)."""
    return -math.log(epsilon)


def xy_energy(field: SpinField, region: Shape | None = None) -> EnergyBreakdown:
    counts = _step_histogram(field, region)
    table = field.circle.chord_squared_table
    used = np.flatnonzero(counts)
    return EnergyBreakdown(
        xy_total=field.epsilon**2 * _weighted_sum(counts, table),
        per_bond_max=float(table[used].max()) if used.size else 0.0,
        bond_count=int(counts.sum()),
        region=None if region is None else region.to_dict(),
    )


def rescaled_energy(
    field: SpinField, theta: float | None = None, region: Shape | None = None
) -> float:
    """XY energy divided by eps * theta; theta defaults to the field's own circle."""
    theta = field.circle.theta if theta is None else theta
    if theta <= 0:
        raise ValueError(f"theta must be positive, got {theta}")
    return xy_energy(field, region).xy_total / (field.epsilon * theta)


def vortex_cost(epsilon: float, theta: float, M: int) -> float:
    return 2 * math.pi * M * log_eps(epsilon) * epsilon / theta


def excess_energy(
    field: SpinField, theta: float | None, M: int, region: Shape | None = None
) -> float:
    if M < 0:
        raise ValueError(f"Number of vortices must be nonnegative, got {M}")
    theta = field.circle.theta if theta is None else theta
    return rescaled_energy(field, theta, region) - vortex_cost(field.epsilon, theta, M)


def log_rescaled_energy(field: SpinField, region: Shape | None = None) -> float:
    """XY energy over eps^2 |log eps|, the classical vortex scaling."""
    return xy_energy(field, region).xy_total / (field.epsilon**2 * log_eps(field.epsilon))


def geodesic_bond_sum(field: SpinField, region: Shape | None = None) -> float:
    counts = _step_histogram(field, region)
    return field.epsilon * _weighted_sum(counts, field.circle.distance_table)


def euclidean_bond_sum(field: SpinField, region: Shape | None = None) -> float:
    counts = _step_histogram(field, region)
    return field.epsilon * _weighted_sum(counts, field.circle.chord_table)


def bv_lower_bound(field: SpinField, region: Shape | None = None) -> float:
    theta = field.circle.theta
    return 2 * math.sin(theta / 2) / theta * euclidean_bond_sum(field, region)


def classify_regime(epsilon: float, theta: float) -> str:
    if theta <= epsilon:
        return "theta<<eps"
    ratio = theta / (epsilon * log_eps(epsilon))
    if ratio < 0.25:
        return "eps<<theta<<eps|log eps|"
    if ratio <= 4.0:
        return "theta~eps|log eps|"
    return "theta>>eps|log eps|"
