import math

import numpy as np
import pytest
from clock_xy_lab.circle_geometry import DiscreteCircle
from clock_xy_lab.constructions import vortex_field
from clock_xy_lab.lattice_field import Ball, Square, build_domain, field_from_states, sample_map
from clock_xy_lab.maps import ConstantMap, HalfPlaneJumpMap, VortexMap, vortex_product
from clock_xy_lab.utils import ResolutionError
from clock_xy_lab.vorticity import (
    VorticityMeasure,
    boundary_winding,
    flat_distance,
    flat_distance_lp,
    plaquette_charges,
    plaquette_vorticity,
    vorticity_measure,
    winding_number,
)

UNIT_SQUARE = Square((0.0, 0.0), 1.0)


def grid_field(n: int, circle: DiscreteCircle, states):
    domain = build_domain(Square((0.0, 0.0), float(n)), 1.0)
    return field_from_states(domain, circle, np.asarray(states).ravel())


def random_measure(rng, size: int) -> VorticityMeasure:
    points = rng.uniform(0.02, 0.98, (size, 2))
    charges = rng.choice([-1, 1], size)
    return VorticityMeasure(
        [((float(x), float(y)), int(q)) for (x, y), q in zip(points, charges, strict=True)],
        UNIT_SQUARE,
    )


def test_plaquette_examples():
    circle = DiscreteCircle(4)
    # rows are y, so [[a, b], [d, c]] walks a, b, c, d counterclockwise
    assert plaquette_vorticity(grid_field(2, circle, [[0, 1], [3, 2]]), (0, 0)) == 1
    assert plaquette_vorticity(grid_field(2, circle, [[0, 1], [1, 2]]), (0, 0)) == 0
    assert plaquette_vorticity(grid_field(2, circle, [[0, 0], [0, 0]]), (0, 0)) == 0
    assert plaquette_vorticity(grid_field(2, circle, [[0, 3], [1, 2]]), (0, 0)) == -1


def test_plaquette_with_missing_corner():
    domain = build_domain(Ball((0.0, 0.0), 1.0), 1.0)
    field = field_from_states(domain, DiscreteCircle(4), np.zeros(domain.n_sites))
    assert plaquette_vorticity(field, (0, 0)) is None
    assert plaquette_vorticity(field, (5, 5)) is None


def test_random_plaquettes_are_quantised():
    rng = np.random.default_rng(11)
    for n_states in (2, 3, 4, 7, 50):
        grids = rng.integers(0, n_states, (100_000 // 5, 3, 3))
        charges = plaquette_charges(grids, n_states)
        assert charges.shape == (100_000 // 5, 2, 2)
        assert set(np.unique(charges).tolist()) <= {-1, 0, 1}


def test_discrete_stokes_on_8x8_fields():
    rng = np.random.default_rng(5)
    for _ in range(2000):
        circle = DiscreteCircle(int(rng.integers(2, 9)))
        field = grid_field(8, circle, rng.integers(0, circle.n_states, (8, 8)))
        charges = plaquette_charges(field.grid, circle.n_states)
        assert int(charges.sum()) == boundary_winding(field, (0, 0), (7, 7))
        assert vorticity_measure(field).total_charge == int(charges.sum())


def test_boundary_winding_rejects_bad_boxes():
    field = grid_field(4, DiscreteCircle(4), np.zeros((4, 4)))
    with pytest.raises(ValueError):
        boundary_winding(field, (2, 2), (2, 3))


def test_constant_field_has_no_vorticity():
    domain = build_domain(UNIT_SQUARE, 0.125)
    field = field_from_states(domain, DiscreteCircle(5), np.zeros(domain.n_sites))
    measure = vorticity_measure(field)
    assert measure.atoms == []
    assert measure.total_variation == 0


@pytest.mark.parametrize("sign", [1, -1])
def test_vortex_field_carries_a_single_atom(sign):
    epsilon = 1 / 32
    domain = build_domain(Square((-0.5, -0.5), 1.0), epsilon)
    for n_states in (8, 16, 33):
        field = vortex_field((0.0, 0.0), sign, domain, DiscreteCircle(n_states))
        measure = vorticity_measure(field)
        assert len(measure.atoms) == 1
        point, charge = measure.atoms[0]
        assert charge == sign
        assert math.dist(point, (0.0, 0.0)) <= 2 * epsilon


def test_degree_two_sampled_map():
    epsilon = 1 / 32
    domain = build_domain(Square((-0.5, -0.5), 1.0), epsilon)
    center = (epsilon / 2, epsilon / 2)
    spin_map = vortex_product([center, center], [1, 1])
    field = sample_map(spin_map, domain, DiscreteCircle(32))
    measure = vorticity_measure(field)
    assert measure.total_charge == 2
    assert all(abs(q) == 1 for _, q in measure.atoms)
    assert boundary_winding(field, (-16, -16), (15, 15)) == 2


def test_measure_drops_zero_charges():
    measure = VorticityMeasure([((0.1, 0.1), 0), ((0.2, 0.2), 2), ((0.3, 0.3), -1)])
    assert measure.atoms == [((0.2, 0.2), 2), ((0.3, 0.3), -1)]
    assert measure.total_variation == 3
    assert measure.total_charge == 1
    assert measure.negated().total_charge == -1


def test_flat_distance_examples():
    empty = VorticityMeasure([], UNIT_SQUARE)
    single = VorticityMeasure([((0.5, 0.5), 1)], UNIT_SQUARE)
    dipole = VorticityMeasure([((0.4, 0.5), 1), ((0.5, 0.5), -1)], UNIT_SQUARE)
    assert flat_distance(single, single, UNIT_SQUARE) == 0
    assert flat_distance(single, empty, UNIT_SQUARE) == pytest.approx(0.5)
    assert flat_distance(dipole, empty, UNIT_SQUARE) == pytest.approx(0.1)
    assert flat_distance(empty, empty, UNIT_SQUARE) == 0


def test_flat_distance_caps_boundary_exit():
    domain = Square((0.0, 0.0), 4.0)
    single = VorticityMeasure([((2.0, 2.0), 1)], domain)
    assert flat_distance(single, VorticityMeasure([], domain), domain) == pytest.approx(1.0)
    far_pair = VorticityMeasure([((1.5, 2.0), 1), ((2.5, 2.0), -1)], domain)
    assert flat_distance(far_pair, VorticityMeasure([], domain), domain) == pytest.approx(1.0)


def test_flat_distance_matches_linear_program():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        total = int(rng.integers(1, 5))
        split = int(rng.integers(0, total + 1))
        mu = random_measure(rng, split)
        nu = random_measure(rng, total - split)
        assert flat_distance(mu, nu, UNIT_SQUARE) == pytest.approx(
            flat_distance_lp(mu, nu, UNIT_SQUARE), abs=1e-6
        )


def test_flat_distance_lp_with_test_grid():
    single = VorticityMeasure([((0.5, 0.5), 1)], UNIT_SQUARE)
    empty = VorticityMeasure([], UNIT_SQUARE)
    assert flat_distance_lp(single, empty, UNIT_SQUARE, grid=9) == pytest.approx(0.5, abs=1e-6)


def test_flat_distance_is_a_metric():
    rng = np.random.default_rng(9)
    for _ in range(100):
        a, b, c = (random_measure(rng, int(rng.integers(0, 4))) for _ in range(3))
        ab = flat_distance(a, b, UNIT_SQUARE)
        assert ab >= 0
        assert ab == pytest.approx(flat_distance(b, a, UNIT_SQUARE), abs=1e-12)
        assert ab <= flat_distance(a, c, UNIT_SQUARE) + flat_distance(c, b, UNIT_SQUARE) + 1e-9


def test_flat_distance_shrinks_as_atoms_converge():
    target = VorticityMeasure([((0.5, 0.5), 1)], UNIT_SQUARE)
    distances = [
        flat_distance(VorticityMeasure([((0.5 + h, 0.5), 1)]), target, UNIT_SQUARE)
        for h in (0.1, 0.01, 0.001)
    ]
    assert distances == pytest.approx([0.1, 0.01, 0.001])


def test_winding_number_examples():
    assert winding_number(VortexMap(), (0.0, 0.0), 0.5) == 1
    assert winding_number(VortexMap((0.0, 0.0), -1), (0.0, 0.0), 0.5) == -1
    assert winding_number(ConstantMap(1.0), (0.0, 0.0), 0.5) == 0
    square = vortex_product([(0.0, 0.0), (0.0, 0.0)], [1, 1])
    assert winding_number(square, (0.0, 0.0), 0.5) == 2
    # a loop away from the singularity does not wind
    assert winding_number(VortexMap(), (2.0, 0.0), 0.5) == 0


def test_winding_number_needs_resolution():
    with pytest.raises(ResolutionError):
        # a jump of pi between two samples cannot be resolved
        winding_number(HalfPlaneJumpMap(0.0, math.pi), (0.0, 0.0), 0.5)
    with pytest.raises(ValueError):
        winding_number(VortexMap(), (0.0, 0.0), 0.0)


def test_winding_number_accepts_gaps_below_pi():
    # six samples of a degree two vortex step by 2 pi / 3
    assert winding_number(VortexMap((0.0, 0.0), 2), (0.0, 0.0), 1.0, samples=6) == 2
    assert winding_number(VortexMap((0.0, 0.0), -1), (0.0, 0.0), 1.0, samples=3) == -1
