import math

import numpy as np
import pytest
from clock_xy_lab.circle_geometry import (
    E1,
    E2,
    DiscreteCircle,
    Orientation,
    UnitVector,
    geo_angles,
    geo_eval,
    geodesic,
    geodesic_distance,
    mid_angles,
    midpoint,
    project_angles,
    project_to_discrete,
    within_stability_radius,
    wrap_psi,
    wrap_steps,
)


def test_geodesic_distance_examples():
    assert geodesic_distance(E1, E1) == 0
    assert geodesic_distance(E1, E2) == pytest.approx(math.pi / 2)
    assert geodesic_distance(E1, UnitVector(math.pi)) == pytest.approx(math.pi)


def test_wrap_psi_examples():
    assert wrap_psi(0.1) == pytest.approx(0.1)
    assert wrap_psi(math.pi) == math.pi
    assert wrap_psi(-math.pi) == -math.pi
    assert wrap_psi(3 * math.pi / 2) == pytest.approx(-math.pi / 2)
    wrapped = wrap_psi(np.array([0.1, 3 * math.pi / 2, -3 * math.pi / 2]))
    np.testing.assert_allclose(wrapped, [0.1, -math.pi / 2, math.pi / 2])


def test_wrap_steps_ties_follow_sign():
    assert wrap_steps(3, 8) == 3
    assert wrap_steps(5, 8) == -3
    assert wrap_steps(4, 8) == 4
    assert wrap_steps(-4, 8) == -4
    np.testing.assert_array_equal(wrap_steps(np.array([7, -7, 0]), 8), [-1, 1, 0])


def test_chord_identity_for_all_circles():
    # |u - v| = 2 sin(d/2) for every state difference of every N up to 1000
    for n_states in range(2, 1001):
        circle = DiscreteCircle(n_states)
        angles = circle.angles(np.arange(n_states))
        chord = np.hypot(np.cos(angles) - 1.0, np.sin(angles))
        np.testing.assert_allclose(circle.chord_table, chord, rtol=0, atol=1e-12)
        np.testing.assert_allclose(
            circle.chord_table, 2 * np.sin(circle.distance_table / 2), rtol=0, atol=1e-12
        )


def test_chord_identity_on_state_pairs():
    for n_states in (2, 3, 7, 64):
        circle = DiscreteCircle(n_states)
        k = np.arange(n_states)
        a, b = np.meshgrid(circle.angles(k), circle.angles(k))
        chord = np.hypot(np.cos(a) - np.cos(b), np.sin(a) - np.sin(b))
        distance = np.abs(wrap_psi(a - b))
        np.testing.assert_allclose(chord, 2 * np.sin(distance / 2), rtol=0, atol=1e-12)


def test_per_bond_lower_bound():
    theta = 1e-2
    k = np.arange(1, math.floor(math.pi / theta) + 1)
    assert np.all(4 * np.sin(k * theta / 2) ** 2 >= 0.9 * k * theta**2)
    circle = DiscreteCircle.from_theta(theta)
    half = np.arange(1, circle.n_states // 2 + 1)
    assert np.all(
        circle.chord_squared_table[half] >= 0.9 * circle.distance_table[half] * circle.theta
    )


def test_from_theta_snaps_to_divisor():
    circle = DiscreteCircle.from_theta(0.1)
    assert circle.n_states == 63
    assert circle.theta == pytest.approx(2 * math.pi / 63)
    with pytest.raises(ValueError):
        DiscreteCircle(1)
    with pytest.raises(ValueError):
        DiscreteCircle.from_theta(0.0)


def test_projection_examples():
    assert project_to_discrete(UnitVector(0.3 * math.pi), DiscreteCircle(4)) == 0
    assert project_to_discrete(UnitVector(1.1), DiscreteCircle(6)) == 1
    assert project_to_discrete(UnitVector(2 * math.pi - 1e-9), DiscreteCircle(4)) == 3


def test_states_project_to_themselves():
    for n_states in (7, 360, 1000):
        circle = DiscreteCircle(n_states)
        states = np.arange(n_states)
        np.testing.assert_array_equal(project_angles(circle.angles(states), circle), states)


def test_geodesic_orientation():
    assert geodesic(E1, E2).orientation is Orientation.COUNTERCLOCKWISE
    assert geodesic(E2, E1).orientation is Orientation.CLOCKWISE
    antipodal = geodesic(E1, UnitVector(math.pi))
    assert antipodal.orientation is Orientation.COUNTERCLOCKWISE
    assert antipodal.length == pytest.approx(math.pi)


def test_geo_eval_examples():
    path = geodesic(E1, E2)
    np.testing.assert_allclose(
        geo_eval(path, math.pi / 4).components, [math.cos(math.pi / 4), math.sin(math.pi / 4)]
    )
    assert geo_eval(path, -1) == E1
    assert geo_eval(path, 10) == E2


def test_midpoint_examples():
    assert midpoint(E1, E2).angle == pytest.approx(math.pi / 4)
    assert midpoint(E1, E1) == E1
    assert midpoint(E1, UnitVector(math.pi)).angle == pytest.approx(math.pi / 2)


def test_vectorised_geodesics_match_scalar_ones():
    rng = np.random.default_rng(3)
    start, end = rng.uniform(0, 2 * math.pi, (2, 200))
    t = rng.uniform(-0.5, 4.0, 200)
    angles = geo_angles(start, end, t)
    for a, b, s, angle in zip(start, end, t, angles, strict=True):
        expected = geo_eval(geodesic(UnitVector(a), UnitVector(b)), s)
        assert geodesic_distance(UnitVector(angle), expected) < 1e-12
    assert geo_angles(0.0, 1.0, 0.5) == pytest.approx(0.5)
    assert geo_angles(1.0, 0.0, 0.25) == pytest.approx(0.75)
    assert mid_angles(0.2, 1.0) == pytest.approx(0.6)
    assert mid_angles(0.0, math.pi) == pytest.approx(math.pi / 2)


def test_stability_radius():
    b = UnitVector(0.0)
    assert within_stability_radius(UnitVector(0.2), UnitVector(-0.3), b)
    assert not within_stability_radius(UnitVector(0.2), UnitVector(1.0), b)


def test_geodesics_toward_a_common_end_stay_close():
    rng = np.random.default_rng(5)
    t = np.linspace(0.0, 1.0, 201)
    for _ in range(500):
        b = rng.uniform(0, 2 * math.pi)
        u1, u2 = b + rng.uniform(-0.5, 0.5, 2)
        assert within_stability_radius(UnitVector(u1), UnitVector(u2), UnitVector(b))
        first = geo_angles(u1, b, t)
        second = geo_angles(u2, b, t)
        gap = np.hypot(np.cos(first) - np.cos(second), np.sin(first) - np.sin(second))
        assert gap.max() <= geodesic_distance(UnitVector(u1), UnitVector(u2)) + 1e-10


def test_chord_and_arc_sandwich_on_random_pairs():
    rng = np.random.default_rng(11)
    a, b = rng.uniform(0, 2 * math.pi, (2, 100_000))
    chord = np.hypot(np.cos(a) - np.cos(b), np.sin(a) - np.sin(b))
    arc = np.abs(wrap_psi(a - b))
    assert np.all(chord <= arc + 1e-12)
    assert np.all(arc <= math.pi / 2 * chord + 1e-12)
    for x, y in zip(a[:200], b[:200], strict=True):
        assert geodesic_distance(UnitVector(x), UnitVector(y)) == pytest.approx(
            abs(wrap_psi(x - y)), abs=1e-12
        )


def test_unit_vector_from_components():
    assert UnitVector.from_components(0.0, 2.0).angle == pytest.approx(math.pi / 2)
    assert UnitVector(-math.pi / 2).angle == pytest.approx(3 * math.pi / 2)
    with pytest.raises(ValueError):
        UnitVector.from_components(0.0, 0.0)
