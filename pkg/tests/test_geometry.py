import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from capq.geometry import (
    ball,
    check_aleksandrov_fenchel,
    check_body_inequalities,
    cuboid,
    distance_to_body,
    ellipsoid,
    mc_validate_steiner,
    metrics_of,
    random_bodies,
    steiner_of,
    steiner_perimeter,
    steiner_volume,
    unit_ball_volume,
)
from oracles import (
    ellipse_perimeter,
    ellipsoid_surface_integrals,
    mean_width_quermass,
    oblate_area,
    prolate_area,
)

axis = st.floats(0.05, 20.0)


def test_unit_ball_volumes():
    assert unit_ball_volume(2) == pytest.approx(math.pi)
    assert unit_ball_volume(3) == pytest.approx(4 * math.pi / 3)
    assert unit_ball_volume(4) == pytest.approx(math.pi ** 2 / 2)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_ball_quermassintegrals(d):
    S = steiner_of(ball(2.0, d))
    om = unit_ball_volume(d)
    assert S.method == "exact"
    assert S.W == pytest.approx([om * 2.0 ** (d - n) for n in range(d + 1)], rel=1e-15)


def test_unit_cube_steiner():
    S = steiner_of(cuboid([1, 1, 1]))
    assert S.W == pytest.approx([1.0, 2.0, math.pi, 4 * math.pi / 3])
    assert steiner_volume(S, 1.0) == pytest.approx(1 + 6 + 3 * math.pi + 4 * math.pi / 3)
    assert steiner_perimeter(S, 0.0) == pytest.approx(6.0)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_round_ellipsoid_matches_ball(d):
    W = steiner_of(ellipsoid([1.0] * d)).W
    assert W == pytest.approx(steiner_of(ball(1.0, d)).W, rel=1e-13)


@pytest.mark.parametrize("a, b", [(2, 1), (5, 0.3), (1, 1e-3)])
def test_ellipse_perimeter(a, b):
    assert 2 * steiner_of(ellipsoid([a, b])).W[1] == pytest.approx(ellipse_perimeter(a, b), rel=1e-12)


@pytest.mark.parametrize("a, b", [(2, 1), (10, 0.5)])
def test_prolate_area(a, b):
    assert metrics_of(ellipsoid([a, b, b])).perimeter == pytest.approx(prolate_area(a, b), rel=1e-12)


@pytest.mark.parametrize("a, c", [(1, 0.3), (4, 0.01)])
def test_oblate_area(a, c):
    assert metrics_of(ellipsoid([a, a, c])).perimeter == pytest.approx(oblate_area(a, c), rel=1e-12)


@pytest.mark.parametrize("axes", [(2, 1, 1), (3, 1.5, 0.4), (1, 0.7, 0.2), (6, 2, 1)])
def test_ellipsoid_against_surface_quadrature(axes):
    area, mean_curv = ellipsoid_surface_integrals(*axes)
    m = metrics_of(ellipsoid(axes))
    assert m.perimeter == pytest.approx(area, rel=1e-10)
    assert m.mean_curvature_integral == pytest.approx(mean_curv, rel=1e-10)


@pytest.mark.parametrize("axes", [(2, 1, 0.5, 0.3), (1, 1, 1, 0.2, 3)])
def test_mean_width_in_higher_dimension(axes):
    est, se = mean_width_quermass(axes)
    W = steiner_of(ellipsoid(axes)).W
    assert abs(W[-2] - est) < 4 * se


def test_extreme_thin_disc():
    m = metrics_of(ellipsoid([1e4, 1e4, 1e-8]))
    assert m.perimeter == pytest.approx(2 * math.pi * 1e8, rel=1e-9)


@given(st.lists(axis, min_size=2, max_size=4), st.floats(0.1, 10.0))
def test_quermassintegral_homogeneity(axes, t):
    body = ellipsoid(axes)
    d = body.dim
    W, Wt = steiner_of(body).W, steiner_of(body.scaled(t)).W
    for n in range(d + 1):
        assert Wt[n] == pytest.approx(t ** (d - n) * W[n], rel=1e-10)


@given(st.lists(axis, min_size=2, max_size=4), st.floats(0.01, 5.0))
def test_perimeter_is_derivative_of_volume(edges, t):
    S = steiner_of(cuboid(edges))
    h = 1e-3 * t
    fd = (steiner_volume(S, t + h) - steiner_volume(S, t - h)) / (2 * h)
    assert steiner_perimeter(S, t) == pytest.approx(fd, rel=1e-6)


def test_steiner_vectorized_and_rejects_negative_t():
    S = steiner_of(ball())
    out = steiner_volume(S, np.array([0.0, 1.0]))
    assert out == pytest.approx([4 * math.pi / 3, 32 * math.pi / 3])
    with pytest.raises(ValueError):
        steiner_volume(S, -0.1)


@given(st.sampled_from(["ellipsoid", "cuboid"]), st.integers(2, 5), st.integers(0, 10 ** 6))
def test_body_invariants(kind, d, seed):
    body = random_bodies(kind, d, 1, seed)[0]
    m = metrics_of(body)
    assert 0 < m.isoperimetric_ratio <= 1
    assert 2 * m.inradius <= m.diameter
    assert min(v for *_, v in check_aleksandrov_fenchel(steiner_of(body))) >= -1e-10
    assert min(check_body_inequalities(body).values()) >= -1e-10


def test_ball_isoperimetric_ratio_is_one():
    assert metrics_of(ball(3.0, 4)).isoperimetric_ratio == 1.0


def test_cube_aleksandrov_fenchel_slack():
    slacks = {(i, j, k): s for i, j, k, s in check_aleksandrov_fenchel(steiner_of(cuboid([1, 1, 1])))}
    # W_1^2 / (W_0 W_2) - 1 = 4 / pi - 1
    assert slacks[(0, 1, 2)] == pytest.approx(4 / math.pi - 1)


@pytest.mark.parametrize("kind, lengths, dim", [
    ("torus", (1.0,), 3), ("ball", (1.0,), 1), ("ellipsoid", (1.0, 0.0), 2),
    ("cuboid", (1.0, math.inf), 2), ("ellipsoid", (1.0, 2.0), 3),
])
def test_invalid_bodies(kind, lengths, dim):
    from capq.geometry import ConvexBody
    with pytest.raises(ValueError):
        ConvexBody(kind, lengths, dim)


@given(st.lists(st.floats(0.2, 5.0), min_size=3, max_size=3), st.floats(0.0, 3.0),
       st.floats(0, 2 * math.pi), st.floats(0.05, math.pi - 0.05))
def test_ellipsoid_distance_along_normal(axes, s, phi, theta):
    # a boundary point pushed out along its unit normal is at distance s
    a = np.asarray(axes)
    u = np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])
    y = a * u
    n = y / a ** 2
    n /= np.linalg.norm(n)
    dist = distance_to_body(ellipsoid(axes), y + s * n)[0]
    assert dist == pytest.approx(s, abs=1e-9 * (1 + s))


def test_cuboid_and_ball_distance():
    assert distance_to_body(cuboid([2, 2]), [[2.0, 0.0], [2.0, 2.0], [0.0, 0.0]]) == pytest.approx(
        [1.0, math.sqrt(2), 0.0])
    assert distance_to_body(ball(1.0, 2), [[3.0, 4.0]]) == pytest.approx([4.0])


def test_mc_validation_ellipsoid():
    poly, est, z = mc_validate_steiner(ellipsoid([1.5, 1.0, 0.5]), 0.3, n_samples=200_000, seed=5)
    assert abs(z) < 4
    with pytest.raises(ValueError):
        mc_validate_steiner(ball(), -1.0)
