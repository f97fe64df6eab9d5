import math

import pytest
from hypothesis import given, strategies as st

from capq.capacity import (
    CapBoundReport,
    CapParams,
    cap2_ellipsoid_oracle,
    cap2_thin_ellipsoid_asymptotic,
    cap_ball_exact,
    cap_lower_perimeter,
    cap_report,
    cap_upper_diameter,
    cap_upper_log_pd1,
    cap_upper_mean_curvature,
    cap_upper_neighbourhood_volume,
    cap_upper_perimeter_measure,
    cap_upper_profile_fn,
    cap_upper_steiner_profile,
    measure_vs_diameter_table,
)
from capq.errors import HypothesisError, NumericalError
from capq.geometry import ball, cuboid, ellipsoid, metrics_of, random_bodies
from oracles import oblate_capacity, prolate_capacity

CP = CapParams(3, 2.0)


@pytest.mark.parametrize("d, p", [(2, 2.5), (3, 3.0), (3, 0.9), (1, 0.5)])
def test_cap_params_validation(d, p):
    with pytest.raises(ValueError):
        CapParams(d, p)


def test_ball_capacity_values():
    assert cap_ball_exact(CP) == pytest.approx(4 * math.pi)
    assert cap_ball_exact(CP, 2.0) == pytest.approx(8 * math.pi)
    # d = 4, p = 2: d omega_d (d - 2) = 4 pi^2
    assert cap_ball_exact(CapParams(4, 2.0)) == pytest.approx(4 * math.pi ** 2)


BALL_GRID = [(d, p) for d in (3, 4, 5) for p in (1.5, 2.0, d - 1.2, d - 0.5) if 1 < p < d]


@pytest.mark.parametrize("d, p", BALL_GRID)
def test_bounds_are_exact_on_balls(d, p):
    cp = CapParams(d, p)
    exact = cap_ball_exact(cp, 1.5)
    B = ball(1.5, d)
    assert cap_upper_steiner_profile(B, cp) == pytest.approx(exact, rel=1e-8)
    assert cap_upper_mean_curvature(B, cp) == pytest.approx(exact, rel=1e-12)
    assert cap_upper_perimeter_measure(B, cp) == pytest.approx(exact, rel=1e-12)


@pytest.mark.parametrize("d, p", BALL_GRID)
def test_lower_bound_on_balls_is_strict(d, p):
    cp = CapParams(d, p)
    lo = cap_lower_perimeter(ball(1.0, d), cp)
    ratio = (d * (p - 1) / (p * (d - 1))) ** (p - 1)
    assert lo == pytest.approx(ratio * cap_ball_exact(cp), rel=1e-12)
    assert lo < cap_ball_exact(cp)


def test_lower_bound_unit_ball_d3():
    assert cap_lower_perimeter(ball(), CP) == pytest.approx(3 * math.pi)


def test_neighbourhood_bound_on_unit_ball():
    # min_a (a + 1)^3 / a^2 * 4 pi / 3 is attained at a = 2 with value 9 pi
    val, a = cap_upper_neighbourhood_volume(ball(), CP)
    assert val == pytest.approx(9 * math.pi, rel=1e-12)
    assert a == pytest.approx(2.0, rel=1e-6)


def test_unit_cube_values():
    c = cuboid([1, 1, 1])
    assert cap_upper_perimeter_measure(c, CP) == pytest.approx(12.0)
    # 4 pi (3/4)^(1) (6 / 4 pi)^(1/2)
    assert cap_lower_perimeter(c, CP) == pytest.approx(3 * math.pi * math.sqrt(6 / (4 * math.pi)))
    assert cap_lower_perimeter(c, CP) == pytest.approx(6.5124, abs=1e-4)
    # (4/3) * 36 / log(6 / pi)
    assert cap_upper_log_pd1(c) == pytest.approx(48 / math.log(6 / math.pi))
    assert cap_upper_log_pd1(c) == pytest.approx(74.19, abs=0.01)


def test_mean_curvature_needs_smooth_boundary():
    with pytest.raises(HypothesisError, match="C² boundary required"):
        cap_upper_mean_curvature(cuboid([1, 1, 1]), CP)


def test_log_bound_refuses_balls_and_low_dimension():
    with pytest.raises(HypothesisError):
        cap_upper_log_pd1(ball())
    with pytest.raises(HypothesisError):
        cap_upper_log_pd1(ellipsoid([2.0, 1.0]))


def test_profile_of_a_point_gives_zero():
    assert cap_upper_profile_fn(lambda t: 4 * math.pi * t ** 2, CP) == 0.0


def test_profile_must_be_nonnegative():
    with pytest.raises(ValueError):
        cap_upper_profile_fn(lambda t: -1.0 - t, CP)


def test_oracle_closed_forms():
    closed = 4 * math.pi * math.sqrt(3) / math.log(2 + math.sqrt(3))
    assert cap2_ellipsoid_oracle([2, 1, 1]) == pytest.approx(closed, rel=1e-12)
    assert cap2_ellipsoid_oracle([2, 1, 1]) == pytest.approx(16.527, abs=1e-3)
    assert cap2_ellipsoid_oracle([1, 1, 1]) == pytest.approx(4 * math.pi, rel=1e-13)
    assert cap2_ellipsoid_oracle([7, 0.2, 0.2]) == pytest.approx(prolate_capacity(7, 0.2), rel=1e-11)
    assert cap2_ellipsoid_oracle([3, 3, 0.5]) == pytest.approx(oblate_capacity(3, 0.5), rel=1e-11)
    # flat disc of radius R: 8 R
    assert cap2_ellipsoid_oracle([2, 2, 1e-12]) == pytest.approx(16.0, rel=1e-9)


@given(st.lists(st.floats(0.1, 10.0), min_size=3, max_size=3), st.floats(1.01, 3.0))
def test_oracle_monotone_in_each_axis(axes, f):
    base = cap2_ellipsoid_oracle(axes)
    for i in range(3):
        bigger = list(axes)
        bigger[i] *= f
        assert cap2_ellipsoid_oracle(bigger) > base


def test_oracle_rejects_bad_axes():
    with pytest.raises(ValueError):
        cap2_ellipsoid_oracle([1, 2])


def test_thin_asymptotics():
    assert cap2_thin_ellipsoid_asymptotic(3, 0.01) == pytest.approx(4 * math.pi / math.log(100))
    # d = 5: 2 pi^(5/2) * 2 / Gamma(5/2) * eps^2
    assert cap2_thin_ellipsoid_asymptotic(5, 0.1) == pytest.approx(
        4 * math.pi ** 2.5 / (0.75 * math.sqrt(math.pi)) * 0.01)
    assert cap2_thin_ellipsoid_asymptotic(5, 0.1) == pytest.approx(0.52638, abs=1e-5)
    with pytest.raises(ValueError):
        cap2_thin_ellipsoid_asymptotic(2, 0.1)


def test_thin_asymptotic_matches_oracle():
    eps = 1e-6
    ratio = cap2_ellipsoid_oracle([1, eps, eps]) / cap2_thin_ellipsoid_asymptotic(3, eps)
    # exact: log(1/eps) / log(2/eps) to leading order
    assert ratio == pytest.approx(math.log(1 / eps) / math.log(2 / eps), rel=1e-3)


@pytest.mark.parametrize("seed", range(4))
def test_oracle_sandwich_random_ellipsoids(seed):
    for body in random_bodies("ellipsoid", 3, 5, seed):
        rep = cap_report(body, CP)
        assert rep.lower <= rep.oracle <= rep.best_upper


@given(st.sampled_from(["ellipsoid", "cuboid"]), st.integers(3, 4), st.integers(0, 10 ** 6),
       st.floats(1.2, 2.8))
def test_report_lower_below_uppers(kind, d, seed, p_frac):
    body = random_bodies(kind, d, 1, seed)[0]
    cp = CapParams(d, 1 + (d - 1) * (p_frac - 1) / 2)
    rep = cap_report(body, cp)
    assert all(rep.lower <= u * (1 + 1e-9) for u in rep.uppers.values())


@given(st.lists(st.floats(0.2, 5.0), min_size=3, max_size=3), st.sampled_from([0.5, 3.0]),
       st.floats(1.1, 2.9))
def test_capacity_bounds_scale(axes, t, p):
    cp = CapParams(3, p)
    body = ellipsoid(axes)
    a, b = cap_report(body, cp), cap_report(body.scaled(t), cp)
    fac = t ** (3 - p)
    assert b.lower == pytest.approx(fac * a.lower, rel=1e-9)
    for k in a.uppers:
        assert b.uppers[k] == pytest.approx(fac * a.uppers[k], rel=1e-9)


def test_report_records_skipped_methods():
    rep = cap_report(cuboid([1, 2, 3]), CapParams(3, 1.5))
    assert set(rep.skipped) == {"mean_curvature", "log_pd1"}
    assert rep.oracle is None
    assert "steiner_profile" in rep.uppers


def test_report_rejects_inconsistent_values():
    with pytest.raises(NumericalError):
        CapBoundReport(lower=2.0, uppers={"x": 1.0})


def test_perimeter_measure_versus_diameter():
    prolate = measure_vs_diameter_table("prolate")
    assert all(row[3] == "perimeter_measure" for row in prolate)
    oblate = measure_vs_diameter_table("oblate", (0.5, 0.25, 0.1, 0.05))
    winners = [row[3] for row in oblate]
    assert winners[0] == "perimeter_measure" and winners[-1] == "diameter"
    assert cap_upper_diameter(ball(), CP) == pytest.approx(8 * math.pi)


@pytest.mark.parametrize("axes", [[50, 1, 0.01], [1, 1e-3, 1e-3], [1, 1, 1e-4]])
@pytest.mark.parametrize("p", [1.02, 1.05, 1.3])
def test_profile_bound_stays_finite_near_p_one(axes, p):
    cp = CapParams(3, p)
    body = ellipsoid(axes)
    v = cap_upper_steiner_profile(body, cp)
    assert cap_lower_perimeter(body, cp) <= v <= cap_upper_mean_curvature(body, cp) * (1 + 1e-9)


def test_profile_bound_tends_to_perimeter_as_p_decreases():
    body = cuboid([2, 1, 0.5])
    P = metrics_of(body).perimeter
    gaps = [cap_upper_steiner_profile(body, CapParams(3, p)) / P - 1 for p in (1.1, 1.01, 1.001)]
    assert all(g > 0 for g in gaps)
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] < 1e-2


def test_log_bound_beats_perimeter_measure_on_long_cuboids():
    ratios = [cap_upper_log_pd1(cuboid([L, 1, 1])) / cap_upper_perimeter_measure(cuboid([L, 1, 1]), CP)
              for L in (4.0, 16.0, 64.0, 256.0, 1024.0)]
    assert all(b < a for a, b in zip(ratios, ratios[1:]))
    assert ratios[-1] < 0.5 * ratios[0]
