import math

import pytest

from capq.errors import HypothesisError
from capq.experiments import (
    DEFAULT_EPS_GRID,
    FamilySweep,
    disconnected_exponent,
    elongated_exponent,
    shape_search_max,
    shape_search_min,
    sweep_disconnected,
    sweep_elongated_ellipsoid,
    sweep_thin_ellipsoid,
    thin_exponent,
)
from capq.functional import g_ball_exact, make_params, maximiser_ratio_lower
from capq.numerics import SearchConfig


def test_default_grid():
    assert DEFAULT_EPS_GRID[0] == pytest.approx(0.1)
    assert DEFAULT_EPS_GRID[-1] == pytest.approx(1e-4)
    assert all(b < a for a, b in zip(DEFAULT_EPS_GRID, DEFAULT_EPS_GRID[1:]))


@pytest.mark.parametrize("prm, slope", [
    ((3, 2, 2, 1, 0), 1.5),
    ((3, 2, 2, 0.1, 0), -0.3),
    ((4, 2, 2, 1, 0), 2 - 2 / 3),
    ((3, 2.5, 3, 1, 0.5), 1.5 - 0.25 + 0.5),
    ((5, 3, 2, 0.5, 0.25), 1 - 0.5 + 0.25),
])
def test_thin_family_slopes(prm, slope):
    gp = make_params(*prm)
    sw = sweep_thin_ellipsoid(gp)
    assert thin_exponent(gp) == pytest.approx(slope)
    assert sw.fit.slope == pytest.approx(slope, rel=0.02)
    assert all(0 < row.g_lo <= row.g_hi < math.inf for row in sw.rows)
    assert [row.eps for row in sw.rows] == list(DEFAULT_EPS_GRID)


def test_thin_family_flat_edge():
    # q'r = (d-p)/(d-1): the proxy neither decays nor grows
    sw = sweep_thin_ellipsoid(make_params(3, 2, 2, 0.25))
    assert sw.fit.slope == pytest.approx(0.0, abs=0.02)


def test_thin_family_has_oracle_column():
    sw = sweep_thin_ellipsoid(make_params(3, 2, 2, 1))
    for row in sw.rows:
        assert row.label == "proxy"
        assert row.g_lo <= row.aux["g_oracle"] <= row.g_hi


@pytest.mark.parametrize("prm, slope", [
    ((4, 2, 2, 0, 0), -0.5),
    ((5, 2, 2, 0.25, 0), -0.3),
    ((4, 2, 3, 1, 0.5), 0.0),
])
def test_elongated_family_slopes(prm, slope):
    gp = make_params(*prm)
    sw = sweep_elongated_ellipsoid(gp)
    expected = elongated_exponent(gp)
    if slope is not None:
        assert expected == pytest.approx(slope)
    assert sw.fit.slope == pytest.approx(expected, rel=0.05, abs=1e-3)


def test_elongated_family_d3_log_corrected():
    gp = make_params(3, 2, 2, 1)
    sw = sweep_elongated_ellipsoid(gp)
    assert elongated_exponent(gp) == 0.0
    assert sw.fit.slope == pytest.approx(0.0, abs=0.01)
    # the raw proxy still decays, but only logarithmically
    raw = [row.g_lo for row in sw.rows]
    assert all(b < a for a, b in zip(raw, raw[1:]))
    assert raw[-1] / raw[0] > 0.2


def test_elongated_family_gates():
    with pytest.raises(HypothesisError):
        sweep_elongated_ellipsoid(make_params(3, 2.5, 2, 1))


@pytest.mark.parametrize("prm, slope", [((3, 2, 2, 1, 0), -1.0), ((4, 2, 2, 1, 0.5), -0.5)])
def test_disconnected_family(prm, slope):
    gp = make_params(*prm)
    sw = sweep_disconnected(gp)
    assert disconnected_exponent(gp) == pytest.approx(slope)
    lo = [row.g_lo for row in sw.rows]
    assert all(b > a for a, b in zip(lo, lo[1:]))
    assert sw.fit.slope == pytest.approx(slope, rel=0.02)


def test_disconnected_family_gates():
    with pytest.raises(HypothesisError):
        sweep_disconnected(make_params(3, 2, 2, 1, 0.6))
    with pytest.raises(HypothesisError):
        sweep_disconnected(make_params(3, 2, 2, -0.1))
    with pytest.raises(HypothesisError, match="overlap"):
        sweep_disconnected(make_params(3, 2, 2, 1), [0.9, 0.8, 0.7])


@pytest.mark.parametrize("grid", [[0.1, 0.01], [0.1, 0.1, 0.01], [0.01, 0.1, 0.001], [1.5, 0.1, 0.01]])
def test_grid_validation(grid):
    with pytest.raises(ValueError):
        sweep_thin_ellipsoid(make_params(3, 2, 2, 1), grid)


def test_unknown_family_tag():
    with pytest.raises(ValueError):
        FamilySweep("spheroid", (0.1,), make_params(3, 2, 2, 1), ())


@pytest.mark.parametrize("threads", ["1", "3"])
def test_sweeps_do_not_depend_on_thread_count(monkeypatch, threads):
    gp = make_params(3, 2, 2, 1)
    monkeypatch.setenv("CAPQ_THREADS", "1")
    ref = sweep_thin_ellipsoid(gp)
    monkeypatch.setenv("CAPQ_THREADS", threads)
    assert sweep_thin_ellipsoid(gp) == ref


def test_bad_thread_count(monkeypatch):
    monkeypatch.setenv("CAPQ_THREADS", "0")
    with pytest.raises(ValueError):
        sweep_thin_ellipsoid(make_params(3, 2, 2, 1))


def test_search_max_finds_ball_with_heavy_perimeter_weight():
    res = shape_search_max(make_params(3, 2, 2, 1, 2))
    assert res.status == "ball-consistent"
    assert res.ratio == pytest.approx(1.0, abs=1e-2)
    assert res.interior


def test_search_max_ratio_check():
    gp = make_params(3, 2, 2, 2)
    res = shape_search_max(gp)
    assert res.status in ("ball-consistent", "ratio-bound-satisfied")
    if res.value > g_ball_exact(gp):
        assert res.ratio >= maximiser_ratio_lower(gp)


def test_search_max_cuboids_terminate():
    res = shape_search_max(make_params(3, 2, 2, 1), "cuboid_aspect", SearchConfig(max_iters=200))
    assert math.isfinite(res.value) and res.value > 0


def test_search_min_ball_for_negative_r():
    res = shape_search_min(make_params(3, 2, 2, -0.5, strict=False))
    assert res.status == "ball"
    assert res.ratio >= 0.99


def test_search_min_small_r():
    res = shape_search_min(make_params(3, 2, 2, 0.1))
    assert res.status in ("ball-consistent", "ratio-bound-satisfied", "boundary")
    assert res.status != "ratio-bound-violated"


def test_search_min_runs_to_the_box_when_infimum_vanishes():
    res = shape_search_min(make_params(3, 2, 2, 1))
    assert res.status == "boundary"
    assert not res.interior
    assert res.value < g_ball_exact(make_params(3, 2, 2, 1))


def test_search_rejects_sweep_families():
    with pytest.raises(ValueError):
        shape_search_max(make_params(3, 2, 2, 1), "thin_Ec")
