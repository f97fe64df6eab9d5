"""Parameter sweeps over extremal body families and shape searches for G.

The families are the thin ellipsoids with d-1 long semi-axes (fixed volume,
inradius eps), the needle-like ellipsoids (1, eps, ..., eps) and a ball
joined by a far-away flat ellipsoid. Along each family a closed-form bound
proxy is evaluated and a log-log slope is fitted.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .capacity import (
    cap2_ellipsoid_oracle,
    cap2_thin_ellipsoid_asymptotic,
    cap_ball_exact,
    cap_lower_perimeter,
)
from .errors import HypothesisError, NumericalError
from .functional import (
    GParams,
    g_ball_exact,
    g_interval,
    g_lower,
    g_oracle,
    maximiser_ratio_lower,
    maximiser_ratio_lower_pd1,
    minimiser_ratio_lower,
)
from .geometry import ConvexBody, cuboid, ellipsoid, metrics_of, unit_ball_volume
from .numerics import SearchConfig, SlopeFit, fit_loglog_slope, minimize_nelder_mead
from .torsion import constants_c1_c2, torsion_ball_exact, torsion_interval_inradius

__all__ = [
    "FAMILIES",
    "DEFAULT_EPS_GRID",
    "SweepRow",
    "FamilySweep",
    "ShapeSearchResult",
    "thin_exponent",
    "elongated_exponent",
    "disconnected_exponent",
    "sweep_thin_ellipsoid",
    "sweep_elongated_ellipsoid",
    "sweep_disconnected",
    "shape_search_max",
    "shape_search_min",
]

FAMILIES = ("thin_Ec", "elongated_Ea", "disconnected_Omega", "ellipsoid_aspect", "cuboid_aspect")
DEFAULT_EPS_GRID = tuple(10.0 ** -(1 + 0.5 * k) for k in range(7))
SEARCH_BOUND = 8.0  # |log semi-axis| allowed in shape searches
BALL_ASPECT_TOL = 1e-2


@dataclass(frozen=True)
class SweepRow:
    eps: float
    g_lo: float
    g_hi: float
    label: str  # "proxy" or "oracle"
    aux: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FamilySweep:
    family: str
    eps_grid: tuple
    params: GParams
    rows: tuple
    fit: Optional[SlopeFit] = None
    expected_slope: Optional[float] = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")


@dataclass(frozen=True)
class ShapeSearchResult:
    best_body: ConvexBody
    value: float
    ratio: float  # 2 rho / diam of the best body
    interior: bool  # False when the search ran into the log-axis box
    status: str
    ratio_bound: Optional[float] = None


def _check_grid(eps_grid) -> tuple:
    grid = tuple(float(e) for e in eps_grid)
    if len(grid) < 3:
        raise ValueError("need at least 3 eps values")
    if any(not 0 < e < 1 for e in grid):
        raise ValueError("eps values must lie in (0, 1)")
    if any(b >= a for a, b in zip(grid, grid[1:])):
        raise ValueError("eps grid must be strictly decreasing")
    return grid


def _threads() -> int:
    raw = os.environ.get("CAPQ_THREADS")
    if raw is None:
        return min(4, os.cpu_count() or 1)
    n = int(raw)
    if n < 1:
        raise ValueError("CAPQ_THREADS must be >= 1")
    return n


def _map_rows(fn, grid):
    # executor.map keeps input order, so the output is deterministic
    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        return tuple(pool.map(fn, grid))


def thin_exponent(gp: GParams) -> float:
    return gp.q_prime * gp.r - (gp.d - gp.p) / (gp.d - 1) + gp.beta


def elongated_exponent(gp: GParams) -> float:
    return (gp.q_prime * gp.r + gp.beta - 2) / gp.d


def disconnected_exponent(gp: GParams) -> float:
    return (1 - gp.d) * ((gp.d - gp.p) / (gp.d - 1) - gp.beta)


def _oracle_aux(body: ConvexBody, gp: GParams) -> dict:
    g = g_oracle(body, gp)
    return {} if g is None else {"g_oracle": g}


def sweep_thin_ellipsoid(gp: GParams, eps_grid=DEFAULT_EPS_GRID) -> FamilySweep:
    """Upper-bound proxy along ellipsoids with d-1 semi-axes eps^(-1/(d-1)) and one eps.

    Every member has the volume of the unit ball and inradius eps. The proxy
    combines the thin-body torsion bound ``C2 |E|^r rho^(q'r)``, the capacity
    of the enclosing ball and ``P >= |E|/rho``, and decays like
    ``eps^(q'r - (d-p)/(d-1) + beta)``.
    """
    grid = _check_grid(eps_grid)
    d, p, qp, r = gp.d, gp.p, gp.q_prime, gp.r
    _, c2 = constants_c1_c2(d, gp.torsion_params)

    def row(eps):
        body = ellipsoid([eps ** (-1.0 / (d - 1))] * (d - 1) + [eps])
        m = metrics_of(body)
        log_hi = (math.log(c2) + r * math.log(m.volume) + qp * r * math.log(m.inradius)
                  + math.log(cap_ball_exact(gp.cap_params, max(body.lengths)))
                  - gp.alpha * math.log(m.volume)
                  - gp.beta * (math.log(m.volume) - math.log(m.inradius)))
        aux = {"volume": m.volume, "inradius": m.inradius, "perimeter": m.perimeter}
        aux.update(_oracle_aux(body, gp))
        return SweepRow(eps, g_lower(body, gp), math.exp(log_hi), "proxy", aux)

    rows = _map_rows(row, grid)
    fit = fit_loglog_slope([(x.eps, x.g_hi) for x in rows])
    return FamilySweep("thin_Ec", grid, gp, rows, fit, thin_exponent(gp))


def sweep_elongated_ellipsoid(gp: GParams, eps_grid=DEFAULT_EPS_GRID) -> FamilySweep:
    """Lower-bound proxy along the needles (1, eps, ..., eps), p = 2.

    Uses the leading-order 2-capacity of the needle and the inradius torsion
    bound. The proxy behaves like ``eps^((q'r + beta - 2)/d)``, with an extra
    ``1/log(1/eps)`` when d = 3; that factor is divided out before fitting.
    """
    d = gp.d
    if d < 3 or gp.p != 2:
        raise HypothesisError("needle family needs p = 2 and d >= 3")
    grid = _check_grid(eps_grid)
    tp = gp.torsion_params

    def row(eps):
        body = ellipsoid([1.0] + [eps] * (d - 1))
        m = metrics_of(body)
        t = torsion_interval_inradius(body, tp)
        t_r = t.lo ** gp.r if gp.r >= 0 else t.hi ** gp.r
        cap = cap2_thin_ellipsoid_asymptotic(d, eps)
        lo = math.exp(math.log(cap) + math.log(t_r) - gp.alpha * math.log(m.volume)
                      - gp.beta * math.log(m.perimeter))
        aux = {"cap_asymptotic": cap, "log_corrected": lo * math.log(1.0 / eps) if d == 3 else lo,
               # the conjectured capacity decay rate, shown next to the certified lower bound
               "cap_lower": cap_lower_perimeter(body, gp.cap_params),
               "eps_pow_d_p_1": eps ** (d - gp.p - 1)}
        if d == 3:
            aux["cap_oracle"] = cap2_ellipsoid_oracle(body.lengths)
        aux.update(_oracle_aux(body, gp))
        return SweepRow(eps, lo, math.inf, "proxy", aux)

    rows = _map_rows(row, grid)
    fit = fit_loglog_slope([(x.eps, x.aux["log_corrected"]) for x in rows])
    return FamilySweep("elongated_Ea", grid, gp, rows, fit, elongated_exponent(gp))


def sweep_disconnected(gp: GParams, eps_grid=DEFAULT_EPS_GRID) -> FamilySweep:
    """Lower-bound proxy for G of a ball joined by a distant flat ellipsoid.

    The ellipsoid has semi-axes eps^-1 (d-1 times) and eps^d, so its volume
    is ``omega_d eps`` and its perimeter is at least ``omega_d eps^(1-d)``.
    It is centred at distance eps^-3 from the ball. The proxy diverges when
    ``d - p > beta (d - 1)``. It needs ``r >= 0``, because the
    torsion step uses ``T(ball + E)^r >= T(ball)^r``.
    """
    d, p = gp.d, gp.p
    if not d - p > gp.beta * (d - 1):
        raise HypothesisError(f"disconnected family needs d - p > beta (d - 1) "
                              f"({d - p!r} <= {gp.beta * (d - 1)!r})")
    if gp.r < 0:
        raise HypothesisError("disconnected family needs r >= 0 (torsion monotonicity)")
    grid = _check_grid(eps_grid)
    om = unit_ball_volume(d)
    dw = d * om
    # lower capacity bound from perimeter: k_d * P^((d-p)/(d-1))
    log_k = (math.log(dw) + (p - 1) * math.log(d * (d - p) / (p * (d - 1)))
             - (d - p) / (d - 1) * math.log(dw))
    t_ball = torsion_ball_exact(d, gp.torsion_params)

    def row(eps):
        # the ellipsoid reaches at most eps^-1 from its centre in any direction
        gap = eps ** -3 - max(eps ** -1, eps ** d)
        if not gap > 1.0:
            raise HypothesisError(f"ball and ellipsoid overlap at eps = {eps!r}")
        log_pe = math.log(om) + (1 - d) * math.log(eps)
        pe = math.exp(log_pe)
        lo = math.exp(log_k + gp.r * math.log(t_ball) + (d - p) / (d - 1) * log_pe
                      - gp.alpha * math.log(1.5 * om) - gp.beta * math.log(dw + pe))
        return SweepRow(eps, lo, math.inf, "proxy", {"perimeter_E_lower": pe, "gap": gap})

    rows = _map_rows(row, grid)
    if any(b.g_lo <= a.g_lo for a, b in zip(rows, rows[1:])):
        raise NumericalError("disconnected proxy is not increasing as eps decreases",
                             "experiments.sweep_disconnected")
    fit = fit_loglog_slope([(x.eps, x.g_lo) for x in rows])
    return FamilySweep("disconnected_Omega", grid, gp, rows, fit, disconnected_exponent(gp))


def _body_from(family: str, x: np.ndarray) -> ConvexBody:
    lengths = [1.0] + list(np.exp(x))
    if family == "ellipsoid_aspect":
        return ellipsoid(lengths)
    if family == "cuboid_aspect":
        return cuboid(lengths)
    raise ValueError(f"shape searches support ellipsoid_aspect and cuboid_aspect, not {family!r}")


def _ratio(body: ConvexBody) -> float:
    m = metrics_of(body)
    return 2.0 * m.inradius / m.diameter


def _start(d: int) -> np.ndarray:
    # a fixed, visibly non-round starting shape
    return np.array([0.4 if k % 2 == 0 else -0.3 for k in range(d - 1)])


def _search(objective, gp: GParams, family: str, cfg: SearchConfig):
    _body_from(family, np.zeros(gp.d - 1))

    def f(x):
        if np.any(np.abs(x) > SEARCH_BOUND):
            return math.inf
        return objective(_body_from(family, x))

    x, val = minimize_nelder_mead(f, _start(gp.d), cfg)
    interior = bool(np.all(np.abs(x) < SEARCH_BOUND - 1e-3))
    return _body_from(family, x), val, interior


def shape_search_max(gp: GParams, family: str = "ellipsoid_aspect",
                     cfg: SearchConfig = SearchConfig()) -> ShapeSearchResult:
    """Maximise the certified lower bound of G over axis-aligned shapes.

    If the best value beats the ball, its ``2 rho / diam`` is checked against
    the applicable maximiser ratio bounds; otherwise the result is reported
    as ball-consistent.
    """
    body, neg, interior = _search(lambda b: -g_lower(b, gp), gp, family, cfg)
    value, ratio = -neg, _ratio(body)
    if value <= g_ball_exact(gp) * (1 + 1e-12):
        return ShapeSearchResult(body, value, ratio, interior, "ball-consistent")
    bounds = []
    for fn in (maximiser_ratio_lower, maximiser_ratio_lower_pd1):
        try:
            bounds.append(fn(gp))
        except HypothesisError:
            pass
    if not bounds:
        return ShapeSearchResult(body, value, ratio, interior, "no-ratio-bound")
    bound = max(bounds)
    status = "ratio-bound-satisfied" if ratio >= bound else "ratio-bound-violated"
    return ShapeSearchResult(body, value, ratio, interior, status, bound)


def shape_search_min(gp: GParams, family: str = "ellipsoid_aspect",
                     cfg: SearchConfig = SearchConfig()) -> ShapeSearchResult:
    """Minimise the certified upper bound of G over axis-aligned shapes.

    For ``r < 0`` and ``beta = 0`` the ball is the minimiser and the status is
    ``"ball"`` or ``"not-ball"``. Searches that run into the box are flagged
    ``"boundary"``, the expected outcome when the infimum is 0.
    """
    body, value, interior = _search(lambda b: g_interval(b, gp).hi, gp, family, cfg)
    ratio = _ratio(body)
    if gp.r < 0 and gp.beta == 0:
        status = "ball" if ratio >= 1 - BALL_ASPECT_TOL else "not-ball"
        return ShapeSearchResult(body, value, ratio, interior, status)
    if not interior:
        return ShapeSearchResult(body, value, ratio, interior, "boundary")
    if value >= g_ball_exact(gp):
        return ShapeSearchResult(body, value, ratio, interior, "ball-consistent")
    try:
        bound = minimiser_ratio_lower(gp)
    except HypothesisError:
        return ShapeSearchResult(body, value, ratio, interior, "no-ratio-bound")
    status = "ratio-bound-satisfied" if ratio >= bound else "ratio-bound-violated"
    return ShapeSearchResult(body, value, ratio, interior, status, bound)
