"""Upper and lower bounds for the p-capacity of convex bodies.

Every bound here is a closed-form or one-dimensional-quadrature quantity
built from a body's Steiner polynomial. The only "true" capacity available is
the Newtonian one (d = 3, p = 2) of an ellipsoid, via its classical elliptic
integral; it is exposed as an oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import HypothesisError, NumericalError, QuadratureDivergence
from .geometry import (
    ConvexBody,
    ellipsoid,
    metrics_of,
    steiner_of,
    steiner_perimeter,
    steiner_volume,
    unit_ball_volume,
)
from .numerics import (
    QuadratureConfig,
    SearchConfig,
    integrate_log_scale,
    integrate_semi_infinite,
    minimize_1d,
)

__all__ = [
    "CapParams",
    "CapBoundReport",
    "UPPER_METHODS",
    "cap_ball_exact",
    "cap_upper_steiner_profile",
    "cap_upper_profile_fn",
    "cap_upper_neighbourhood_volume",
    "cap_upper_mean_curvature",
    "cap_upper_perimeter_measure",
    "cap_upper_log_pd1",
    "cap_upper_diameter",
    "cap_lower_perimeter",
    "cap2_ellipsoid_oracle",
    "cap2_thin_ellipsoid_asymptotic",
    "cap_report",
    "measure_vs_diameter_table",
]

UPPER_METHODS = ("steiner_profile", "neighbourhood_volume", "mean_curvature",
                 "perimeter_measure", "log_pd1")


@dataclass(frozen=True)
class CapParams:
    d: int
    p: float

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 2:
            raise ValueError("d must be an integer >= 2")
        object.__setattr__(self, "d", int(self.d))
        if not 1 < self.p < self.d:
            raise ValueError(f"need 1 < p < d, got p={self.p}, d={self.d}")


@dataclass(frozen=True)
class CapBoundReport:
    lower: float
    uppers: dict
    oracle: Optional[float] = None
    skipped: dict = field(default_factory=dict)

    def __post_init__(self):
        slack = 1e-9
        for name, up in self.uppers.items():
            if self.lower > up * (1 + slack):
                raise NumericalError(f"lower bound {self.lower!r} exceeds {name} {up!r}",
                                     "capacity.cap_report")
        if self.oracle is not None:
            if self.lower > self.oracle * (1 + slack) or self.oracle > self.best_upper * (1 + slack):
                raise NumericalError(f"oracle {self.oracle!r} outside the certified bounds",
                                     "capacity.cap_report")

    @property
    def best_upper(self) -> float:
        return min(self.uppers.values())

    @property
    def best_method(self) -> str:
        return min(self.uppers, key=self.uppers.get)


def _check_dim(body, cp):
    if body.dim != cp.d:
        raise ValueError(f"body dimension {body.dim} does not match d={cp.d}")


def cap_ball_exact(cp: CapParams, R: float = 1.0) -> float:
    """p-capacity of the closed ball of radius R."""
    d, p = cp.d, cp.p
    return d * unit_ball_volume(d) * ((d - p) / (p - 1)) ** (p - 1) * R ** (d - p)


def cap_upper_profile_fn(P_profile: Callable, cp: CapParams,
                         cfg: QuadratureConfig = QuadratureConfig(),
                         scale: float = 1.0) -> float:
    """``(int_0^inf P(t)^(-1/(p-1)) dt)^(1-p)`` for a perimeter profile ``P``.

    ``P`` is assumed nondecreasing with ``P(t) ~ t^(d-1)`` at infinity, so
    the integral can only diverge at ``t = 0`` and only when ``P(0) = 0``.
    In that case divergence is detected numerically (estimate above
    ``1/cfg.abs_tol``) and the capacity 0 of such sets, points for example,
    is returned. When ``P(0) > 0`` the integrand is normalised by its value
    at 0 and the variable by its half-decay length, which keeps the
    quadrature well scaled for any p and any thickness.
    """
    expo = -1.0 / (cp.p - 1.0)

    def profile(t):
        v = np.asarray(P_profile(t), dtype=float)
        if np.any(v < 0):
            raise ValueError("perimeter profile must be nonnegative")
        return v

    P0 = float(profile(0.0))
    if P0 == 0.0:
        def integrand(t):
            with np.errstate(divide="ignore"):
                return profile(t) ** expo

        try:
            integral = integrate_semi_infinite(integrand, cfg, scale=scale,
                                               diverge_above=1.0 / cfg.abs_tol)
        except QuadratureDivergence:
            return 0.0
        return integral ** (1.0 - cp.p)

    log_p0 = math.log(P0)

    def log_ratio(t):
        # log of integrand(t) / integrand(0), always <= 0
        with np.errstate(divide="ignore"):
            return expo * (np.log(profile(t)) - log_p0)

    # half-decay length L of the integrand, found in log t
    v0 = math.log(scale)
    lo, hi = v0 - 60.0, v0 + 60.0
    h = lambda v: float(log_ratio(math.exp(v))) + math.log(2.0)
    if h(lo) <= 0 or h(hi) >= 0:
        raise NumericalError("perimeter profile does not grow over 52 decades",
                             "capacity.cap_upper_profile_fn")
    L = math.exp(brentq(h, lo, hi, xtol=1e-12, rtol=1e-14))

    def normalised(u):
        return np.exp(log_ratio(L * np.asarray(u, dtype=float)))

    integral = integrate_semi_infinite(normalised, cfg, scale=1.0)
    return P0 * (L * integral) ** (1.0 - cp.p)


def cap_upper_steiner_profile(body: ConvexBody, cp: CapParams,
                              cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Capacity bound from the distance-function test potential.

    The potential depends only on the distance to the body; its energy is
    ``(int_0^inf P(K_t)^(-1/(p-1)) dt)^(1-p)``. Exact for balls.
    """
    _check_dim(body, cp)
    # evaluate at unit scale so that the covariance t^(d-p) is exact
    s = body.scale
    S = steiner_of(body.scaled(1.0 / s))
    val = cap_upper_profile_fn(lambda t: steiner_perimeter(S, t), cp, cfg)
    return val * s ** (cp.d - cp.p)


def cap_upper_neighbourhood_volume(body: ConvexBody, cp: CapParams,
                                   cfg: SearchConfig = SearchConfig()):
    """``inf_a |K_a| / a^p``; returns ``(bound, argmin_a)``.

    The objective is convex in ``log a`` so golden section on ``log a`` is
    safe; the search variable is measured in units of the body scale.
    """
    _check_dim(body, cp)
    S = steiner_of(body)
    s = body.scale
    coeffs = S.volume_coeffs
    n = np.arange(coeffs.size)
    p = cp.p

    def objective(v):
        a = s * math.exp(v)
        # sum_n c_n a^(n-p), in logs to keep thin bodies finite
        return float(np.sum(coeffs * np.exp((n - p) * math.log(a))))

    v, val = minimize_1d(objective, -40.0, 40.0, cfg)
    return val, s * math.exp(v)


def cap_upper_mean_curvature(body: ConvexBody, cp: CapParams) -> float:
    """``((d-p)/(p-1))^(p-1) M^(p-1) / P^(p-2)``; needs a C^2 boundary."""
    _check_dim(body, cp)
    if not body.smooth:
        raise HypothesisError("C² boundary required")
    d, p = cp.d, cp.p
    m = metrics_of(body)
    log_v = ((p - 1) * math.log((d - p) / (p - 1)) + (p - 1) * math.log(m.mean_curvature_integral)
             - (p - 2) * math.log(m.perimeter))
    return math.exp(log_v)


def cap_upper_perimeter_measure(body: ConvexBody, cp: CapParams) -> float:
    """``((d-p)/(d(p-1)))^(p-1) P^p / |K|^(p-1)``; any convex body."""
    _check_dim(body, cp)
    d, p = cp.d, cp.p
    m = metrics_of(body)
    log_v = ((p - 1) * math.log((d - p) / (d * (p - 1))) + p * math.log(m.perimeter)
             - (p - 1) * math.log(m.volume))
    return math.exp(log_v)


def _log_inverse_isoperimetric(body: ConvexBody) -> float:
    d = body.dim
    m = metrics_of(body)
    return -(math.log(unit_ball_volume(d)) + d * math.log(d) + (d - 1) * math.log(m.volume)
             - d * math.log(m.perimeter))


def cap_upper_log_pd1(body: ConvexBody, d: Optional[int] = None) -> float:
    """Logarithmic bound for ``cap_(d-1)`` of a convex body, d >= 3.

    ``d^(2-d) (d-1) 2^(d-2) P^(d-1) / |K|^(d-2) * log(1/I)^(2-d)``. It blows
    up at the ball, so near-balls are refused.
    """
    if d is None:
        d = body.dim
    if d != body.dim:
        raise ValueError(f"body dimension {body.dim} does not match d={d}")
    if d < 3:
        raise HypothesisError("logarithmic bound needs d >= 3")
    log_inv_I = _log_inverse_isoperimetric(body)
    if not log_inv_I > 1e-12:
        raise HypothesisError("logarithmic bound degenerate at the ball")
    m = metrics_of(body)
    log_v = ((2 - d) * math.log(d) + math.log(d - 1) + (d - 2) * math.log(2)
             + (d - 1) * math.log(m.perimeter) - (d - 2) * math.log(m.volume)
             + (2 - d) * math.log(log_inv_I))
    return math.exp(log_v)


def cap_upper_diameter(body: ConvexBody, cp: CapParams) -> float:
    """Capacity of a ball of radius ``diam(K)``, which contains K."""
    _check_dim(body, cp)
    return cap_ball_exact(cp, metrics_of(body).diameter)


def cap_lower_perimeter(body: ConvexBody, cp: CapParams) -> float:
    """``d omega_d (d(d-p)/(p(d-1)))^(p-1) (P/(d omega_d))^((d-p)/(d-1))``."""
    _check_dim(body, cp)
    d, p = cp.d, cp.p
    dw = d * unit_ball_volume(d)
    P = metrics_of(body).perimeter
    log_v = (math.log(dw) + (p - 1) * math.log(d * (d - p) / (p * (d - 1)))
             + (d - p) / (d - 1) * (math.log(P) - math.log(dw)))
    return math.exp(log_v)


def cap2_ellipsoid_oracle(semi_axes) -> float:
    """Newtonian capacity of a solid ellipsoid in R^3.

    ``8 pi / int_0^inf ds / sqrt((a^2+s)(b^2+s)(c^2+s))``; equals ``4 pi R``
    for a ball of radius R.
    """
    a = np.asarray(semi_axes, dtype=float)
    if a.shape != (3,) or np.any(a <= 0):
        raise ValueError("need three positive semi-axes")
    s = a.max()
    a2 = (a / s) ** 2

    def integrand(x):
        x = np.asarray(x, dtype=float)[..., None]
        return np.exp(-0.5 * np.sum(np.log(a2 + x), axis=-1))

    cfg = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-300, max_subdivisions=4000)
    return float(s * 8.0 * math.pi / integrate_log_scale(integrand, scale=1.0, cfg=cfg))


def cap2_thin_ellipsoid_asymptotic(d: int, eps: float) -> float:
    """Leading-order 2-capacity of the ellipsoid with semi-axes (1, eps, ..., eps)."""
    if d < 3:
        raise ValueError("asymptotic formula needs d >= 3")
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    if d == 3:
        return 4.0 * math.pi / math.log(1.0 / eps)
    return 2.0 * math.pi ** (d / 2) * (d - 3) / math.gamma(d / 2) * eps ** (d - 3)


def cap_report(body: ConvexBody, cp: CapParams,
               quad: QuadratureConfig = QuadratureConfig(),
               search: SearchConfig = SearchConfig()) -> CapBoundReport:
    """Evaluate every applicable bound.

    Methods whose hypotheses fail are left out of ``uppers`` and listed in
    ``skipped`` with a reason; numerical failures propagate. The d = 3,
    p = 2 oracle is attached for balls and ellipsoids.
    """
    _check_dim(body, cp)
    uppers, skipped = {}, {}

    def attempt(name, fn):
        try:
            uppers[name] = float(fn())
        except HypothesisError as exc:
            skipped[name] = str(exc)

    attempt("steiner_profile", lambda: cap_upper_steiner_profile(body, cp, quad))
    attempt("neighbourhood_volume", lambda: cap_upper_neighbourhood_volume(body, cp, search)[0])
    attempt("mean_curvature", lambda: cap_upper_mean_curvature(body, cp))
    attempt("perimeter_measure", lambda: cap_upper_perimeter_measure(body, cp))
    if cp.d >= 3 and math.isclose(cp.p, cp.d - 1, rel_tol=0, abs_tol=1e-12):
        attempt("log_pd1", lambda: cap_upper_log_pd1(body))
    else:
        skipped["log_pd1"] = "needs p = d - 1 and d >= 3"

    oracle = None
    if cp.d == 3 and cp.p == 2 and body.smooth:
        axes = body.lengths * 3 if body.kind == "ball" else body.lengths
        oracle = float(cap2_ellipsoid_oracle(axes))
    return CapBoundReport(cap_lower_perimeter(body, cp), uppers, oracle, skipped)


def measure_vs_diameter_table(family: str, params=(2.0, 4.0, 8.0, 16.0), cp=CapParams(3, 2.0)):
    """Compare the perimeter-measure bound with the enclosing-ball bound.

    ``family`` is ``"prolate"`` (semi-axes (L, 1, 1)) or ``"oblate"``
    (semi-axes (1, 1, eps)). Rows are ``(param, perimeter_measure,
    diameter, winner)``.
    """
    rows = []
    for x in params:
        if family == "prolate":
            body = ellipsoid([x] + [1.0] * (cp.d - 1))
        elif family == "oblate":
            body = ellipsoid([1.0] * (cp.d - 1) + [x])
        else:
            raise ValueError(f"unknown family {family!r}")
        pm = cap_upper_perimeter_measure(body, cp)
        dm = cap_upper_diameter(body, cp)
        rows.append((x, pm, dm, "perimeter_measure" if pm <= dm else "diameter"))
    return rows
