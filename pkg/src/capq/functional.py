"""The scale-invariant shape functional

    G(K) = cap_p(K) T_q(K)^r / (|K|^alpha P(K)^beta),

constrained by ``d alpha + (d-1) beta = d - p + (d+q') r``: its exact ball
value, certified intervals for general bodies and closed-form bounds on its
supremum, infimum and on the shape of extremisers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

from .capacity import CapParams, cap2_ellipsoid_oracle, cap_lower_perimeter, cap_report
from .errors import HypothesisError, NumericalError, ParameterError
from .geometry import ConvexBody, metrics_of, unit_ball_volume
from .numerics import QuadratureConfig, SearchConfig
from .torsion import (
    TorsionParams,
    certified_power_constants,
    constants_c1_c2,
    torsion2_ellipsoid_exact,
    torsion_power_interval_perimeter,
)

__all__ = [
    "GParams",
    "GInterval",
    "EXPONENTS",
    "CONSTRAINT_TOL",
    "alpha_star",
    "make_params",
    "g_from_parts",
    "g_ball_exact",
    "g_lower",
    "g_interval",
    "g_oracle",
    "sup_bound_rhs",
    "maximiser_ratio_lower",
    "maximiser_ratio_lower_pd1",
    "inf_bound_rhs",
    "minimiser_ratio_lower",
]

CONSTRAINT_TOL = 1e-12
# slack for comparing hypothesis sides that are equal in exact arithmetic but not in floats
_HYP_TOL = 1e-12


@dataclass(frozen=True)
class GParams:
    """Exponents of G. ``relaxed`` admits ``alpha < 0`` (see :func:`make_params`)."""

    d: int
    p: float
    q: float
    r: float
    alpha: float
    beta: float
    relaxed: bool = False

    def __post_init__(self):
        CapParams(self.d, self.p)
        TorsionParams(self.q, self.r)
        if self.beta < 0:
            raise ParameterError("beta must be >= 0")
        if self.alpha < 0 and not self.relaxed:
            raise ParameterError(f"alpha = {self.alpha!r} is negative")
        lhs = self.d * self.alpha + (self.d - 1) * self.beta
        rhs = self.d - self.p + (self.d + self.q_prime) * self.r
        if abs(lhs - rhs) > CONSTRAINT_TOL * max(1.0, abs(rhs)):
            raise ParameterError(
                f"scale-invariance constraint violated: d*alpha + (d-1)*beta = {lhs!r} "
                f"but d - p + (d+q')*r = {rhs!r}")

    @property
    def q_prime(self) -> float:
        return self.q / (self.q - 1.0)

    @property
    def cap_params(self) -> CapParams:
        return CapParams(self.d, self.p)

    @property
    def torsion_params(self) -> TorsionParams:
        return TorsionParams(self.q, self.r)


@dataclass(frozen=True)
class GInterval:
    """Certified bracket for G; ``oracle_*`` fields use the exact capacity when known."""

    lo: float
    hi: float
    method_lo: str
    method_hi: str
    oracle_lo: Optional[float] = None
    oracle_hi: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.lo <= self.hi * (1 + 1e-12):
            raise NumericalError(f"invalid G interval [{self.lo!r}, {self.hi!r}]",
                                 "functional.g_interval")


def alpha_star(d: int, p: float, q: float, r: float) -> float:
    """Value of alpha when the perimeter term is absent (beta = 0)."""
    qp = q / (q - 1.0)
    return (d - p + (d + qp) * r) / d


def make_params(d: int, p: float, q: float, r: float, beta: float = 0.0, *,
                strict: bool = True) -> GParams:
    """Build parameters with alpha solved from the scale-invariance constraint.

    With ``strict=False`` a negative alpha is allowed. That regime still
    makes sense for statements at ``beta = 0`` whose proofs never use the
    sign of alpha, such as ball minimality for ``r < 0``.
    """
    qp = q / (q - 1.0)
    alpha = (d - p + (d + qp) * r - (d - 1) * beta) / d
    if alpha < 0 and strict:
        raise ParameterError(f"scale-invariance constraint gives negative alpha = {alpha!r}")
    return GParams(d, p, q, r, alpha, beta, relaxed=not strict)


# Exponents of d in the closed-form bounds, written once and tested factor by factor.
EXPONENTS = {
    # ball value: d^(1 + r - q'r - beta), omega^((p - q'r - beta)/d)
    "ball_d": lambda d, p, qp, r, b: 1 + r - qp * r - b,
    "ball_omega": lambda d, p, qp, r, b: (p - qp * r - b) / d,
    # supremum bound, perimeter-measure branch and diameter branch
    "sup_1": lambda d, p, qp, r, b: (2 - 1 / d) * (qp * r + b - p) - r,
    "sup_2": lambda d, p, qp, r, b: 2 * qp * r + 2 * b + d - p - r - (qp * r + b + d - p) / d,
    # infimum bound
    "inf": lambda d, p, qp, r, b: d * (p - 1) / (d - 1) + p / d + (2 - 1 / d) * (qp * r + b) - r - 2,
    # power of 2 rho/diam controlled by the minimiser bound
    "min_ratio": lambda d, p, qp, r, b: (d - p - (d - 1) * (qp * r + b)) / (d * (d - 1)),
}


def _exp(name, gp: GParams) -> float:
    return EXPONENTS[name](gp.d, gp.p, gp.q_prime, gp.r, gp.beta)


def g_from_parts(cap: float, torsion: float, volume: float, perimeter: float,
                 gp: GParams) -> float:
    """``cap T^r / (|K|^alpha P^beta)`` evaluated in logs."""
    return math.exp(math.log(cap) + gp.r * math.log(torsion)
                    - gp.alpha * math.log(volume) - gp.beta * math.log(perimeter))


def _log_g_ball(gp: GParams) -> float:
    d, p, qp, r = gp.d, gp.p, gp.q_prime, gp.r
    return ((p - 1) * math.log((d - p) / (p - 1)) + _exp("ball_d", gp) * math.log(d)
            - r * math.log(d + qp) + _exp("ball_omega", gp) * math.log(unit_ball_volume(d)))


def g_ball_exact(gp: GParams) -> float:
    """G of the unit ball (and of every ball, by scale invariance)."""
    return math.exp(_log_g_ball(gp))


def g_oracle(body: ConvexBody, gp: GParams) -> Optional[float]:
    """Exact G for balls and ellipsoids when d = 3, p = 2, q = 2; otherwise None."""
    if not (gp.d == 3 and gp.p == 2 and gp.q == 2 and body.smooth and body.dim == 3):
        return None
    axes = body.lengths * 3 if body.kind == "ball" else body.lengths
    m = metrics_of(body)
    return g_from_parts(cap2_ellipsoid_oracle(axes), torsion2_ellipsoid_exact(axes),
                        m.volume, m.perimeter, gp)


def g_lower(body: ConvexBody, gp: GParams) -> float:
    """Certified lower bound for G: perimeter capacity bound times the torsion power bound.

    Needs only the volume and perimeter, so it is cheap enough for searches.
    """
    if body.dim != gp.d:
        raise ValueError(f"body dimension {body.dim} does not match d={gp.d}")
    m = metrics_of(body)
    t_lo = torsion_power_interval_perimeter(body, gp.torsion_params).lo
    return math.exp(math.log(cap_lower_perimeter(body, gp.cap_params)) + math.log(t_lo)
                    - gp.alpha * math.log(m.volume) - gp.beta * math.log(m.perimeter))


def g_interval(body: ConvexBody, gp: GParams,
               quad: QuadratureConfig = QuadratureConfig(),
               search: SearchConfig = SearchConfig()) -> GInterval:
    """Certified interval for G(body) from capacity and torsion bounds."""
    if body.dim != gp.d:
        raise ValueError(f"body dimension {body.dim} does not match d={gp.d}")
    cp = gp.cap_params
    m = metrics_of(body)
    t_pow = torsion_power_interval_perimeter(body, gp.torsion_params)
    log_den = gp.alpha * math.log(m.volume) + gp.beta * math.log(m.perimeter)

    report = cap_report(body, cp, quad, search)
    lo = math.exp(math.log(cap_lower_perimeter(body, cp)) + math.log(t_pow.lo) - log_den)
    hi = math.exp(math.log(report.best_upper) + math.log(t_pow.hi) - log_den)
    oracle_lo = oracle_hi = None
    if report.oracle is not None:
        oracle_lo = math.exp(math.log(report.oracle) + math.log(t_pow.lo) - log_den)
        oracle_hi = math.exp(math.log(report.oracle) + math.log(t_pow.hi) - log_den)
    return GInterval(lo, hi, "perimeter_lower", report.best_method, oracle_lo, oracle_hi)


def _geq(a, b):
    return a >= b - _HYP_TOL


def _gt(a, b):
    return a > b + _HYP_TOL


def sup_bound_rhs(gp: GParams) -> float:
    """Upper bound on sup G over convex bodies.

    Two estimates exist: one from the perimeter-measure capacity bound (needs
    ``q'r >= p - beta``) and one from the enclosing-ball bound (needs
    ``q'r >= (d-1)(d-p) - beta``). The smaller applicable one is returned.
    """
    d, p, qp, r, b = gp.d, gp.p, gp.q_prime, gp.r, gp.beta
    _, c2 = constants_c1_c2(d, gp.torsion_params)
    base = math.log(c2) + r * math.log(d + qp) + _log_g_ball(gp)
    values = []
    if _geq(qp * r, p - b):
        values.append(math.exp(base + _exp("sup_1", gp) * math.log(d)))
    if _geq(qp * r, (d - 1) * (d - p) - b):
        values.append(math.exp(base + _exp("sup_2", gp) * math.log(d)))
    if not values:
        raise HypothesisError(
            f"supremum bound needs q'r >= p - beta or q'r >= (d-1)(d-p) - beta (q'r = {qp * r!r})")
    return min(values)


def _check_ratio(v: float, where: str) -> float:
    if not 0 < v <= 1:
        raise NumericalError(f"ratio bound {v!r} outside (0, 1]", where)
    return v


def maximiser_ratio_lower(gp: GParams) -> float:
    """Lower bound on ``2 rho / diam`` of any maximiser of G.

    Needs ``q'r > p - beta`` or ``q'r > (d-1)(d-p) - beta`` (strict); when
    both hold the larger bound is returned.
    """
    d, p, qp, r, b = gp.d, gp.p, gp.q_prime, gp.r, gp.beta
    _, c2 = constants_c1_c2(d, gp.torsion_params)
    log_k = math.log(c2) + r * math.log(d + qp)
    values = []
    X = qp * r + b - p
    if _gt(X, 0.0):
        values.append(math.exp((1 - 2 * d + d * r / X) * math.log(d) - d / X * log_k))
    Y = qp * r + b - (d - 1) * (d - p)
    if _gt(Y, 0.0):
        values.append(math.exp((1 + d * (r - 2 * qp * r - 2 * b) / Y) * math.log(d) - d / Y * log_k))
    if not values:
        raise HypothesisError("maximiser ratio bound needs q'r > p - beta or "
                              "q'r > (d-1)(d-p) - beta")
    return _check_ratio(max(values), "functional.maximiser_ratio_lower")


def maximiser_ratio_lower_pd1(gp: GParams) -> float:
    """Lower bound on ``2 rho / diam`` of a maximiser when ``q'r = p = d - 1``, beta = 0."""
    d, p, qp, r = gp.d, gp.p, gp.q_prime, gp.r
    if d < 3:
        raise HypothesisError("needs d >= 3")
    if abs(qp * r - p) > _HYP_TOL or abs(p - (d - 1)) > _HYP_TOL or gp.beta != 0:
        raise HypothesisError(f"needs q'r = p = d - 1 and beta = 0 (q'r = {qp * r!r}, p = {p!r})")
    inner = (2 * (d - 2) * d ** ((d - 1 - r) / (d - 2)) * (d - 1) ** (1 / (d - 2))
             * ((qp + d) / (qp + 1)) ** (r / (d - 2)))
    return _check_ratio(math.exp((1 - 2 * d) * math.log(d) - inner),
                        "functional.maximiser_ratio_lower_pd1")


def _log_inf_factor(gp: GParams) -> float:
    d, p, qp, r = gp.d, gp.p, gp.q_prime, gp.r
    c1, _ = certified_power_constants(d, gp.torsion_params)
    return (math.log(c1) + (p - 1) * math.log((p - 1) / (p * (d - 1)))
            + _exp("inf", gp) * math.log(d) + r * math.log(d + qp))


def inf_bound_rhs(gp: GParams) -> float:
    """Lower bound on inf G over convex bodies; needs ``q'r <= (d-p)/(d-1) - beta``.

    The torsion constant is the certified one, which differs from the
    nominal ``C1`` only for ``r < 0``.
    """
    d, p, qp, r, b = gp.d, gp.p, gp.q_prime, gp.r, gp.beta
    if not _geq((d - p) / (d - 1) - b, qp * r):
        raise HypothesisError(
            f"infimum bound needs q'r <= (d-p)/(d-1) - beta (q'r = {qp * r!r}); the infimum is 0")
    return math.exp(_log_inf_factor(gp) + _log_g_ball(gp))


def minimiser_ratio_lower(gp: GParams) -> float:
    """Lower bound on ``2 rho / diam`` of a minimiser; needs ``q'r < (d-p)/(d-1) - beta``."""
    d, p, qp, r, b = gp.d, gp.p, gp.q_prime, gp.r, gp.beta
    if not _gt((d - p) / (d - 1) - b, qp * r):
        raise HypothesisError(f"minimiser ratio bound needs q'r < (d-p)/(d-1) - beta "
                              f"(q'r = {qp * r!r})")
    return _check_ratio(math.exp(_log_inf_factor(gp) / _exp("min_ratio", gp)),
                        "functional.minimiser_ratio_lower")
