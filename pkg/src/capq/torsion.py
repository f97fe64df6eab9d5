"""Bounds for the q-torsional rigidity of convex bodies.

``T_q`` is never computed variationally. It is represented by the exact ball
value, two-sided inradius bounds and their perimeter forms. For q = 2 the
ellipsoid value is classical and serves as an oracle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ConvexBody, metrics_of, unit_ball_volume

__all__ = [
    "TorsionParams",
    "TorsionInterval",
    "torsion_ball_exact",
    "torsion_interval_inradius",
    "torsion_power_interval_perimeter",
    "torsion_upper_saint_venant",
    "constants_c1_c2",
    "certified_power_constants",
    "torsion2_ellipsoid_exact",
]


@dataclass(frozen=True)
class TorsionParams:
    q: float
    r: float = 1.0

    def __post_init__(self):
        if not self.q > 1 or not math.isfinite(self.q):
            raise ValueError(f"need finite q > 1, got {self.q}")
        if not math.isfinite(self.r):
            raise ValueError("r must be finite")

    @property
    def q_prime(self) -> float:
        return self.q / (self.q - 1.0)


@dataclass(frozen=True)
class TorsionInterval:
    lo: float
    hi: float

    def __post_init__(self):
        if not 0 < self.lo <= self.hi:
            raise ValueError(f"invalid torsion interval [{self.lo}, {self.hi}]")

    def contains(self, x: float, rel: float = 0.0) -> bool:
        return self.lo * (1 - rel) <= x <= self.hi * (1 + rel)


def torsion_ball_exact(d: int, tp: TorsionParams, R: float = 1.0) -> float:
    """``omega_d R^(d+q') / (d^(q'-1) (q'+d))``."""
    qp = tp.q_prime
    return unit_ball_volume(d) * R ** (d + qp) / (d ** (qp - 1) * (qp + d))


def torsion_interval_inradius(body: ConvexBody, tp: TorsionParams) -> TorsionInterval:
    """``|K| rho^q'`` times ``1/(d^(q'-1)(d+q'))`` (lo) and ``1/(q'+1)`` (hi).

    The lower end is attained by balls.
    """
    d, qp = body.dim, tp.q_prime
    m = metrics_of(body)
    base = m.volume * m.inradius ** qp
    return TorsionInterval(base / (d ** (qp - 1) * (d + qp)), base / (qp + 1))


def constants_c1_c2(d: int, tp: TorsionParams):
    """The nominal piecewise constants ``(C1, C2)``.

    Warning: for ``r < 0`` the nominal ``C1 = (q'+1)^(-r)`` does not bound
    ``T^r / X`` from below (the unit ball in d = 3 with q = 2, r = -1 breaks
    it). Use :func:`certified_power_constants` for anything that must hold.
    """
    qp, r = tp.q_prime, tp.r
    lower_ball = 1.0 / (d ** (r * (qp - 1)) * (d + qp) ** r)
    thin = d ** (qp * r) / (qp + 1) ** r
    if r > 0:
        return lower_ball, thin
    return 1.0 / (qp + 1) ** r, lower_ball


def certified_power_constants(d: int, tp: TorsionParams):
    """Constants ``(c1, c2)`` with ``c1 X <= T_q^r <= c2 X`` for every convex body.

    ``X = |K|^((1+q')r) / P^(q'r)``. They follow from the inradius bounds and
    ``|K|/P <= rho <= d|K|/P``; ``c2`` agrees with the nominal ``C2``, and
    ``c1`` agrees with the nominal ``C1`` for ``r > 0``.
    """
    qp, r = tp.q_prime, tp.r
    lower_ball = 1.0 / (d ** (r * (qp - 1)) * (d + qp) ** r)
    thin = d ** (qp * r) / (qp + 1) ** r
    return (lower_ball, thin) if r > 0 else (thin, lower_ball)


def torsion_power_interval_perimeter(body: ConvexBody, tp: TorsionParams) -> TorsionInterval:
    """Certified interval for ``T_q(K)^r`` in terms of volume and perimeter.

    Evaluated in logs so that thin bodies and large ``|r|`` do not overflow.
    """
    d, qp, r = body.dim, tp.q_prime, tp.r
    m = metrics_of(body)
    log_x = (1 + qp) * r * math.log(m.volume) - qp * r * math.log(m.perimeter)
    c1, c2 = certified_power_constants(d, tp)
    return TorsionInterval(math.exp(math.log(c1) + log_x), math.exp(math.log(c2) + log_x))


def torsion_upper_saint_venant(body: ConvexBody, tp: TorsionParams) -> float:
    """Ball value at the volume-equivalent radius (the ball maximises T_q)."""
    d = body.dim
    R = (metrics_of(body).volume / unit_ball_volume(d)) ** (1.0 / d)
    return torsion_ball_exact(d, tp, R)


def torsion2_ellipsoid_exact(semi_axes) -> float:
    """Classical (q = 2) torsional rigidity of a solid ellipsoid.

    The torsion function is ``(1 - sum x_i^2/a_i^2) / (2 sum a_i^-2)``, whose
    integral is ``|E| / ((d+2) sum a_i^-2)``.
    """
    a = np.asarray(semi_axes, dtype=float)
    if a.ndim != 1 or a.size < 2 or np.any(a <= 0):
        raise ValueError("need at least two positive semi-axes")
    d = a.size
    volume = unit_ball_volume(d) * float(np.prod(a))
    return volume / ((d + 2) * float(np.sum(a ** -2.0)))
