"""Convex bodies, quermassintegrals and Steiner polynomials.

Three body kinds are supported: balls, ellipsoids (axis-aligned, centred) and
cuboids (axis-aligned, centred). Balls and cuboids have exact quermassintegrals;
for ellipsoids they are obtained by one-dimensional quadrature.
"""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError
from .numerics import QuadratureConfig, integrate_log_scale, monte_carlo_volume

__all__ = [
    "ConvexBody",
    "SteinerPolynomial",
    "BodyMetrics",
    "ball",
    "ellipsoid",
    "cuboid",
    "unit_ball_volume",
    "steiner_of",
    "steiner_volume",
    "steiner_perimeter",
    "metrics_of",
    "check_aleksandrov_fenchel",
    "check_body_inequalities",
    "random_bodies",
    "distance_to_body",
    "mc_validate_steiner",
]

KINDS = ("ball", "ellipsoid", "cuboid")
MIN_LENGTH = 1e-12

# Tighter than the default: ellipsoid quermassintegrals feed 1e-9 scaling checks.
_ELLIPSOID_QUAD = QuadratureConfig(rel_tol=1e-13, abs_tol=1e-300, max_subdivisions=4000)


def unit_ball_volume(n: int) -> float:
    """Volume of the unit ball in R^n (``omega_0 = 1``)."""
    return math.pi ** (n / 2) / math.gamma(n / 2 + 1)


@dataclass(frozen=True)
class ConvexBody:
    """A ball, ellipsoid or cuboid in R^d.

    ``lengths`` holds the radius for a ball, the d semi-axes for an
    ellipsoid and the d edge lengths for a cuboid. Use :func:`ball`,
    :func:`ellipsoid` and :func:`cuboid` to build one.
    """

    kind: str
    lengths: tuple
    dim: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown body kind {self.kind!r}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ValueError("dimension must be an integer >= 2")
        object.__setattr__(self, "dim", int(self.dim))
        lengths = tuple(float(x) for x in self.lengths)
        object.__setattr__(self, "lengths", lengths)
        expected = 1 if self.kind == "ball" else self.dim
        if len(lengths) != expected:
            raise ValueError(f"{self.kind} needs {expected} length(s), got {len(lengths)}")
        for x in lengths:
            if not math.isfinite(x) or x < MIN_LENGTH:
                raise ValueError(f"lengths must be finite and >= {MIN_LENGTH:g}, got {x!r}")

    @property
    def smooth(self) -> bool:
        """True when the boundary is C^2."""
        return self.kind != "cuboid"

    @property
    def scale(self) -> float:
        """Largest defining length; used to make quadratures scale-covariant."""
        return max(self.lengths)

    def scaled(self, t: float) -> "ConvexBody":
        return ConvexBody(self.kind, tuple(t * x for x in self.lengths), self.dim)

    def bounding_half_widths(self) -> np.ndarray:
        if self.kind == "ball":
            return np.full(self.dim, self.lengths[0])
        if self.kind == "ellipsoid":
            return np.array(self.lengths)
        return 0.5 * np.array(self.lengths)


def ball(radius: float = 1.0, d: int = 3) -> ConvexBody:
    return ConvexBody("ball", (radius,), d)


def ellipsoid(semi_axes) -> ConvexBody:
    semi_axes = tuple(semi_axes)
    return ConvexBody("ellipsoid", semi_axes, len(semi_axes))


def cuboid(edges) -> ConvexBody:
    edges = tuple(edges)
    return ConvexBody("cuboid", edges, len(edges))


@dataclass(frozen=True)
class SteinerPolynomial:
    """Quermassintegrals ``W_0 .. W_d`` of a convex body.

    ``|K_t| = sum_n binom(d, n) W_n t^n`` and ``P(K_t)`` is its t-derivative.
    """

    dim: int
    W: tuple
    method: str  # "exact" or "quadrature"

    @property
    def volume_coeffs(self) -> np.ndarray:
        d = self.dim
        return np.array([math.comb(d, n) * self.W[n] for n in range(d + 1)])

    @property
    def perimeter_coeffs(self) -> np.ndarray:
        d = self.dim
        return np.array([n * math.comb(d, n) * self.W[n] for n in range(1, d + 1)])

    def scaled(self, t: float) -> "SteinerPolynomial":
        d = self.dim
        return SteinerPolynomial(d, tuple(w * t ** (d - n) for n, w in enumerate(self.W)),
                                 self.method)


@dataclass(frozen=True)
class BodyMetrics:
    volume: float
    perimeter: float
    inradius: float
    diameter: float
    isoperimetric_ratio: float
    mean_curvature_integral: float


def _elementary_symmetric(xs) -> np.ndarray:
    """Return ``[e_0, e_1, ..., e_n]`` of the values ``xs``."""
    e = np.zeros(len(xs) + 1)
    e[0] = 1.0
    for k, x in enumerate(xs, start=1):
        e[1:k + 1] = e[1:k + 1] + x * e[0:k]
    return e


def _ellipsoid_sphere_integral(a2: np.ndarray, j: int) -> float:
    """Integral over the unit sphere of e_j of the principal radii of curvature.

    The principal radii at unit normal u are the nonzero eigenvalues of the
    Hessian of the support function sqrt(u^T A u), A = diag(a^2). Their
    symmetric functions are rational in u, and the sphere integral collapses,
    through a Gaussian/Laplace transform, to a single integral over (0, inf).
    """
    d = a2.size
    b = np.array([a2[i] * _elementary_symmetric(np.delete(a2, i))[j - 1] for i in range(d)])
    log_c = (d / 2 * math.log(2 * math.pi) - math.lgamma(j / 2)
             - ((d - j) / 2 - 1) * math.log(2.0) - math.lgamma((d - j) / 2) - math.log(j))

    def integrand(tau):
        tau = np.asarray(tau, dtype=float)[..., None]
        s = 1.0 + 2.0 * tau * a2
        log_prod = -0.5 * np.sum(np.log(s), axis=-1)
        inner = np.sum(b / s, axis=-1)
        tau = tau[..., 0]
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            out = np.exp(log_c + (j / 2 - 1) * np.log(tau) + log_prod) * inner
        return np.where(tau > 0, out, 0.0)

    return integrate_log_scale(integrand, scale=0.5, cfg=_ELLIPSOID_QUAD)


def _ellipsoid_quermass(axes) -> tuple:
    a = np.asarray(axes, dtype=float)
    d = a.size
    s = a.max()
    a2 = (a / s) ** 2
    W = [unit_ball_volume(d) * float(np.prod(a))]
    for n in range(1, d):
        j = d - n
        integral = _ellipsoid_sphere_integral(a2, j)
        W.append(s ** (d - n) * integral / (d * math.comb(d - 1, j)))
    W.append(unit_ball_volume(d))
    return tuple(float(w) for w in W)


@functools.lru_cache(maxsize=4096)
def steiner_of(body: ConvexBody) -> SteinerPolynomial:
    """Quermassintegrals of ``body``.

    Balls: ``W_n = omega_d R^(d-n)``. Cuboids: ``binom(d, n) W_n =
    omega_n e_(d-n)(L)``. Ellipsoids: ``W_0`` exactly and the rest by
    quadrature of the curvature integrals, with ``W_d`` set to ``omega_d``.
    """
    d = body.dim
    if body.kind == "ball":
        R = body.lengths[0]
        om = unit_ball_volume(d)
        return SteinerPolynomial(d, tuple(om * R ** (d - n) for n in range(d + 1)), "exact")
    if body.kind == "cuboid":
        e = _elementary_symmetric(body.lengths)
        W = tuple(float(unit_ball_volume(n) * e[d - n] / math.comb(d, n)) for n in range(d + 1))
        return SteinerPolynomial(d, W, "exact")
    try:
        W = _ellipsoid_quermass(body.lengths)
    except NumericalError as exc:
        raise NumericalError(f"ellipsoid quermassintegrals for {body.lengths}: {exc}",
                             "geometry.steiner_of") from exc
    return SteinerPolynomial(d, W, "quadrature")


def _check_t(t):
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(np.isnan(t)):
        raise ValueError("t must be >= 0")
    return t


def steiner_volume(S: SteinerPolynomial, t):
    """``|K_t|``; accepts scalars or arrays."""
    t = _check_t(t)
    out = np.polynomial.polynomial.polyval(t, S.volume_coeffs)
    return float(out) if out.ndim == 0 else out


def steiner_perimeter(S: SteinerPolynomial, t):
    """``P(K_t)``, the derivative of :func:`steiner_volume`."""
    t = _check_t(t)
    out = np.polynomial.polynomial.polyval(t, S.perimeter_coeffs)
    return float(out) if out.ndim == 0 else out


def metrics_of(body: ConvexBody) -> BodyMetrics:
    d = body.dim
    S = steiner_of(body)
    volume = S.W[0]
    perimeter = d * S.W[1]
    L = body.lengths
    if body.kind == "ball":
        rho, diam = L[0], 2 * L[0]
    elif body.kind == "ellipsoid":
        rho, diam = min(L), 2 * max(L)
    else:
        rho, diam = min(L) / 2, math.sqrt(sum(x * x for x in L))
    # I = omega_d d^d |K|^(d-1) / P^d, in logs to survive thin bodies.
    log_I = (math.log(unit_ball_volume(d)) + d * math.log(d)
             + (d - 1) * math.log(volume) - d * math.log(perimeter))
    iso = 1.0 if body.kind == "ball" else min(1.0, math.exp(log_I))
    return BodyMetrics(float(volume), float(perimeter), float(rho), float(diam), float(iso),
                       float(d * S.W[2]))


def check_aleksandrov_fenchel(S: SteinerPolynomial):
    """Slacks ``W_j^(k-i) / (W_i^(k-j) W_k^(j-i)) - 1`` for all i < j < k."""
    logW = np.log(np.asarray(S.W, dtype=float))
    out = []
    for i, j, k in itertools.combinations(range(S.dim + 1), 3):
        expo = (k - i) * logW[j] - (k - j) * logW[i] - (j - i) * logW[k]
        out.append((i, j, k, math.expm1(expo)))
    return out


def check_body_inequalities(body: ConvexBody) -> dict:
    """Relative slacks ``rhs/lhs - 1`` of classical inequalities for convex bodies.

    All entries are >= 0 up to rounding for every convex body:

    * ``inradius_perimeter_lower``: ``1 <= rho P / |K|``
    * ``inradius_perimeter_upper``: ``rho P / |K| <= d``
    * ``isoperimetric_aspect_upper``: ``|K|^((d-1)/d) / P <= d^((d-1)/d) omega^(-1/d) (2 rho/diam)^(1/d)``
    * ``isoperimetric_aspect_lower``: ``|K|^((d-1)/d) / P >= (2 rho/diam) / (d omega^(1/d))``
    * ``diameter_perimeter``: ``diam <= 2 d^(d-1) P^(d-1) / (omega |K|^(d-2))``
    * ``isodiametric``: ``|K| <= omega (diam/2)^d``
    * ``inradius_diameter``: ``2 rho <= diam``
    """
    d = body.dim
    m = metrics_of(body)
    lv, lp, lr, ld = (math.log(m.volume), math.log(m.perimeter), math.log(m.inradius),
                      math.log(m.diameter))
    lw = math.log(unit_ball_volume(d))
    l_ratio = math.log(2.0) + lr - ld
    l_iso = (d - 1) / d * lv - lp
    # each entry is log(rhs) - log(lhs)
    logs = {
        "inradius_perimeter_lower": lr + lp - lv,
        "inradius_perimeter_upper": math.log(d) - (lr + lp - lv),
        "isoperimetric_aspect_upper": (d - 1) / d * math.log(d) - lw / d + l_ratio / d - l_iso,
        "isoperimetric_aspect_lower": l_iso - (l_ratio - math.log(d) - lw / d),
        "diameter_perimeter": (math.log(2.0) + (d - 1) * math.log(d) + (d - 1) * lp - lw
                               - (d - 2) * lv - ld),
        "isodiametric": lw + d * (ld - math.log(2.0)) - lv,
        "inradius_diameter": -l_ratio,
    }
    return {k: math.expm1(v) for k, v in logs.items()}


def random_bodies(kind: str, d: int, n: int, seed: int = 42, spread: float = 1.5) -> list:
    """``n`` seeded random ellipsoids or cuboids with log-lengths uniform in ``[-spread, spread]``."""
    if kind not in ("ellipsoid", "cuboid"):
        raise ValueError("kind must be 'ellipsoid' or 'cuboid'")
    rng = np.random.Generator(np.random.Philox(seed))
    make = ellipsoid if kind == "ellipsoid" else cuboid
    return [make(np.exp(rng.uniform(-spread, spread, d))) for _ in range(n)]


def _distance_to_ellipsoid(x: np.ndarray, a: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row of ``x`` to the solid ellipsoid.

    Outside points: the nearest boundary point is ``a^2 x / (a^2 + lam)``
    with ``lam > 0`` solving ``sum a^2 x^2 / (a^2 + lam)^2 = 1``. Newton runs
    on ``phi(lam) = (sum ...)^(-1/2) - 1``, which is close to linear in lam.
    """
    a2 = a * a
    q = np.sum(x * x / a2, axis=1)
    dist = np.zeros(x.shape[0])
    out = q > 1.0
    if not np.any(out):
        return dist
    xo = x[out]
    c = a2 * xo * xo
    lam = np.zeros(xo.shape[0])
    for _ in range(100):
        den = a2 + lam[:, None]
        s = np.sum(c / den ** 2, axis=1)
        ds = -2.0 * np.sum(c / den ** 3, axis=1)
        phi = s ** -0.5 - 1.0
        dphi = -0.5 * s ** -1.5 * ds
        step = phi / dphi
        lam_new = np.maximum(lam - step, 0.5 * lam)
        done = np.abs(lam_new - lam) <= 1e-14 * (1.0 + lam_new)
        lam = lam_new
        if np.all(done):
            break
    else:
        raise NumericalError("ellipsoid projection did not converge",
                             "geometry.distance_to_body")
    y = a2 * xo / (a2 + lam[:, None])
    dist[out] = np.linalg.norm(xo - y, axis=1)
    return dist


def distance_to_body(body: ConvexBody, x) -> np.ndarray:
    """Distance from each point (row of ``x``) to the body; 0 inside."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if body.kind == "ball":
        return np.maximum(np.linalg.norm(x, axis=1) - body.lengths[0], 0.0)
    if body.kind == "cuboid":
        excess = np.maximum(np.abs(x) - 0.5 * np.asarray(body.lengths), 0.0)
        return np.linalg.norm(excess, axis=1)
    return _distance_to_ellipsoid(x, np.asarray(body.lengths))


def mc_validate_steiner(body: ConvexBody, t: float, n_samples: int = 1_000_000,
                        seed: int = 42):
    """Compare ``|K_t|`` from the Steiner polynomial with a Monte Carlo count.

    Returns ``(poly_value, mc_estimate, z_score)``.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    poly = steiner_volume(steiner_of(body), t)
    h = body.bounding_half_widths() + t
    est, se = monte_carlo_volume(lambda x: distance_to_body(body, x) <= t, (-h, h),
                                 n_samples, seed)
    z = (est - poly) / se if se > 0 else 0.0
    return poly, est, z
