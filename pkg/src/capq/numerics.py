"""Deterministic numerical kernels.

Adaptive quadrature on (0, inf), golden-section and Nelder-Mead searches,
seeded Monte Carlo volumes and log-log slope fits. Everything here is a pure
function of its arguments.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize

from .errors import NumericalError, QuadratureDivergence, QuadratureError, SearchError

__all__ = [
    "QuadratureConfig",
    "SearchConfig",
    "SlopeFit",
    "integrate_interval",
    "integrate_semi_infinite",
    "integrate_log_scale",
    "minimize_1d",
    "minimize_nelder_mead",
    "fit_loglog_slope",
    "monte_carlo_volume",
]


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_subdivisions: int = 2000

    def __post_init__(self):
        if not self.rel_tol > 0 or not self.abs_tol > 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_subdivisions < 1:
            raise ValueError("max_subdivisions must be >= 1")


@dataclass(frozen=True)
class SearchConfig:
    tol: float = 1e-9
    max_iters: int = 500
    seed: int = 42

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("search tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    r_squared: float


# Embedded pair: 21-point Gauss-Legendre estimate, 10-point rule for the error.
_X_HI, _W_HI = np.polynomial.legendre.leggauss(21)
_X_LO, _W_LO = np.polynomial.legendre.leggauss(10)
_NODES = np.concatenate([_X_HI, _X_LO])
_N_HI = _X_HI.size


def _as_vectorized(f):
    """Return a callable mapping 1-D arrays to 1-D float arrays."""
    probe = np.array([0.5, 0.25])
    try:
        out = np.asarray(f(probe), dtype=float)
        if out.shape == probe.shape:
            return lambda x: np.asarray(f(x), dtype=float)
    except Exception:
        pass
    return lambda x: np.array([f(float(xi)) for xi in x], dtype=float)


def _adaptive(pieces, cfg, where, diverge_above=None):
    """Globally adaptive Gauss-Legendre integration over several pieces.

    ``pieces`` is a list of ``(g, a, b)`` with ``g`` vectorized. Returns the
    sum of the integrals.
    """

    def rule(g, a, b):
        half = 0.5 * (b - a)
        mid = 0.5 * (a + b)
        v = g(mid + half * _NODES)
        if not np.all(np.isfinite(v)):
            raise QuadratureError("non-finite integrand", where)
        hi = half * np.dot(_W_HI, v[:_N_HI])
        lo = half * np.dot(_W_LO, v[_N_HI:])
        return hi, abs(hi - lo)

    heap = []
    total = 0.0
    err = 0.0
    counter = 0
    for g, a, b in pieces:
        val, e = rule(g, a, b)
        total += val
        err += e
        heapq.heappush(heap, (-e, counter, g, a, b, val))
        counter += 1

    n_cells = len(heap)
    while err > max(cfg.abs_tol, cfg.rel_tol * abs(total)):
        if diverge_above is not None and abs(total) > diverge_above:
            raise QuadratureDivergence(
                f"integral exceeds {diverge_above:g}", where)
        if n_cells >= cfg.max_subdivisions:
            raise QuadratureError(
                f"quadrature budget exceeded (estimate {total:.6g}, error {err:.3g})",
                where)
        neg_e, _, g, a, b, val = heapq.heappop(heap)
        m = 0.5 * (a + b)
        if not (a < m < b):
            raise QuadratureError("quadrature budget exceeded (interval underflow)", where)
        total -= val
        err += neg_e
        for lo_, hi_ in ((a, m), (m, b)):
            v, e = rule(g, lo_, hi_)
            total += v
            err += e
            heapq.heappush(heap, (-e, counter, g, lo_, hi_, v))
            counter += 1
        n_cells += 1
    # Recompute from the cells to shed accumulated rounding in the running sums.
    total = math.fsum(cell[5] for cell in heap)
    if diverge_above is not None and abs(total) > diverge_above:
        raise QuadratureDivergence(f"integral exceeds {diverge_above:g}", where)
    return total


def integrate_interval(f: Callable, a: float, b: float,
                       cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Adaptive quadrature of ``f`` over the finite interval [a, b]."""
    if not a < b:
        raise ValueError("need a < b")
    g = _as_vectorized(f)
    return _adaptive([(g, a, b)], cfg, "numerics.integrate_interval")


def integrate_semi_infinite(f: Callable, cfg: QuadratureConfig = QuadratureConfig(),
                            scale: float = 1.0, diverge_above: float | None = None) -> float:
    """Integrate ``f`` over (0, inf).

    The half-line is split at ``scale``; the near part is integrated directly
    and the far part through ``t = scale / w**2``, which turns an algebraic
    tail into a mild integrable singularity at ``w = 0``. Both endpoint
    singularities then sit at zero, where bisection keeps full relative
    precision.

    Parameters
    ----------
    f : callable
        Integrand; evaluated on numpy arrays when it supports them.
    cfg : QuadratureConfig
    scale : float
        Natural length scale of the integrand. Passing a scale that is
        covariant with the problem makes the result exactly covariant too.
    diverge_above : float, optional
        Raise :class:`QuadratureDivergence` once the estimate exceeds this.

    Raises
    ------
    QuadratureError
        "quadrature budget exceeded" or "non-finite integrand".
    """
    if not scale > 0:
        raise ValueError("scale must be positive")
    fv = _as_vectorized(f)
    where = "numerics.integrate_semi_infinite"

    def near(x):
        return scale * fv(scale * x)

    # t = scale / w**2 softens the u**(gamma - 2) endpoint behaviour further.
    def far(w):
        with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
            w2 = w * w
            v = fv(scale / w2)
            jac = 2.0 * scale / (w2 * w)
            out = np.where(v == 0.0, 0.0, v * jac)
        return out

    return _adaptive([(near, 0.0, 1.0), (far, 0.0, 1.0)], cfg, where, diverge_above)


def integrate_log_scale(f: Callable, scale: float,
                        cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Integrate ``f`` over (0, inf) in the variable ``v = log(t / scale)``.

    Suited to integrands with features spread over many decades (thin
    ellipsoids), provided ``t f(t)`` decays at both ends.
    """
    fv = _as_vectorized(f)

    def g(v):
        with np.errstate(over="ignore", under="ignore", invalid="ignore"):
            t_up = scale * np.exp(v)
            t_dn = scale * np.exp(-v)
            a = fv(t_up) * t_up
            b = fv(t_dn) * t_dn
            a = np.where(t_up == np.inf, 0.0, a)
            b = np.where(t_dn == 0.0, 0.0, b)
        return a + b

    # The integrand of v decays exponentially; the mapped tail is harmless.
    return integrate_semi_infinite(g, cfg, scale=8.0)


def minimize_1d(g: Callable[[float], float], lo: float, hi: float,
                cfg: SearchConfig = SearchConfig()):
    """Golden-section minimization of ``g`` on [lo, hi].

    A 64-point scan picks the bracket first, which guards against mild
    non-unimodality. Returns ``(argmin, min)``.
    """
    if not lo < hi:
        raise ValueError("need lo < hi")
    where = "numerics.minimize_1d"

    def ev(x):
        y = float(g(x))
        if not math.isfinite(y):
            raise SearchError(f"non-finite objective at {x!r}", where)
        return y

    xs = np.linspace(lo, hi, 64)
    ys = [ev(x) for x in xs]
    i = int(np.argmin(ys))
    a = xs[max(i - 1, 0)]
    b = xs[min(i + 1, len(xs) - 1)]
    best_x, best_y = float(xs[i]), ys[i]

    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = ev(c), ev(d)
    target = cfg.tol * (hi - lo)
    it = 0
    while b - a > target and it < cfg.max_iters:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = ev(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = ev(d)
        it += 1
    x = 0.5 * (a + b)
    y = ev(x)
    for cand_x, cand_y in ((c, fc), (d, fd), (best_x, best_y)):
        if cand_y < y:
            x, y = float(cand_x), cand_y
    return float(x), float(y)


def minimize_nelder_mead(g: Callable, x0: Sequence[float],
                         cfg: SearchConfig = SearchConfig(), step: float = 0.5,
                         restarts: int = 3):
    """Nelder-Mead minimization from ``x0``.

    Converges when the simplex diameter falls below ``cfg.tol``. After a
    converged run the search restarts from the best vertex with a smaller,
    seeded random simplex, up to ``restarts`` times, which catches premature
    collapse. Returns ``(argmin, min)``.
    """
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.ndim != 1 or x0.size < 1:
        raise ValueError("x0 must be a non-empty vector")
    where = "numerics.minimize_nelder_mead"
    f0 = float(g(x0))
    if not math.isfinite(f0):
        raise SearchError("non-finite objective at x0", where)

    def safe(x):
        y = float(g(x))
        return y if not math.isnan(y) else math.inf

    rng = np.random.default_rng(cfg.seed)
    k = x0.size
    best_x, best_f = x0, f0
    budget = cfg.max_iters
    h = step
    simplex = np.vstack([x0, x0 + h * np.eye(k)])
    for attempt in range(restarts + 1):
        res = minimize(safe, best_x, method="Nelder-Mead",
                       options=dict(xatol=cfg.tol, fatol=np.inf, maxiter=budget,
                                    initial_simplex=simplex))
        budget -= int(res.nit)
        improved = res.fun < best_f - 1e-15 * abs(best_f)
        if res.fun <= best_f:
            best_x, best_f = np.asarray(res.x, dtype=float), float(res.fun)
        if budget <= 0 or (attempt > 0 and not improved):
            break
        h = max(0.1 * h, 100 * cfg.tol)
        q, _ = np.linalg.qr(rng.standard_normal((k, k)))
        simplex = np.vstack([best_x, best_x + h * q.T])
    return best_x, best_f


def fit_loglog_slope(points) -> SlopeFit:
    """Least-squares line through ``(log x, log y)``."""
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3 or pts.shape[1] != 2:
        raise NumericalError("need at least 3 (x, y) points", "numerics.fit_loglog_slope")
    if np.any(pts <= 0) or not np.all(np.isfinite(pts)):
        raise NumericalError("coordinates must be positive and finite",
                             "numerics.fit_loglog_slope")
    lx, ly = np.log(pts[:, 0]), np.log(pts[:, 1])
    A = np.column_stack([lx, np.ones_like(lx)])
    (slope, intercept), *_ = np.linalg.lstsq(A, ly, rcond=None)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    if ss_res <= 1e-24 * max(1.0, float(np.dot(ly, ly))):
        r2 = 1.0  # exact fit, including the flat case where ss_tot is pure rounding
    else:
        r2 = min(1.0, max(0.0, 1.0 - ss_res / ss_tot))
    return SlopeFit(float(slope), float(intercept), r2)


def monte_carlo_volume(indicator: Callable[[np.ndarray], np.ndarray], bounding_box,
                       n_samples: int, seed: int, batch: int = 1 << 18):
    """Hit-or-miss volume of ``{x : indicator(x)}`` inside ``bounding_box``.

    ``bounding_box`` is ``(lower_corner, upper_corner)``. Samples come from a
    Philox counter-based generator keyed by ``seed``; no global RNG state is
    touched. Returns ``(estimate, std_err)``.
    """
    where = "numerics.monte_carlo_volume"
    lo = np.asarray(bounding_box[0], dtype=float)
    hi = np.asarray(bounding_box[1], dtype=float)
    if lo.shape != hi.shape or lo.ndim != 1 or np.any(hi <= lo):
        raise ValueError("degenerate bounding box")
    if n_samples < 1000:
        raise ValueError("need at least 1000 samples")
    rng = np.random.Generator(np.random.Philox(seed))
    width = hi - lo
    hits = 0
    left = n_samples
    while left > 0:
        m = min(batch, left)
        x = lo + width * rng.random((m, lo.size))
        hits += int(np.count_nonzero(indicator(x)))
        left -= m
    vol_box = float(np.prod(width))
    frac = hits / n_samples
    return vol_box * frac, vol_box * math.sqrt(frac * (1.0 - frac) / n_samples)
