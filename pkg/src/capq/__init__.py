"""Bounds for p-capacity, q-torsion and the shape functional built from them.

Submodules: ``numerics`` (quadrature, searches, fits), ``geometry`` (bodies
and Steiner polynomials), ``capacity``, ``torsion``, ``functional``,
``experiments`` and ``cli``.
"""
from .capacity import CapParams, cap_ball_exact, cap_report
from .errors import (
    CapqError,
    HypothesisError,
    NumericalError,
    ParameterError,
    QuadratureError,
    UsageError,
)
from .functional import GParams, g_ball_exact, g_interval, make_params
from .geometry import ConvexBody, ball, cuboid, ellipsoid, metrics_of, steiner_of
from .torsion import TorsionParams, torsion_ball_exact

__version__ = "0.1.0"

__all__ = [
    "CapParams", "cap_ball_exact", "cap_report",
    "CapqError", "HypothesisError", "NumericalError", "ParameterError", "QuadratureError",
    "UsageError",
    "GParams", "g_ball_exact", "g_interval", "make_params",
    "ConvexBody", "ball", "cuboid", "ellipsoid", "metrics_of", "steiner_of",
    "TorsionParams", "torsion_ball_exact",
]
