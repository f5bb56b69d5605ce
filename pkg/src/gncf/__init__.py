"""Closed-form multi-span nonlinear-interference estimation.

The engine evaluates the analytic formula (integration islands,
island-averaged span coefficients, exponential-kernel integrals); the
oracle integrates the underlying double integral numerically so every
approximation can be checked end to end.
"""

from .engine import NliReport, gnli_at, gnli_per_channel, lk_sq_closed
from .islands import Island, island_geometry, island_polygon_oracle
from .link import FreqProfile, Link, Span, ZERO_PROFILE
from .oracle import (QuadratureSpec, gnli_numeric, island_integral_numeric,
                     lk_numeric)
from .spectrum import Channel, Spectrum, uniform_comb

__all__ = [
    "Channel", "FreqProfile", "Island", "Link", "NliReport",
    "QuadratureSpec", "Span", "Spectrum", "ZERO_PROFILE", "gnli_at",
    "gnli_numeric", "gnli_per_channel", "island_geometry",
    "island_integral_numeric", "island_polygon_oracle", "lk_numeric",
    "lk_sq_closed", "uniform_comb",
]

__version__ = "0.1.0"
