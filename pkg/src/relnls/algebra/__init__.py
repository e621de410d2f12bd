"""Exact algebra: Gaussian rationals, sparse polynomials, jets, dispersions."""

from .diffpoly import (
    DiffPoly,
    NotExactDerivative,
    conjugate,
    dx_power,
    formal_integrate,
    is_local,
    jet,
    nonlocal_marker,
    total_x_derivative,
)
from .dispersion import DispersionSeries, apply_series, dispersion_make
from .gaussian import I, ONE, ZERO, GaussianRational
from .poly import ONE_POLY, ZERO_POLY, MultiPoly, ParseError, const, parse, sym

__all__ = [
    "DiffPoly",
    "DispersionSeries",
    "GaussianRational",
    "I",
    "MultiPoly",
    "NotExactDerivative",
    "ONE",
    "ONE_POLY",
    "ParseError",
    "ZERO",
    "ZERO_POLY",
    "apply_series",
    "conjugate",
    "const",
    "dispersion_make",
    "dx_power",
    "formal_integrate",
    "is_local",
    "jet",
    "nonlocal_marker",
    "parse",
    "sym",
    "total_x_derivative",
]
