"""Weighted convolution algebras on the half-line, realized on a uniform grid."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    ConvalgError,
    DomainError,
    GridMismatchError,
    ParameterError,
    RangeError,
    ResolutionError,
)
from .family import WeightFamily, builtin_families, family_from_dict
from .grid import Grid, GridFunction, convolve, laplace, weighted_norm
from .measures import Measure, convolve_measures, dirac, measure_norm
from .operators import DerivationOp, DilationEndo
from .report import BoundEstimate, CheckReport, Verdict
from .weights import (
    BinaryPow,
    Exponential,
    ExpSqrt,
    FractionalPower,
    Power,
    Weight,
    builtin_weights,
    weight_from_dict,
)

__all__ = [
    "BinaryPow",
    "BoundEstimate",
    "CheckReport",
    "ConfigError",
    "ConvalgError",
    "DerivationOp",
    "DilationEndo",
    "DomainError",
    "Exponential",
    "ExpSqrt",
    "FractionalPower",
    "Grid",
    "GridFunction",
    "GridMismatchError",
    "Measure",
    "ParameterError",
    "Power",
    "RangeError",
    "ResolutionError",
    "Verdict",
    "Weight",
    "WeightFamily",
    "builtin_families",
    "builtin_weights",
    "convolve",
    "convolve_measures",
    "dirac",
    "family_from_dict",
    "laplace",
    "measure_norm",
    "weight_from_dict",
    "weighted_norm",
]
