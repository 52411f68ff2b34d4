"""Gluing finite Lorentzian pre-length spaces along identified subsets."""

from .amalgamation import (
    GluedSpace,
    IdentificationMap,
    PreconditionError,
    glue,
    quotient_tau_simplified,
    validate_identification,
)
from .harness import SUITES, run_suite
from .ladder import CheckParams, LadderReport, ladder_report
from .minkowski import RegionSpec, SampleParams, fixture, fixture_names, parse_region, sample_region
from .space import FiniteCausalSpace, StructuralError, minkowski_space, validate_space

__all__ = [
    "CheckParams",
    "FiniteCausalSpace",
    "GluedSpace",
    "IdentificationMap",
    "LadderReport",
    "PreconditionError",
    "RegionSpec",
    "SUITES",
    "SampleParams",
    "StructuralError",
    "fixture",
    "fixture_names",
    "glue",
    "ladder_report",
    "minkowski_space",
    "parse_region",
    "quotient_tau_simplified",
    "run_suite",
    "sample_region",
    "validate_identification",
    "validate_space",
]
