"""Eigenpath traversal: path-length bounds and the randomization method with its cost baselines."""

from eigenpath.errors import (ConfigError, DegenerateGroundState, EigenpathError, NegativeIntegrandWarning,
                              NotFrustrationFree, NotPSD, PathDomainError)
from eigenpath.ham_path import (FrustrationFreePath, FunctionPath, HamiltonianPath, LinearPath, TabulatedPath,
                                path_from_json, path_to_json)
from eigenpath.spectral import path_length, path_length_bound_improved, path_length_report
from eigenpath.rm_engine import DistributionPolicy, build_schedule, run_rm

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DegenerateGroundState", "EigenpathError", "NegativeIntegrandWarning",
    "NotFrustrationFree", "NotPSD", "PathDomainError",
    "FrustrationFreePath", "FunctionPath", "HamiltonianPath", "LinearPath", "TabulatedPath",
    "path_from_json", "path_to_json",
    "path_length", "path_length_bound_improved", "path_length_report",
    "DistributionPolicy", "build_schedule", "run_rm",
]
