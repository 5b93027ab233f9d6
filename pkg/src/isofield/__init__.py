"""Isotropic random fields on the sphere and torus: simulation, rotation and tests."""
__version__ = "0.1.0"

from .config import ExperimentConfig
from .errors import ConsistencyError, DomainError, StructuralError
from .field_model import AngularPowerSpectrum, CoefficientLaw, HarmonicCoefficients, TorusCoefficients
from .repr_core import EulerRotation, check_assumption, search_witness
from .rotation import rotate_coeffs, rotate_point, rotate_torus_coeffs
from .sphere_grid import analyze, build_grid, synthesize
from .stat_tests import TestReport, energy_two_sample, independence_test, jarque_bera

__all__ = [
    "AngularPowerSpectrum", "CoefficientLaw", "ConsistencyError", "DomainError", "EulerRotation",
    "ExperimentConfig", "HarmonicCoefficients", "StructuralError", "TestReport", "TorusCoefficients",
    "analyze", "build_grid", "check_assumption", "energy_two_sample", "independence_test",
    "jarque_bera", "rotate_coeffs", "rotate_point", "rotate_torus_coeffs", "search_witness",
    "synthesize",
]
