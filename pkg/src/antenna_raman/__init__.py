"""Simulator and analytic toolkit for atomic-antenna-enhanced Raman scattering."""

__version__ = "0.1.0"

from .errors import ConfigError, ModelValidityError, NumericalError, ToolkitError
from .hilbert import HilbertConfig, OperatorSet, build_operators, expectation
from .lindblad import CollapseChannel, assemble_liouvillian, steady_state
from .correlators import spectrum_exact, two_time_correlator
from .models import DerivedParams, derived_parameters
from .scenario import Scenario, load_scenario, parse_scenario, serialize_scenario

__all__ = [
    "__version__",
    "ConfigError",
    "ModelValidityError",
    "NumericalError",
    "ToolkitError",
    "HilbertConfig",
    "OperatorSet",
    "build_operators",
    "expectation",
    "CollapseChannel",
    "assemble_liouvillian",
    "steady_state",
    "spectrum_exact",
    "two_time_correlator",
    "DerivedParams",
    "derived_parameters",
    "Scenario",
    "load_scenario",
    "parse_scenario",
    "serialize_scenario",
]
