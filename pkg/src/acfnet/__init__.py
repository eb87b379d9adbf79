"""Dissipative preparation of two-atom entangled states in coupled cavity/fiber networks."""

from .errors import (
    AcfError,
    ConfigError,
    InvalidArgument,
    InvalidState,
    NonUniqueSteadyState,
    NumericalFailure,
    UnsupportedConfiguration,
)
from .hilbert import SpaceSpec, build_space
from .model import SystemParams, hamiltonian, lindblad_ops
from .effective import effective_model, named_state, min_gap
from .dynamics import evolve, liouvillian, steady_state, system_liouvillian

__version__ = "0.1.0"

__all__ = [
    "AcfError", "ConfigError", "InvalidArgument", "InvalidState", "NonUniqueSteadyState",
    "NumericalFailure", "UnsupportedConfiguration", "SpaceSpec", "build_space", "SystemParams",
    "hamiltonian", "lindblad_ops", "effective_model", "named_state", "min_gap", "evolve",
    "liouvillian", "steady_state", "system_liouvillian",
]
