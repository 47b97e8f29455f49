"""Finite-volume solver and diagnostics for a Keller-Segel-Navier-Stokes system
with tensor-valued chemotactic sensitivity on rectangles."""

from .errors import (
    DomainError,
    FitError,
    InvalidConfig,
    InvalidInitialData,
    KSNSError,
    RunAborted,
    SingularSignal,
    SolverStall,
    TimeStepError,
    UnderResolvedCutoff,
)
from .fields import SimConfig, State, initialize, load_config, validate
from .mesh import Grid, MacVelocity
from .sensitivity import SensitivitySpec

__version__ = "0.1.0"

__all__ = [
    "DomainError",
    "FitError",
    "Grid",
    "InvalidConfig",
    "InvalidInitialData",
    "KSNSError",
    "MacVelocity",
    "RunAborted",
    "SensitivitySpec",
    "SimConfig",
    "SingularSignal",
    "SolverStall",
    "State",
    "TimeStepError",
    "UnderResolvedCutoff",
    "initialize",
    "load_config",
    "validate",
]
