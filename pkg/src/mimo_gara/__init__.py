"""Hybrid precoding and genetic-algorithm power allocation for MU-MIMO-OFDM downlinks."""

from .errors import DegenerateChromosomeError, InvalidConfigError, InvalidInputError, SimulationError
from .harness import AggregateReport, Architecture, ExperimentSpec, SweepAxis, emit_report, run_experiment
from .metrics import Method
from .optimizer import GaConfig, PsoConfig
from .scenario import ArrayGeometry, GroupSpec, ScenarioConfig

__version__ = "0.1.0"

__all__ = [
    "AggregateReport",
    "Architecture",
    "ArrayGeometry",
    "DegenerateChromosomeError",
    "ExperimentSpec",
    "GaConfig",
    "GroupSpec",
    "InvalidConfigError",
    "InvalidInputError",
    "Method",
    "PsoConfig",
    "ScenarioConfig",
    "SimulationError",
    "SweepAxis",
    "emit_report",
    "run_experiment",
]
