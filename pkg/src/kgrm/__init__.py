"""Relativistic-mass wave equation lab: a 1-D periodic solver with Noether-current,
polar-form and dispersion diagnostics.
"""
from .errors import (ConfigError, DivergenceError, DomainError, IntegrityError, KGError,
                     MisuseError, SingularDenominatorError)
from .quantities import INFINITE, MassMode, PhysicalConfig, quasi_static_config
from .fields import Grid, PolarView, polar_decompose
from .massmodel import MassField
from .dynamics import EvolutionState, StepperSpec, evolve_kg, initial_state, step_kg
from .scenario import Scenario, load_scenario

__version__ = "0.1.0"
