"""Weak values and weak potentials for pre- and post-selected harmonic oscillators."""

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DegenerateSweep,
    DimensionGuard,
    DimensionMismatch,
    IndexOutOfRange,
    NumericalGuard,
    OrthogonalSelection,
    StepTooLarge,
    TailTooHeavy,
    WeakPotError,
    ZeroState,
)
from .hilbert import FockSpace
from .weakvalue import PrePostPair, weak_trajectory, weak_value, weak_value_at_time
from .weakpotential import (
    PiecewiseConstantProfile,
    SeparableInteraction,
    conditional_evolve_first_order,
    conditional_evolve_second_order,
    weak_potential_first_order,
)
from .oracle import TwoBodySystem, conditional_state, evolve_exact, evolve_trotter
from .scenarios import ScenarioConfig, run_scenario, run_sweep, sweep_and_fit
