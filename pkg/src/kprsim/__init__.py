"""Kolkata Paise Restaurant simulator with limited-information revision protocols."""

from .config import SimConfig, VariantId
from .core import (
    CustomerState,
    PeriodOutcome,
    ProbabilityVector,
    sample_choice,
    stabilize,
    uniform_vector,
    zero_and_redistribute,
)
from .engine import WorldState, apply_variant1, apply_variant2, resolve_period, run_simulation
from .kernels import BACKEND
from .metrics import MetricsSeries, SweepGrid, aggregate_runs, final_utilization, stability_fraction, utilization_fraction
from .protocols import ProtocolConfig, ProtocolKind
from .rng import RngStream

__version__ = "0.1.0"
