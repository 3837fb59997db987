"""Witnessed entanglement of multipartite states via optimized witnesses."""

from .errors import (
    DimensionError,
    NotHermitianError,
    NumericalBreakdownError,
    OversizedProblemError,
    ValidationError,
)
from .partitions import PartitionScheme, ProductVector, enumerate_partitions
from .states import DensityOperator, validate
from .solver import WitnessProblem, WitnessResult, e_w, solve
from .witness import Witness, e_dw, negativity
from .measures import MeasureReport, full_report, pure_state_e_w, random_robustness

__version__ = "0.1.0"
