"""Coined quantum and classical walks on congested lattices with dephasing."""

from .config import ExperimentConfig, edge_start
from .dephasing import DephasingSpec, FlipMask, apply_mask, measurement_equivalent_rate, sample_mask
from .errors import CapacityError, ConfigError, EdgeError, PreconditionError, QWalkError, ValidationError
from .lattice import CoinKind, CoinLattice, defect_reversal_check, generate, lattice_extent, open_lattice
from .metrics import Boundary, Distribution, MetricSeries, distribution, escape_probability, variance
from .montecarlo import EnsembleResult, run, sweep
from .walk import InitialState, WalkState, apply_coin, apply_step, evolve, evolve_step

__version__ = "0.1.0"
