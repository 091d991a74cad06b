"""Experiment configuration shared by the ensemble runner, oracles and CLI."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Optional

from .errors import ConfigError
from .lattice import Extent, lattice_extent
from .metrics import Boundary
from .walk import InitialState

LATTICE_MODES = ("resample_per_trial", "fixed_per_batch")
DEFAULT_TRIALS = 1000


@dataclass(frozen=True)
class ExperimentConfig:
    dim: int
    t_max: int
    steps: int
    x0: tuple[int, ...]
    c0: tuple[int, ...]
    p: float = 1.0
    p_d: float = 0.0
    t_b: Optional[int] = None
    trials: int = DEFAULT_TRIALS
    lattice_mode: str = "resample_per_trial"
    master_seed: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "x0", tuple(int(v) for v in self.x0))
        object.__setattr__(self, "c0", tuple(int(v) for v in self.c0))
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2 (got {self.dim})")
        if len(self.x0) != self.dim or len(self.c0) != self.dim:
            raise ConfigError(f"x0 and c0 need {self.dim} entries (got {self.x0}, {self.c0})")
        if self.t_max < 1:
            raise ConfigError(f"t_max must be >= 1 (got {self.t_max})")
        if self.steps < 1:
            raise ConfigError(f"steps must be >= 1 (got {self.steps})")
        if self.steps > self.t_max:
            raise ConfigError(f"steps ({self.steps}) exceeds t_max ({self.t_max})")
        if any(abs(x) > self.t_max for x in self.x0):
            raise ConfigError(f"start {self.x0} outside [-{self.t_max}, {self.t_max}]")
        if self.trials < 1:
            raise ConfigError(f"trials must be >= 1 (got {self.trials})")
        for name in ("p", "p_d"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1] (got {v})")
        if self.lattice_mode not in LATTICE_MODES:
            raise ConfigError(f"lattice_mode must be one of {LATTICE_MODES}")
        if self.t_b is not None:
            Boundary(self.t_b).line(self.t_max)
        self.initial_state()

    def initial_state(self) -> InitialState:
        return InitialState(self.x0, self.c0)

    def extent(self) -> Extent:
        return lattice_extent(self.t_max, self.x0, self.steps)

    def boundary(self) -> Boundary | None:
        return None if self.t_b is None else Boundary(self.t_b)

    def replace(self, **changes) -> "ExperimentConfig":
        return dataclasses.replace(self, **changes)

    def to_json(self) -> dict:
        d = dataclasses.asdict(self)
        d["x0"] = list(self.x0)
        d["c0"] = list(self.c0)
        return d

    @classmethod
    def from_json(cls, obj: dict) -> "ExperimentConfig":
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(obj) - fields
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None


def edge_start(dim: int, t_max: int) -> tuple[int, ...]:
    """Left-edge launch site used by the escape experiments."""
    return (-t_max,) + (0,) * (dim - 1)
