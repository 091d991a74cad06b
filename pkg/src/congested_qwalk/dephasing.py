"""Trajectory-level dephasing by random sign flips.

After every step each basis element ``|x, c>`` independently acquires a pi
phase (its amplitude is negated) with probability ``p_d``. Averaged over
trajectories this damps every off-diagonal density-matrix element by
``(1 - 2 p_d)**2`` per step.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError


@dataclass(frozen=True)
class DephasingSpec:
    p_d: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.p_d <= 1.0:
            raise ConfigError(f"p_d must lie in [0, 1] (got {self.p_d})")


@dataclass(frozen=True, eq=False)
class FlipMask:
    """Boolean flag per basis element; True means the sign is flipped.

    Equivalent to the diagonal unitary with ``-1`` where ``flips`` is set.
    """

    flips: np.ndarray

    @property
    def m(self) -> int:
        return self.flips.size

    @property
    def s(self) -> int:
        return int(np.count_nonzero(self.flips))

    def signs(self) -> np.ndarray:
        return 1.0 - 2.0 * self.flips


def sample_mask(m: int, p_d: float, rng: np.random.Generator | None) -> FlipMask:
    """Draw a mask with each entry set independently with probability ``p_d``.

    For ``p_d`` of exactly 0 or 1 the mask is deterministic and ``rng`` is not
    touched; otherwise exactly ``m`` uniforms are consumed.
    """
    if m < 1:
        raise ConfigError(f"basis size must be >= 1 (got {m})")
    if not 0.0 <= p_d <= 1.0:
        raise ConfigError(f"p_d must lie in [0, 1] (got {p_d})")
    if p_d == 0.0:
        return FlipMask(np.zeros(m, dtype=bool))
    if p_d == 1.0:
        return FlipMask(np.ones(m, dtype=bool))
    if rng is None:
        raise ConfigError("a random generator is required when 0 < p_d < 1")
    return FlipMask(rng.random(m) < p_d)


def apply_mask(state, mask: FlipMask):
    """Negate the amplitudes selected by ``mask``; works on any WalkState."""
    if mask.m != state.amplitudes.size:
        raise ConfigError(f"mask size {mask.m} != basis size {state.amplitudes.size}")
    if mask.s == 0:
        return state
    amps = state.amplitudes * mask.signs().reshape(state.amplitudes.shape)
    return dataclasses.replace(state, amplitudes=amps)


def measurement_equivalent_rate(p_d: float) -> float:
    """Probability of a projective measurement with the same damping: ``4 p_d (1 - p_d)``."""
    if not 0.0 <= p_d <= 1.0:
        raise ConfigError(f"p_d must lie in [0, 1] (got {p_d})")
    return 4.0 * (1.0 - p_d) * p_d
