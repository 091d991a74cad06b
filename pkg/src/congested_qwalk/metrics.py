"""Position distributions, spread (variance) and escape probability."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, ValidationError
from .lattice import Extent

PROB_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Distribution:
    """Probability over positions, ``P(x)`` or ``P(x, y)``, at step ``time``."""

    dim: int
    t_max: int
    extent: Extent
    probs: np.ndarray
    time: int = 0

    def axes(self) -> list[np.ndarray]:
        return [np.arange(lo, hi + 1) for lo, hi in self.extent]

    def total(self) -> float:
        return float(self.probs.sum())

    def validate(self, tol: float = PROB_TOL) -> None:
        if np.any(self.probs < -tol) or abs(self.total() - 1.0) > tol:
            raise ValidationError("distribution must be nonnegative and sum to 1")

    def marginal(self, axis: int) -> np.ndarray:
        other = tuple(i for i in range(self.dim) if i != axis)
        return self.probs.sum(axis=other) if other else self.probs

    def at(self, pos) -> float:
        idx = tuple(int(x) - lo for x, (lo, _) in zip(pos, self.extent))
        if any(i < 0 or i >= n for i, n in zip(idx, self.probs.shape)):
            return 0.0
        return float(self.probs[idx])

    def argmax(self) -> tuple[int, ...]:
        idx = np.unravel_index(int(np.argmax(self.probs)), self.probs.shape)
        return tuple(int(i) + lo for i, (lo, _) in zip(idx, self.extent))


@dataclass(frozen=True)
class Boundary:
    """Escape line at ``x = -t_max + t_b``; escaped mass lies strictly to its right."""

    t_b: int

    def __post_init__(self):
        if self.t_b < 0:
            raise ConfigError(f"t_b must be >= 0 (got {self.t_b})")

    def line(self, t_max: int) -> int:
        if self.t_b > 2 * t_max:
            raise ConfigError(f"boundary t_b={self.t_b} lies outside the lattice (t_max={t_max})")
        return -t_max + self.t_b


@dataclass
class MetricSeries:
    times: np.ndarray
    variance: np.ndarray
    p_esc: np.ndarray
    stderr_var: np.ndarray
    stderr_pesc: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.times)
        for name in ("variance", "p_esc", "stderr_var", "stderr_pesc"):
            if len(getattr(self, name)) != n:
                raise ValidationError(f"{name} has {len(getattr(self, name))} entries, expected {n}")

    def rows(self):
        for row in zip(self.times, self.variance, self.p_esc, self.stderr_var, self.stderr_pesc):
            yield int(row[0]), *(float(v) for v in row[1:])


def probabilities(amps: np.ndarray, dim: int) -> np.ndarray:
    """Sum squared amplitudes over the trailing ``dim`` coin axes."""
    return np.sum(amps**2, axis=tuple(range(amps.ndim - dim, amps.ndim)))


def distribution(state) -> Distribution:
    probs = probabilities(state.amplitudes, state.dim)
    return Distribution(state.dim, state.t_max, state.extent, probs, state.time)


def axis_moments(probs: np.ndarray, extent: Extent, center=None):
    """Per-axis mean and second moment about ``center`` for batched distributions.

    ``probs`` has shape ``(..., n_0[, n_1])``. Returns ``(means, second)`` where
    both are lists (one entry per axis) of arrays over the leading batch shape.
    When ``center`` is None each distribution is centered on its own mean.
    """
    dim = len(extent)
    means, second = [], []
    for i, (lo, hi) in enumerate(extent):
        other = tuple(probs.ndim - dim + j for j in range(dim) if j != i)
        marg = probs.sum(axis=other) if other else probs
        coords = np.arange(lo, hi + 1, dtype=float)
        mu = marg @ coords
        c = mu if center is None else center[i]
        second.append(marg @ coords**2 - 2.0 * c * mu + c * c * marg.sum(axis=-1))
        means.append(mu)
    return means, second


def variance(dist: Distribution) -> float:
    """Spread of a distribution: the 1D variance, or ``Var(x) + Var(y)`` in 2D."""
    total = 0.0
    for i, coords in enumerate(dist.axes()):
        marg = dist.marginal(i)
        mu = float(marg @ coords)
        total += float(marg @ (coords - mu) ** 2)
    return total


def escape_mask(extent: Extent, line: int) -> np.ndarray:
    lo, hi = extent[0]
    return np.arange(lo, hi + 1) > line


def escape_probability(dist: Distribution, boundary: Boundary) -> float:
    """Mass with ``x > -t_max + t_b`` (summed over ``y`` in 2D)."""
    line = boundary.line(dist.t_max)
    return float(dist.marginal(0)[escape_mask(dist.extent, line)].sum())
