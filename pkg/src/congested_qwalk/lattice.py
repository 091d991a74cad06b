"""Congested lattices: a per-site map of coin kinds with static random defects.

Open sites carry the Hadamard coin (``H`` in 1D, ``H (x) H`` in 2D). Defect
sites carry the bit-flip coin (``X`` / ``X (x) X``), which reverses the walker
on the step after it enters the site.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, PreconditionError

Extent = tuple[tuple[int, int], ...]


class CoinKind(enum.Enum):
    HADAMARD = "H"
    BITFLIP = "X"


def lattice_extent(t_max: int, x0: Sequence[int], steps: int) -> Extent:
    """Per-axis inclusive index range needed so that no amplitude reaches an edge.

    The nominal lattice is ``[-t_max, t_max]`` on every axis. An axis is widened
    when the walker starts close enough to a boundary that ``steps`` moves could
    carry it past that boundary.
    """
    if t_max < 0 or steps < 0:
        raise ConfigError(f"t_max and steps must be >= 0 (got {t_max}, {steps})")
    return tuple(
        (min(-t_max, int(x) - steps), max(t_max, int(x) + steps)) for x in x0
    )


@dataclass(frozen=True, eq=False)
class CoinLattice:
    """Immutable per-site coin assignment.

    Attributes
    ----------
    dim : int
        1 or 2.
    t_max : int
        Nominal lattice half-width.
    extent : tuple of (lo, hi)
        Inclusive coordinate range per axis actually allocated.
    defects : ndarray of bool
        ``defects[i, j]`` is True where the site at array index ``(i, j)`` holds
        a bit-flip coin. Coordinates map to indices by subtracting ``lo``.
    p : float
        Probability that a generated site is open.
    seed : int or None
        Seed recorded for reproducibility, if the lattice came from one.
    """

    dim: int
    t_max: int
    extent: Extent
    defects: np.ndarray
    p: float = 1.0
    seed: int | None = None

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ConfigError(f"dim must be 1 or 2 (got {self.dim})")
        if len(self.extent) != self.dim:
            raise ConfigError("extent must have one (lo, hi) pair per axis")
        shape = tuple(hi - lo + 1 for lo, hi in self.extent)
        defects = np.array(self.defects, dtype=bool)
        if defects.shape != shape:
            raise ConfigError(f"defect array shape {defects.shape} != extent shape {shape}")
        defects.setflags(write=False)
        object.__setattr__(self, "defects", defects)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.defects.shape

    @property
    def n_sites(self) -> int:
        return self.defects.size

    def contains(self, pos: Sequence[int]) -> bool:
        return len(pos) == self.dim and all(
            lo <= x <= hi for x, (lo, hi) in zip(pos, self.extent)
        )

    def index(self, pos: Sequence[int]) -> tuple[int, ...]:
        if not self.contains(pos):
            raise ConfigError(f"position {tuple(pos)} outside lattice extent {self.extent}")
        return tuple(int(x) - lo for x, (lo, _) in zip(pos, self.extent))

    def kind_at(self, pos: Sequence[int]) -> CoinKind:
        return CoinKind.BITFLIP if self.defects[self.index(pos)] else CoinKind.HADAMARD

    def kinds(self) -> np.ndarray:
        """Object array of :class:`CoinKind`, one per site."""
        out = np.empty(self.shape, dtype=object)
        out[...] = CoinKind.HADAMARD
        out[self.defects] = CoinKind.BITFLIP
        return out

    def defect_fraction(self) -> float:
        return float(self.defects.mean())

    def to_json(self) -> dict:
        flat = self.defects.ravel()
        runs = []
        for is_defect, group in itertools.groupby(flat):
            kind = CoinKind.BITFLIP if is_defect else CoinKind.HADAMARD
            runs.append([kind.value, sum(1 for _ in group)])
        return {
            "dim": self.dim,
            "t_max": self.t_max,
            "extent": [list(e) for e in self.extent],
            "p": self.p,
            "seed": self.seed,
            "kinds": runs,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CoinLattice":
        extent = tuple((int(lo), int(hi)) for lo, hi in obj["extent"])
        flat = []
        for kind, count in obj["kinds"]:
            flat.extend([CoinKind(kind) is CoinKind.BITFLIP] * int(count))
        shape = tuple(hi - lo + 1 for lo, hi in extent)
        if len(flat) != int(np.prod(shape)):
            raise ConfigError("run-length encoded kinds do not cover the extent")
        return cls(
            dim=int(obj["dim"]),
            t_max=int(obj["t_max"]),
            extent=extent,
            defects=np.array(flat, dtype=bool).reshape(shape),
            p=float(obj["p"]),
            seed=obj.get("seed"),
        )


def open_lattice(dim: int, t_max: int, extent: Extent | None = None) -> CoinLattice:
    """Defect-free lattice (``p = 1``)."""
    if extent is None:
        extent = tuple((-t_max, t_max) for _ in range(dim))
    shape = tuple(hi - lo + 1 for lo, hi in extent)
    return CoinLattice(dim, t_max, extent, np.zeros(shape, dtype=bool), p=1.0)


def sample_defects(shape: tuple[int, ...], p: float, rng: np.random.Generator) -> np.ndarray:
    # One uniform per site in row-major order; the site is a defect when u >= p.
    return rng.random(shape) >= p


def generate(
    extent: Extent,
    p: float,
    protected: Iterable[Sequence[int]],
    rng: np.random.Generator,
    *,
    t_max: int | None = None,
    seed: int | None = None,
) -> CoinLattice:
    """Draw a lattice whose non-protected sites are defects with probability ``1 - p``.

    Parameters
    ----------
    extent : tuple of (lo, hi)
        Inclusive coordinate range per axis.
    p : float
        Probability that a site is open, in [0, 1].
    protected : iterable of positions
        Sites forced open (the walker's start site, typically).
    rng : numpy.random.Generator
        Consumed with exactly one ``random()`` draw per site, row-major.
    t_max : int, optional
        Nominal half-width; defaults to the largest ``|coordinate|`` in extent.
    seed : int, optional
        Stored on the lattice for serialization only.
    """
    if not 0.0 <= p <= 1.0:
        raise ConfigError(f"p must lie in [0, 1] (got {p})")
    extent = tuple((int(lo), int(hi)) for lo, hi in extent)
    if t_max is None:
        t_max = max(max(-lo, hi) for lo, hi in extent)
    shape = tuple(hi - lo + 1 for lo, hi in extent)
    defects = sample_defects(shape, p, rng)
    lat = CoinLattice(len(extent), t_max, extent, np.zeros(shape, dtype=bool), p=p, seed=seed)
    for pos in protected:
        defects[lat.index(pos)] = False
    return CoinLattice(len(extent), t_max, extent, defects, p=p, seed=seed)


def defect_reversal_check(lattice: CoinLattice, x: Sequence[int], c: Sequence[int]) -> tuple[int, ...]:
    """Position reached one step after a walker sits on defect ``x`` with coin ``c``.

    A bit-flip site sends a definite-coin walker straight back, so the result
    is always ``x - c`` per axis.
    """
    from . import walk

    if lattice.kind_at(x) is not CoinKind.BITFLIP:
        raise PreconditionError(f"site {tuple(x)} is not a defect")
    state = walk.basis_state(lattice, x, c)
    state = walk.apply_step(walk.apply_coin(state, lattice))
    probs = state.amplitudes**2
    axes = tuple(range(lattice.dim, 2 * lattice.dim))
    site = np.unravel_index(int(np.argmax(probs.sum(axis=axes))), lattice.shape)
    return tuple(int(i) + lo for i, (lo, _) in zip(site, lattice.extent))
