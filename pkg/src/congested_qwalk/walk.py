"""Pure-state discrete-time coined walk on 1D/2D lattices.

Amplitudes are real and stored densely. A 1D state has shape ``(nx, 2)`` and a
2D state ``(nx, ny, 2, 2)``; coin index 0 is the coin value +1 and index 1 is
-1. Flattening this array row-major gives the basis order used everywhere else
(flip masks, density matrices).

The array kernels (``coin_kernel``, ``shift_kernel``) accept arbitrary leading
batch axes so the Monte Carlo engine can push many trajectories at once.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dephasing import DephasingSpec, apply_mask, sample_mask
from .errors import ConfigError, EdgeError
from .lattice import CoinLattice, Extent

INV_SQRT2 = 1.0 / np.sqrt(2.0)
NORM_TOL = 1e-9


def coin_index(c: int) -> int:
    if c == 1:
        return 0
    if c == -1:
        return 1
    raise ConfigError(f"coin value must be +1 or -1 (got {c!r})")


def coin_value(index: int) -> int:
    return 1 - 2 * int(index)


@dataclass(frozen=True)
class InitialState:
    """Start site ``x0`` and definite coin ``c0`` (one value per axis)."""

    x0: tuple[int, ...]
    c0: tuple[int, ...]

    def __post_init__(self):
        x0 = tuple(int(v) for v in self.x0)
        c0 = tuple(int(v) for v in self.c0)
        if len(x0) not in (1, 2) or len(c0) != len(x0):
            raise ConfigError(f"need one coordinate and one coin per axis (got {x0}, {c0})")
        for c in c0:
            coin_index(c)
        object.__setattr__(self, "x0", x0)
        object.__setattr__(self, "c0", c0)

    @property
    def dim(self) -> int:
        return len(self.x0)


@dataclass(frozen=True, eq=False)
class WalkState:
    dim: int
    t_max: int
    extent: Extent
    amplitudes: np.ndarray
    time: int = 0

    @property
    def basis_size(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.sum(self.amplitudes**2))

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def vector(self) -> np.ndarray:
        """Flat amplitude vector in basis order."""
        return self.amplitudes.reshape(-1)

    def position_axes(self) -> list[np.ndarray]:
        return [np.arange(lo, hi + 1) for lo, hi in self.extent]


def state_shape(extent: Extent) -> tuple[int, ...]:
    return tuple(hi - lo + 1 for lo, hi in extent) + (2,) * len(extent)


def basis_state(lattice: CoinLattice, x: Sequence[int], c: Sequence[int], time: int = 0) -> WalkState:
    """The state ``|x, c>`` allocated over the lattice's extent."""
    amps = np.zeros(state_shape(lattice.extent))
    amps[lattice.index(x) + tuple(coin_index(v) for v in c)] = 1.0
    return WalkState(lattice.dim, lattice.t_max, lattice.extent, amps, time)


def prepare(init: InitialState, lattice: CoinLattice) -> WalkState:
    if init.dim != lattice.dim:
        raise ConfigError(f"initial state is {init.dim}D but lattice is {lattice.dim}D")
    return basis_state(lattice, init.x0, init.c0)


def _hadamard_axis(amps: np.ndarray, axis: int) -> np.ndarray:
    a = np.take(amps, 0, axis=axis)
    b = np.take(amps, 1, axis=axis)
    return np.stack([(a + b) * INV_SQRT2, (a - b) * INV_SQRT2], axis=axis)


def coin_kernel(amps: np.ndarray, defects: np.ndarray, dim: int) -> np.ndarray:
    """Apply H (or H (x) H) on open sites and X (or X (x) X) on defects.

    ``defects`` must broadcast against the position axes of ``amps``.
    """
    hadamard = amps
    for axis in range(amps.ndim - dim, amps.ndim):
        hadamard = _hadamard_axis(hadamard, axis)
    flipped = amps[(Ellipsis,) + (slice(None, None, -1),) * dim]
    mask = defects.reshape(defects.shape + (1,) * dim)
    return np.where(mask, flipped, hadamard)


def _index(ndim: int, **fixed) -> tuple:
    idx = [slice(None)] * ndim
    for axis, value in fixed.values():
        idx[axis] = value
    return tuple(idx)


def shift_kernel(amps: np.ndarray, dim: int) -> np.ndarray:
    """Move amplitude at ``(x, c)`` to ``(x + c, c)`` independently on each axis.

    Raises :class:`EdgeError` instead of discarding amplitude that would leave
    the allocated array.
    """
    nd = amps.ndim
    out = amps
    for i in range(dim):
        pa = nd - 2 * dim + i
        ca = nd - dim + i
        src = out
        out = np.zeros_like(src)
        # coin +1 moves toward higher coordinates, coin -1 toward lower
        if np.any(src[_index(nd, p=(pa, -1), c=(ca, 0))]) or np.any(
            src[_index(nd, p=(pa, 0), c=(ca, 1))]
        ):
            raise EdgeError("amplitude would be shifted off the lattice; enlarge the extent")
        out[_index(nd, p=(pa, slice(1, None)), c=(ca, 0))] = src[
            _index(nd, p=(pa, slice(None, -1)), c=(ca, 0))
        ]
        out[_index(nd, p=(pa, slice(None, -1)), c=(ca, 1))] = src[
            _index(nd, p=(pa, slice(1, None)), c=(ca, 1))
        ]
    return out


def _check_lattice(state: WalkState, lattice: CoinLattice) -> None:
    if lattice.dim != state.dim or tuple(lattice.extent) != tuple(state.extent):
        raise ConfigError(
            f"lattice ({lattice.dim}D, {lattice.extent}) does not match state "
            f"({state.dim}D, {state.extent})"
        )


def apply_coin(state: WalkState, lattice: CoinLattice) -> WalkState:
    _check_lattice(state, lattice)
    amps = coin_kernel(state.amplitudes, lattice.defects, state.dim)
    return dataclasses.replace(state, amplitudes=amps)


def apply_step(state: WalkState) -> WalkState:
    """Conditional shift. Does not advance ``time``; see :func:`evolve_step`."""
    return dataclasses.replace(state, amplitudes=shift_kernel(state.amplitudes, state.dim))


def evolve_step(
    state: WalkState,
    lattice: CoinLattice,
    deph: DephasingSpec,
    rng: np.random.Generator | None = None,
) -> WalkState:
    """One full step: coin, shift, then a freshly sampled sign-flip mask."""
    moved = apply_step(apply_coin(state, lattice))
    mask = sample_mask(moved.basis_size, deph.p_d, rng)
    out = apply_mask(moved, mask)
    return dataclasses.replace(out, time=state.time + 1)


def check_fits(init: InitialState, lattice: CoinLattice, steps: int) -> None:
    if steps < 0:
        raise ConfigError(f"steps must be >= 0 (got {steps})")
    if steps > lattice.t_max:
        raise ConfigError(f"steps ({steps}) exceeds t_max ({lattice.t_max})")
    if not all(-lattice.t_max <= x <= lattice.t_max for x in init.x0):
        raise ConfigError(f"start {init.x0} outside [-{lattice.t_max}, {lattice.t_max}]")
    for x, (lo, hi) in zip(init.x0, lattice.extent):
        if x - steps < lo or x + steps > hi:
            raise ConfigError(
                f"{steps} steps from {init.x0} leave the allocated extent {lattice.extent}"
            )


def evolve(
    init: InitialState,
    lattice: CoinLattice,
    deph: DephasingSpec,
    steps: int,
    rng: np.random.Generator | None = None,
) -> list[WalkState]:
    """States after each of ``t = 1..steps`` steps (the t=0 state is not included)."""
    check_fits(init, lattice, steps)
    state = prepare(init, lattice)
    out = []
    for _ in range(steps):
        state = evolve_step(state, lattice, deph, rng)
        out.append(state)
    return out


# Batched coin-major kernels used by the ensemble engine. A batch has shape
# (B, 2**dim, *positions); component k encodes the coins row-major, so in 2D
# k = 2*ix + iy with index 0 meaning +1.


def to_coin_major(amps: np.ndarray, dim: int) -> np.ndarray:
    """``(B, *pos, *coins)`` -> ``(B, 2**dim, *pos)``."""
    B = amps.shape[0]
    pos = amps.shape[1 : 1 + dim]
    return np.moveaxis(amps.reshape((B,) + pos + (2**dim,)), -1, 1)


def from_coin_major(amps: np.ndarray, dim: int) -> np.ndarray:
    """Inverse of :func:`to_coin_major`."""
    B = amps.shape[0]
    pos = amps.shape[2:]
    return np.moveaxis(amps, 1, -1).reshape((B,) + pos + (2,) * dim)


def _check_interior(amps: np.ndarray, dim: int) -> None:
    for axis in range(2, 2 + dim):
        for end in (0, -1):
            if np.any(np.take(amps, end, axis=axis)):
                raise EdgeError("amplitude reached the lattice edge; enlarge the extent")


def batch_step(amps: np.ndarray, defects: np.ndarray | None, dim: int) -> np.ndarray:
    """Fused coin + shift on a coin-major batch.

    ``defects`` broadcasts against ``(B, *positions)`` or is None for a
    defect-free lattice. Raises :class:`EdgeError` if any amplitude sits on
    the outermost sites before the step, which is the only way a shift could
    lose amplitude.
    """
    _check_interior(amps, dim)
    out = np.zeros_like(amps)
    if dim == 1:
        a, b = amps[:, 0], amps[:, 1]
        # source region of the +1 component is [:-1], of the -1 component [1:]
        plus = (a[:, :-1] + b[:, :-1]) * INV_SQRT2
        minus = (a[:, 1:] - b[:, 1:]) * INV_SQRT2
        if defects is not None:
            plus = np.where(defects[..., :-1], b[:, :-1], plus)
            minus = np.where(defects[..., 1:], a[:, 1:], minus)
        out[:, 0, 1:] = plus
        out[:, 1, :-1] = minus
        return out

    A, B_, C, D = amps[:, 0], amps[:, 1], amps[:, 2], amps[:, 3]
    s1 = A + B_
    d1 = A - B_
    s2 = C + D
    d2 = C - D
    # (component, value, flipped value, source slice, destination slice)
    lo, hi, mid = slice(None, -1), slice(1, None), slice(None)
    plan = (
        (0, s1, s2, 1.0, D, (lo, lo), (hi, hi)),
        (1, d1, d2, 1.0, C, (lo, hi), (hi, lo)),
        (2, s1, s2, -1.0, B_, (hi, lo), (lo, hi)),
        (3, d1, d2, -1.0, A, (hi, hi), (lo, lo)),
    )
    for k, u, v, sign, flipped, src, dst in plan:
        s = (mid,) + src
        val = (u[s] + sign * v[s]) * 0.5
        if defects is not None:
            val = np.where(defects[(Ellipsis,) + src], flipped[s], val)
        out[(mid, k) + dst] = val
    return out
