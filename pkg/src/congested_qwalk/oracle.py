"""Exact, slow reference computations.

Nothing here reuses the walk kernels: the step unitary is assembled from index
arithmetic, and the classical walk has its own occupancy update. That keeps the
oracles independent of the engine they check.
"""

from __future__ import annotations

import itertools

import numpy as np
import scipy.sparse as sp

from .config import ExperimentConfig
from .errors import CapacityError, ConfigError, ValidationError
from .lattice import CoinLattice
from .metrics import Distribution

DEFAULT_MAX_BASIS = 64
DENSITY_TOL = 1e-9

_H = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)
_X = np.array([[0.0, 1.0], [1.0, 0.0]])


def validate_density(rho: np.ndarray, tol: float = DENSITY_TOL) -> None:
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square (got shape {rho.shape})")
    if not np.allclose(rho, rho.conj().T, atol=tol, rtol=0.0):
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > tol:
        raise ValidationError(f"density matrix trace is {np.trace(rho).real}, not 1")
    if np.linalg.eigvalsh(rho).min() < -tol:
        raise ValidationError("density matrix has a negative eigenvalue")


def _scale_offdiag(rho: np.ndarray, factor: float) -> np.ndarray:
    out = rho * factor
    np.fill_diagonal(out, np.diag(rho))
    return out


def dephase_channel(rho: np.ndarray, p_d: float, validate: bool = True) -> np.ndarray:
    """Average of ``F rho F`` over all sign-flip masks with flip probability ``p_d``.

    Keeps the diagonal and multiplies every off-diagonal entry by ``(1 - 2 p_d)**2``.
    """
    if not 0.0 <= p_d <= 1.0:
        raise ConfigError(f"p_d must lie in [0, 1] (got {p_d})")
    if validate:
        validate_density(rho)
    return _scale_offdiag(np.asarray(rho), (1.0 - 2.0 * p_d) ** 2)


def all_masks(m: int) -> tuple[np.ndarray, np.ndarray]:
    """Every sign pattern on ``m`` elements, as ``(signs, flip_counts)``.

    ``signs`` has shape ``(2**m, m)`` with entries +-1.
    """
    bits = np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.int64).reshape(-1, m)
    return 1.0 - 2.0 * bits, bits.sum(axis=1)


def mask_weights(m: int, p_d: float, counts: np.ndarray) -> np.ndarray:
    return p_d**counts * (1.0 - p_d) ** (m - counts)


def dephasing_mixture(rho: np.ndarray, p_d: float, max_m: int = 12) -> np.ndarray:
    """Brute-force ``sum_j p_j F_j rho F_j`` over all ``2**m`` diagonal sign matrices."""
    m = rho.shape[0]
    if m > max_m:
        raise CapacityError(f"brute-force mixture enumerates 2**m masks; m={m} > {max_m}")
    signs, counts = all_masks(m)
    w = mask_weights(m, p_d, counts)
    # F rho F for diagonal F is rho scaled entrywise by the outer product of signs
    return np.einsum("j,jr,rs,js->rs", w, signs, rho, signs)


def dynamical_matrix(m: int, p_d: float, max_m: int = 12) -> np.ndarray:
    """Superoperator ``D = sum_j p_j F_j (x) F_j`` acting on column-stacked ``vec(rho)``."""
    if m > max_m:
        raise CapacityError(f"dynamical matrix enumerates 2**m masks; m={m} > {max_m}")
    signs, counts = all_masks(m)
    w = mask_weights(m, p_d, counts)
    D = np.zeros((m * m, m * m))
    for wj, f in zip(w, signs):
        F = np.diag(f)
        D += wj * np.kron(F.conj(), F)
    return D


def apply_superoperator(D: np.ndarray, rho: np.ndarray) -> np.ndarray:
    m = rho.shape[0]
    return (D @ rho.reshape(-1, order="F")).reshape(m, m, order="F")


def basis_index_map(extent) -> tuple[tuple[int, ...], int]:
    shape = tuple(hi - lo + 1 for lo, hi in extent) + (2,) * len(extent)
    return shape, int(np.prod(shape))


def step_unitary(lattice: CoinLattice) -> sp.csr_matrix:
    """Sparse ``S . C`` for one step on ``lattice`` in row-major basis order.

    Transitions that would leave the allocated extent are omitted, so the
    matrix is only orthogonal on states that keep clear of the edges.
    """
    dim = lattice.dim
    shape, m = basis_index_map(lattice.extent)
    pos_shape = shape[:dim]
    hh = _H if dim == 1 else np.kron(_H, _H)
    xx = _X if dim == 1 else np.kron(_X, _X)
    ncoin = 2**dim
    coin_vals = [tuple(1 - 2 * b for b in bits) for bits in itertools.product((0, 1), repeat=dim)]
    rows, cols, vals = [], [], []
    for site in itertools.product(*(range(n) for n in pos_shape)):
        local = xx if lattice.defects[site] else hh
        base = np.ravel_multi_index(site + (0,) * dim, shape)
        for out_c in range(ncoin):
            target = tuple(s + c for s, c in zip(site, coin_vals[out_c]))
            if any(not 0 <= t < n for t, n in zip(target, pos_shape)):
                continue
            row = np.ravel_multi_index(target + tuple(np.unravel_index(out_c, (2,) * dim)), shape)
            for in_c in range(ncoin):
                v = local[out_c, in_c]
                if v != 0.0:
                    rows.append(row)
                    cols.append(base + in_c)
                    vals.append(v)
    return sp.csr_matrix((vals, (rows, cols)), shape=(m, m))


def initial_vector(config: ExperimentConfig) -> np.ndarray:
    shape, m = basis_index_map(config.extent())
    psi = np.zeros(m)
    idx = tuple(x - lo for x, (lo, _) in zip(config.x0, config.extent()))
    idx += tuple(0 if c == 1 else 1 for c in config.c0)
    psi[np.ravel_multi_index(idx, shape)] = 1.0
    return psi


def evolve_density(
    config: ExperimentConfig,
    lattice: CoinLattice,
    max_basis: int = DEFAULT_MAX_BASIS,
) -> list[np.ndarray]:
    """Exact mixed states at ``t = 0..steps`` under ``rho -> dephase(U rho U^T)``."""
    _, m = basis_index_map(config.extent())
    if m > max_basis:
        raise CapacityError(f"density-matrix oracle capped at {max_basis} basis states (need {m})")
    if tuple(lattice.extent) != tuple(config.extent()):
        raise ConfigError("lattice extent does not match the configuration")
    U = step_unitary(lattice)
    psi = initial_vector(config)
    rho = np.outer(psi, psi)
    out = [rho]
    factor = (1.0 - 2.0 * config.p_d) ** 2
    for _ in range(config.steps):
        rho = (U @ (U @ rho).T).T
        rho = _scale_offdiag(rho, factor)
        out.append(rho)
    return out


def density_distribution(rho: np.ndarray, config: ExperimentConfig, time: int = 0) -> Distribution:
    shape, _ = basis_index_map(config.extent())
    diag = np.real(np.diag(rho)).reshape(shape)
    probs = diag.sum(axis=tuple(range(config.dim, 2 * config.dim)))
    return Distribution(config.dim, config.t_max, config.extent(), probs, time)


def _classical_step(occ: np.ndarray, defects: np.ndarray, dim: int) -> np.ndarray:
    coin_axes = tuple(range(dim, 2 * dim))
    site_total = occ.sum(axis=coin_axes, keepdims=True)
    randomized = np.broadcast_to(site_total / 2**dim, occ.shape)
    reversed_ = occ[(Ellipsis,) + (slice(None, None, -1),) * dim]
    mask = defects.reshape(defects.shape + (1,) * dim)
    occ = np.where(mask, reversed_, randomized)
    for axis in range(dim):
        moved = np.zeros_like(occ)
        plus = [slice(None)] * occ.ndim
        minus = [slice(None)] * occ.ndim
        plus[dim + axis] = 0
        minus[dim + axis] = 1
        src_p, dst_p = list(plus), list(plus)
        src_p[axis], dst_p[axis] = slice(None, -1), slice(1, None)
        src_m, dst_m = list(minus), list(minus)
        src_m[axis], dst_m[axis] = slice(1, None), slice(None, -1)
        moved[tuple(dst_p)] = occ[tuple(src_p)]
        moved[tuple(dst_m)] = occ[tuple(src_m)]
        occ = moved
    return occ


def classical_series(config: ExperimentConfig, lattice: CoinLattice) -> list[Distribution]:
    """Exact classical-walk distributions at ``t = 0..steps`` by dynamic programming.

    Occupancy is tracked over (position, coin) because a defect reverses the
    walker according to the direction it arrived from.
    """
    extent = config.extent()
    if tuple(lattice.extent) != tuple(extent):
        raise ConfigError("lattice extent does not match the configuration")
    shape, _ = basis_index_map(extent)
    occ = initial_vector(config).reshape(shape)
    dim = config.dim
    coin_axes = tuple(range(dim, 2 * dim))
    out = [Distribution(dim, config.t_max, extent, occ.sum(axis=coin_axes), 0)]
    for t in range(1, config.steps + 1):
        occ = _classical_step(occ, lattice.defects, dim)
        out.append(Distribution(dim, config.t_max, extent, occ.sum(axis=coin_axes), t))
    return out


def classical_walk(config: ExperimentConfig, lattice: CoinLattice) -> Distribution:
    """Exact classical distribution after ``config.steps`` steps."""
    return classical_series(config, lattice)[-1]


def sample_classical_walk(
    config: ExperimentConfig,
    lattice: CoinLattice,
    trials: int,
    rng: np.random.Generator,
) -> Distribution:
    """Histogram of ``trials`` independent classical walkers after ``config.steps`` steps."""
    extent = config.extent()
    dim = config.dim
    lo = np.array([e[0] for e in extent])
    pos = np.tile(np.array(config.x0) - lo, (trials, 1))
    coin = np.tile(np.array(config.c0), (trials, 1))
    for _ in range(config.steps):
        blocked = lattice.defects[tuple(pos.T)]
        fresh = rng.choice(np.array([-1, 1]), size=coin.shape)
        coin = np.where(blocked[:, None], -coin, fresh)
        pos = pos + coin
    counts = np.zeros(lattice.shape)
    np.add.at(counts, tuple(pos.T), 1.0)
    return Distribution(dim, config.t_max, extent, counts / trials, config.steps)


def total_variation(a: Distribution, b: Distribution) -> float:
    if a.dim != b.dim or tuple(a.extent) != tuple(b.extent):
        raise ValidationError("distributions have different supports")
    return 0.5 * float(np.abs(a.probs - b.probs).sum())
