"""Ensembles of walk trajectories over random lattices and dephasing masks.

Trial ``k`` of a run draws every random number it needs from its own stream,
``PCG64(SeedSequence(master_seed, spawn_key=(0, k)))``: first one uniform per
lattice site (row-major, only in ``resample_per_trial`` mode), then ``m``
uniforms per step for its flip mask (only when ``0 < p_d < 1``). The fixed
lattice of ``fixed_per_batch`` mode comes from ``spawn_key=(1,)``.

Trials are processed in fixed-size batches whose size depends only on the
configuration, and batch partial sums are reduced in batch order, so results
do not depend on the number of worker threads.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .config import ExperimentConfig
from .errors import PreconditionError
from .lattice import CoinLattice, generate, sample_defects
from .metrics import Distribution, MetricSeries, axis_moments, escape_mask, variance
from .walk import batch_step, coin_index, from_coin_major, state_shape

log = logging.getLogger(__name__)

RNG_ALGORITHM = "numpy.random.PCG64 via SeedSequence(master_seed, spawn_key=(0, trial))"
_TARGET_BATCH_ELEMENTS = 2_000_000
_MAX_BATCH = 4096


def fresh_seed() -> int:
    return int(np.random.SeedSequence().entropy % 2**63)


def trial_rng(master_seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(0, trial))))


def fixed_lattice_rng(master_seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed, spawn_key=(1,))))


def derived_seed(master_seed: int, index: int) -> int:
    ss = np.random.SeedSequence(master_seed, spawn_key=(2, index))
    return int(ss.generate_state(1, dtype=np.uint64)[0] % 2**63)


def batch_size_for(config: ExperimentConfig) -> int:
    m = int(np.prod(state_shape(config.extent())))
    return int(np.clip(_TARGET_BATCH_ELEMENTS // m, 1, _MAX_BATCH))


def trial_lattice(config: ExperimentConfig, trial: int) -> CoinLattice:
    """The lattice trial ``trial`` of ``config`` walks on."""
    if config.lattice_mode == "fixed_per_batch":
        rng = fixed_lattice_rng(config.master_seed)
    else:
        rng = trial_rng(config.master_seed, trial)
    return generate(config.extent(), config.p, [config.x0], rng, t_max=config.t_max, seed=config.master_seed)


@dataclass
class EnsembleResult:
    """Trajectory-averaged output of :func:`run`.

    ``distributions[t]`` is the ensemble-averaged distribution after ``t``
    steps (``t = 0..steps``). ``series.variance`` is the spread of those
    averaged distributions. ``trial_spread[k, t]`` is trial ``k``'s second
    moment about the ensemble mean, whose average is exactly
    ``series.variance[t]``; ``trial_p_esc[k, t]`` is trial ``k``'s escaped mass.
    """

    config: ExperimentConfig
    distributions: list[Distribution]
    series: MetricSeries
    trial_spread: np.ndarray
    trial_p_esc: np.ndarray | None
    density: np.ndarray | None = None
    trial_final: np.ndarray | None = None

    @property
    def final(self) -> Distribution:
        return self.distributions[-1]


@dataclass
class _BatchOut:
    prob_sum: np.ndarray  # (steps+1, *pos_shape)
    first: np.ndarray  # (B, steps+1, dim)
    second: np.ndarray  # (B, steps+1, dim) raw second moments
    p_esc: np.ndarray | None  # (B, steps+1)
    density: np.ndarray | None
    final: np.ndarray | None


def _run_batch(
    config: ExperimentConfig,
    k0: int,
    k1: int,
    fixed: np.ndarray | None,
    record_density: bool,
    keep_final: bool,
) -> _BatchOut:
    dim = config.dim
    extent = config.extent()
    shape = state_shape(extent)
    pos_shape = shape[:dim]
    B = k1 - k0
    m = int(np.prod(shape))
    p_d = config.p_d
    noisy = 0.0 < p_d < 1.0
    need_rng = noisy or fixed is None
    gens = [trial_rng(config.master_seed, k) for k in range(k0, k1)] if need_rng else []

    start = tuple(x - lo for x, (lo, _) in zip(config.x0, extent))
    if fixed is not None:
        defects = fixed[None] if fixed.any() else None
    elif config.p == 1.0:
        # still consume the per-site draws so the stream layout is unchanged
        for g in gens:
            sample_defects(pos_shape, config.p, g)
        defects = None
    else:
        defects = np.empty((B,) + pos_shape, dtype=bool)
        for b, g in enumerate(gens):
            defects[b] = sample_defects(pos_shape, config.p, g)
        defects[(slice(None),) + start] = False

    ncomp = 2**dim
    amps = np.zeros((B, ncomp) + pos_shape)
    comp = int(np.ravel_multi_index(tuple(coin_index(c) for c in config.c0), (2,) * dim))
    amps[(slice(None), comp) + start] = 1.0

    line = None if config.t_b is None else config.boundary().line(config.t_max)
    esc_cols = None if line is None else escape_mask(extent, line)
    T = config.steps + 1
    prob_sum = np.zeros((T,) + pos_shape)
    first = np.zeros((B, T, dim))
    second = np.zeros((B, T, dim))
    p_esc = None if line is None else np.zeros((B, T))
    uniforms = np.empty((B, m)) if noisy else None

    for t in range(T):
        if t > 0:
            amps = batch_step(amps, defects, dim)
            if noisy:
                for b, g in enumerate(gens):
                    g.random(out=uniforms[b])
                # uniforms are in basis order (positions, then coins)
                signs = np.where(uniforms < p_d, -1.0, 1.0).reshape((B,) + pos_shape + (ncomp,))
                amps *= np.moveaxis(signs, -1, 1)
            elif p_d == 1.0:
                amps = -amps
        probs = np.einsum("bk...,bk...->b...", amps, amps)
        prob_sum[t] = probs.sum(axis=0)
        mu, sec = axis_moments(probs, extent, center=[0.0] * dim)
        first[:, t, :] = np.stack(mu, axis=-1)
        second[:, t, :] = np.stack(sec, axis=-1)
        if p_esc is not None:
            marg_x = probs.sum(axis=tuple(range(2, 1 + dim))) if dim > 1 else probs
            p_esc[:, t] = marg_x[:, esc_cols].sum(axis=-1)

    density = None
    if record_density:
        flat = from_coin_major(amps, dim).reshape(B, m)
        density = flat.T @ flat
    return _BatchOut(prob_sum, first, second, p_esc, density, probs if keep_final else None)


def run(
    config: ExperimentConfig,
    threads: int = 1,
    record_density: bool = False,
    keep_final: bool = False,
) -> EnsembleResult:
    """Average ``config.trials`` independent trajectories.

    Parameters
    ----------
    config : ExperimentConfig
        A ``master_seed`` of None is replaced by a fresh seed, recorded in
        ``result.config``.
    threads : int
        Worker threads; results are identical for any value.
    record_density : bool
        Also accumulate the trajectory average of ``|psi><psi|`` at the final
        step. Memory grows as the square of the basis size.
    keep_final : bool
        Keep every trial's final distribution in ``result.trial_final``.
    """
    if config.master_seed is None:
        config = config.replace(master_seed=fresh_seed())
    dim = config.dim
    extent = config.extent()
    N = config.trials

    fixed = None
    if config.lattice_mode == "fixed_per_batch":
        fixed = trial_lattice(config, 0).defects

    bs = batch_size_for(config)
    bounds = [(k, min(k + bs, N)) for k in range(0, N, bs)]
    log.debug("run: %d trials in %d batches of <= %d", N, len(bounds), bs)

    def work(b):
        return _run_batch(config, b[0], b[1], fixed, record_density, keep_final)

    if threads > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outs = list(pool.map(work, bounds))
    else:
        outs = [work(b) for b in bounds]

    prob_sum = outs[0].prob_sum.copy()
    for o in outs[1:]:
        prob_sum += o.prob_sum
    avg = prob_sum / N
    first = np.concatenate([o.first for o in outs])
    second = np.concatenate([o.second for o in outs])

    T = config.steps + 1
    dists = [Distribution(dim, config.t_max, extent, avg[t], t) for t in range(T)]
    var = np.array([variance(d) for d in dists])
    mu_bar = first.mean(axis=0)  # (T, dim)
    spread = (second - 2.0 * mu_bar[None] * first + mu_bar[None] ** 2).sum(axis=-1)
    stderr_var = _stderr(spread)

    if config.t_b is not None:
        trial_p_esc = np.concatenate([o.p_esc for o in outs])
        p_esc = trial_p_esc.mean(axis=0)
        stderr_pesc = _stderr(trial_p_esc)
    else:
        trial_p_esc = None
        p_esc = np.full(T, np.nan)
        stderr_pesc = np.full(T, np.nan)

    density = None
    if record_density:
        density = outs[0].density.copy()
        for o in outs[1:]:
            density += o.density
        density /= N

    series = MetricSeries(
        times=np.arange(T),
        variance=var,
        p_esc=p_esc,
        stderr_var=stderr_var,
        stderr_pesc=stderr_pesc,
        metadata={
            "p": config.p,
            "p_d": config.p_d,
            "t_max": config.t_max,
            "t_b": config.t_b,
            "trials": N,
        },
    )
    trial_final = np.concatenate([o.final for o in outs]) if keep_final else None
    return EnsembleResult(config, dists, series, spread, trial_p_esc, density, trial_final)


def _stderr(samples: np.ndarray) -> np.ndarray:
    n = samples.shape[0]
    if n < 2:
        return np.zeros(samples.shape[1:])
    return samples.std(axis=0, ddof=1) / np.sqrt(n)


def sweep(
    configs: Sequence[ExperimentConfig],
    master_seed: int | None = None,
    common_random_numbers: bool = False,
    threads: int = 1,
) -> list[EnsembleResult]:
    """Run each configuration in order.

    With ``master_seed`` set, config ``i`` is re-seeded from
    ``(master_seed, i)``; ``common_random_numbers=True`` instead gives every
    config ``master_seed`` itself, so configs that differ only in ``p_d`` walk
    on identical lattices.
    """
    configs = list(configs)
    if not configs:
        raise PreconditionError("sweep needs at least one configuration")
    out = []
    for i, cfg in enumerate(configs):
        if master_seed is not None:
            seed = master_seed if common_random_numbers else derived_seed(master_seed, i)
            cfg = cfg.replace(master_seed=seed)
        out.append(run(cfg, threads=threads))
    return out
