import numpy as np
import pytest

from congested_qwalk import DephasingSpec, ExperimentConfig, PreconditionError, ConfigError, evolve, run, sweep
from congested_qwalk import oracle
from congested_qwalk.lattice import generate, open_lattice
from congested_qwalk.metrics import distribution, escape_probability, variance
from congested_qwalk.montecarlo import batch_size_for, trial_lattice, trial_rng


def test_single_noiseless_trial_equals_evolve():
    cfg = ExperimentConfig(2, 6, 6, (0, 0), (1, 1), trials=1, master_seed=1)
    res = run(cfg)
    traj = evolve(cfg.initial_state(), open_lattice(2, 6), DephasingSpec(0.0), 6)
    for d, st_ in zip(res.distributions[1:], traj):
        np.testing.assert_allclose(d.probs, distribution(st_).probs, rtol=0, atol=1e-14)
    assert res.series.stderr_var[-1] == 0.0


def test_trial_matches_walk_core_with_same_stream():
    # trial k consumes its stream as: lattice draws, then one mask per step
    cfg = ExperimentConfig(1, 6, 6, (-6,), (1,), p=0.8, p_d=0.2, t_b=3, trials=3, master_seed=42)
    res = run(cfg)
    total = np.zeros_like(res.final.probs)
    for k in range(3):
        rng = trial_rng(42, k)
        lat = generate(cfg.extent(), cfg.p, [cfg.x0], rng, t_max=cfg.t_max)
        assert np.array_equal(lat.defects, trial_lattice(cfg, k).defects)
        final = evolve(cfg.initial_state(), lat, DephasingSpec(cfg.p_d), 6, rng)[-1]
        total += distribution(final).probs
        assert res.trial_p_esc[k, -1] == pytest.approx(escape_probability(distribution(final), cfg.boundary()))
    np.testing.assert_allclose(res.final.probs, total / 3, atol=1e-15)


def test_reproducible_and_thread_independent():
    cfg = ExperimentConfig(2, 5, 5, (-5, 0), (1, 1), p=0.7, p_d=0.1, t_b=2, trials=3000, master_seed=9)
    assert batch_size_for(cfg) < 3000
    a = run(cfg)
    b = run(cfg, threads=3)
    np.testing.assert_array_equal(a.final.probs, b.final.probs)
    np.testing.assert_array_equal(a.series.p_esc, b.series.p_esc)
    np.testing.assert_array_equal(a.series.variance, b.series.variance)


def test_fresh_seed_recorded():
    cfg = ExperimentConfig(1, 3, 3, (0,), (1,), p_d=0.3, trials=10)
    res = run(cfg)
    assert res.config.master_seed is not None
    again = run(res.config)
    np.testing.assert_array_equal(res.final.probs, again.final.probs)


def test_averaged_distributions_normalized_and_stderr_nonneg():
    cfg = ExperimentConfig(2, 4, 4, (0, 0), (1, -1), p=0.6, p_d=0.05, t_b=3, trials=500, master_seed=2)
    res = run(cfg)
    for d in res.distributions:
        assert d.total() == pytest.approx(1.0, abs=1e-9)
        assert np.all(d.probs >= 0)
    assert np.all(res.series.stderr_var >= 0) and np.all(res.series.stderr_pesc >= 0)
    np.testing.assert_allclose(res.trial_spread.mean(axis=0), res.series.variance, atol=1e-9)


def test_fixed_lattice_mode_shares_one_lattice():
    cfg = ExperimentConfig(1, 5, 5, (0,), (1,), p=0.5, trials=50, lattice_mode="fixed_per_batch", master_seed=3)
    res = run(cfg)
    lat = trial_lattice(cfg, 0)
    clean = distribution(evolve(cfg.initial_state(), lat, DephasingSpec(0.0), 5)[-1])
    np.testing.assert_allclose(res.final.probs, clean.probs, atol=1e-12)
    assert res.series.stderr_var[-1] == pytest.approx(0.0, abs=1e-12)


def test_full_flip_is_noiseless():
    cfg = ExperimentConfig(2, 4, 4, (0, 0), (1, 1), p_d=1.0, trials=2, master_seed=1)
    clean = run(cfg.replace(p_d=0.0, trials=1))
    np.testing.assert_allclose(run(cfg).final.probs, clean.final.probs, atol=1e-15)


def test_no_boundary_gives_nan_pesc():
    res = run(ExperimentConfig(1, 3, 3, (0,), (1,), trials=1, master_seed=1))
    assert res.trial_p_esc is None and np.isnan(res.series.p_esc).all()


def test_density_estimate_diagonal_matches_distribution():
    cfg = ExperimentConfig(1, 3, 3, (0,), (1,), p_d=0.25, trials=2000, master_seed=8)
    res = run(cfg, record_density=True)
    d = oracle.density_distribution(res.density, cfg, 3)
    np.testing.assert_allclose(d.probs, res.final.probs, atol=1e-12)


def test_dephasing_half_1d_matches_classical():
    cfg = ExperimentConfig(1, 10, 10, (0,), (1,), p_d=0.5, trials=100_000, master_seed=31)
    res = run(cfg)
    exact = oracle.classical_walk(cfg, open_lattice(1, 10))
    assert oracle.total_variation(res.final, exact) < 0.02


def test_config_validation():
    with pytest.raises(ConfigError):
        ExperimentConfig(1, 10, 11, (0,), (1,))
    with pytest.raises(ConfigError):
        ExperimentConfig(1, 10, 10, (0,), (1,), trials=0)
    with pytest.raises(ConfigError):
        ExperimentConfig(2, 10, 10, (0, 0), (1, 1), p_d=2.0)
    with pytest.raises(ConfigError):
        ExperimentConfig(1, 4, 4, (0,), (1,), t_b=9)
    with pytest.raises(ConfigError):
        ExperimentConfig(1, 4, 4, (0,), (1,), lattice_mode="bogus")
    with pytest.raises(ConfigError):
        ExperimentConfig.from_json({"dim": 1, "bogus": 2})


def test_config_json_round_trip():
    cfg = ExperimentConfig(2, 7, 5, (-7, 0), (1, -1), p=0.4, p_d=0.01, t_b=3, trials=12, master_seed=5)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg


def test_sweep_empty_and_seeding():
    with pytest.raises(PreconditionError):
        sweep([])
    base = ExperimentConfig(1, 4, 4, (0,), (1,), p=0.6, trials=20, master_seed=None)
    out = sweep([base, base], master_seed=7)
    assert out[0].config.master_seed != out[1].config.master_seed
    crn = sweep([base, base.replace(p_d=0.5)], master_seed=7, common_random_numbers=True)
    for k in range(3):
        a = trial_lattice(crn[0].config, k).defects
        b = trial_lattice(crn[1].config, k).defects
        assert np.array_equal(a, b)


def test_sweep_congestion_ordering():
    # fewer open sites, less escaped mass at the final step
    base = ExperimentConfig(2, 15, 15, (-15, 0), (1, 1), t_b=4, trials=300, master_seed=None)
    res = sweep([base.replace(p=p) for p in (1.0, 0.9, 0.7)], master_seed=11)
    finals = [(r.series.p_esc[-1], r.series.stderr_pesc[-1]) for r in res]
    for (a, sa), (b, sb) in zip(finals, finals[1:]):
        assert a - b > -5 * np.hypot(sa, sb)


def test_sweep_dephasing_lowers_variance():
    base = ExperimentConfig(2, 10, 10, (0, 0), (1, 1), trials=300, master_seed=None)
    q, c = sweep([base.replace(trials=1), base.replace(p_d=0.5)], master_seed=4)
    diff = q.series.variance[-1] - c.series.variance[-1]
    assert diff > 5 * np.hypot(q.series.stderr_var[-1], c.series.stderr_var[-1])
