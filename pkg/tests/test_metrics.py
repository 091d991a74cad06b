import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from congested_qwalk import Boundary, ConfigError, Distribution, escape_probability, variance
from congested_qwalk.lattice import open_lattice
from congested_qwalk.metrics import MetricSeries, axis_moments, distribution
from congested_qwalk.walk import apply_coin, basis_state
from congested_qwalk.errors import ValidationError


def dist1d(t_max, pmap, extent=None):
    extent = extent or ((-t_max, t_max),)
    lo = extent[0][0]
    probs = np.zeros(extent[0][1] - lo + 1)
    for x, pr in pmap.items():
        probs[x - lo] = pr
    return Distribution(1, t_max, extent, probs)


def test_point_mass_distribution():
    lat = open_lattice(2, 3)
    d = distribution(basis_state(lat, (1, -2), (1, 1)))
    assert d.at((1, -2)) == 1.0 and d.total() == 1.0
    assert variance(d) == 0.0


def test_coin_sum_ignores_signs():
    lat = open_lattice(1, 1)
    st_ = apply_coin(basis_state(lat, (0,), (-1,)), lat)
    assert distribution(st_).at((0,)) == pytest.approx(1.0)


@pytest.mark.parametrize(
    "pmap, expected",
    [({-2: 0.25, 0: 0.5, 2: 0.25}, 2.0), ({-1: 0.5, 1: 0.5}, 1.0), ({0: 1.0}, 0.0)],
)
def test_variance_examples(pmap, expected):
    assert variance(dist1d(3, pmap)) == pytest.approx(expected)


def test_variance_2d_is_trace():
    probs = np.zeros((3, 3))
    probs[0, 0] = probs[2, 2] = 0.5  # x and y each +-1 with prob 1/2
    d = Distribution(2, 1, ((-1, 1), (-1, 1)), probs)
    assert variance(d) == pytest.approx(2.0)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(-4, 4))
def test_variance_translation_invariant(seed, shift):
    rng = np.random.default_rng(seed)
    probs = rng.random(9)
    probs /= probs.sum()
    a = Distribution(1, 4, ((-4, 4),), probs)
    b = Distribution(1, 8, ((-4 + shift, 4 + shift),), probs)
    assert variance(a) == pytest.approx(variance(b), abs=1e-9)


def test_axis_moments_match_variance():
    rng = np.random.default_rng(3)
    probs = rng.random((5, 7))
    probs /= probs.sum()
    extent = ((-2, 2), (-3, 3))
    mu, sec = axis_moments(probs[None], extent)
    assert sum(float(s[0]) for s in sec) == pytest.approx(variance(Distribution(2, 3, extent, probs)))


def test_escape_examples():
    t_max = 5
    extent = ((-10, 5),)
    start = dist1d(t_max, {-5: 1.0}, extent)
    assert escape_probability(start, Boundary(4)) == 0.0
    right = dist1d(t_max, {5: 1.0}, extent)
    assert escape_probability(right, Boundary(4)) == 1.0
    # strictly beyond the line x = -t_max + t_b
    on_line = dist1d(t_max, {-1: 1.0}, extent)
    assert escape_probability(on_line, Boundary(4)) == 0.0


def test_escape_1d_edge_start_three_steps():
    from congested_qwalk import DephasingSpec, InitialState, evolve
    from congested_qwalk.lattice import lattice_extent

    t_max = 5
    lat = open_lattice(1, t_max, lattice_extent(t_max, (-t_max,), 3))
    traj = evolve(InitialState((-t_max,), (1,)), lat, DephasingSpec(0.0), 3)
    assert escape_probability(distribution(traj[-1]), Boundary(2)) == pytest.approx(1 / 8)


def test_escape_2d_sums_over_y():
    probs = np.zeros((3, 3))
    probs[2, :] = [0.1, 0.2, 0.3]
    probs[1, 1] = 0.4
    d = Distribution(2, 1, ((-1, 1), (-1, 1)), probs)
    assert escape_probability(d, Boundary(1)) == pytest.approx(0.6)


def test_boundary_validation():
    with pytest.raises(ConfigError):
        Boundary(-1)
    with pytest.raises(ConfigError):
        escape_probability(dist1d(2, {0: 1.0}), Boundary(5))


def test_distribution_validate():
    dist1d(2, {0: 1.0}).validate()
    with pytest.raises(ValidationError):
        dist1d(2, {0: 0.5}).validate()


def test_metric_series_lengths():
    z = np.zeros(3)
    with pytest.raises(ValidationError):
        MetricSeries(np.arange(3), z, z, z, np.zeros(2))
    rows = list(MetricSeries(np.arange(3), z, z, z, z).rows())
    assert rows[2] == (2, 0.0, 0.0, 0.0, 0.0)
