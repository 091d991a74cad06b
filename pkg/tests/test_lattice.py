import numpy as np
import pytest

from congested_qwalk import CoinKind, CoinLattice, ConfigError, PreconditionError, defect_reversal_check, generate
from congested_qwalk.errors import EdgeError
from congested_qwalk.lattice import lattice_extent

from conftest import lattice_from_sites

SQUARE = ((-10, 10), (-10, 10))


def test_p_one_all_hadamard():
    lat = generate(SQUARE, 1.0, [], np.random.default_rng(0))
    assert not lat.defects.any()
    assert lat.kind_at((3, -2)) is CoinKind.HADAMARD


def test_p_zero_all_defects_except_protected():
    lat = generate(SQUARE, 0.0, [(0, 0)], np.random.default_rng(0))
    assert lat.kind_at((0, 0)) is CoinKind.HADAMARD
    assert lat.defects.sum() == lat.n_sites - 1


def test_protected_outside_extent():
    with pytest.raises(ConfigError):
        generate(SQUARE, 0.5, [(11, 0)], np.random.default_rng(0))


def test_invalid_p():
    with pytest.raises(ConfigError):
        generate(SQUARE, 1.5, [], np.random.default_rng(0))


def test_defect_fraction_statistics():
    rng = np.random.default_rng(2024)
    fracs = [generate(SQUARE, 0.7, [], rng).defect_fraction() for _ in range(1000)]
    sigma = np.sqrt(0.3 * 0.7 / 441) / np.sqrt(1000)
    assert abs(np.mean(fracs) - 0.3) < 3 * sigma


def test_seed_determinism_and_row_major_draws():
    a = generate(SQUARE, 0.6, [(0, 0)], np.random.default_rng(5))
    b = generate(SQUARE, 0.6, [(0, 0)], np.random.default_rng(5))
    assert np.array_equal(a.defects, b.defects)
    u = np.random.default_rng(5).random(441).reshape(21, 21)
    expected = u >= 0.6
    expected[10, 10] = False
    assert np.array_equal(a.defects, expected)


def test_lattice_is_immutable():
    lat = generate(SQUARE, 0.5, [], np.random.default_rng(1))
    with pytest.raises(ValueError):
        lat.defects[0, 0] = True
    with pytest.raises(AttributeError):
        lat.p = 0.1


def test_kinds_array():
    lat = lattice_from_sites(1, 2, [(1,)])
    assert list(lat.kinds()) == [CoinKind.HADAMARD] * 3 + [CoinKind.BITFLIP, CoinKind.HADAMARD]


def test_json_round_trip():
    lat = generate(lattice_extent(5, (-5, 0), 5), 0.7, [(-5, 0)], np.random.default_rng(9), t_max=5, seed=9)
    doc = lat.to_json()
    assert doc["extent"] == [[-10, 5], [-5, 5]]
    assert sum(n for _, n in doc["kinds"]) == lat.n_sites
    back = CoinLattice.from_json(doc)
    assert np.array_equal(back.defects, lat.defects)
    assert (back.dim, back.t_max, back.extent, back.p, back.seed) == (2, 5, lat.extent, 0.7, 9)


@pytest.mark.parametrize(
    "dim, site, coin, expected",
    [
        (1, (3,), (1,), (2,)),
        (1, (-1,), (-1,), (0,)),
        (2, (2, 2), (1, -1), (1, 3)),
        (2, (-3, 1), (-1, -1), (-2, 2)),
    ],
)
def test_defect_reversal(dim, site, coin, expected):
    lat = lattice_from_sites(dim, 5, [site])
    assert defect_reversal_check(lat, site, coin) == expected


def test_defect_reversal_needs_defect():
    lat = lattice_from_sites(1, 5, [])
    with pytest.raises(PreconditionError):
        defect_reversal_check(lat, (0,), (1,))


def test_reversal_is_certain_after_entering():
    # walker steps onto a defect, then comes straight back with probability 1
    from congested_qwalk import DephasingSpec, InitialState, evolve
    from congested_qwalk.metrics import distribution

    lat = lattice_from_sites(2, 4, [(1, 1)])
    lat = CoinLattice(2, 4, lat.extent, lat.defects)
    init = InitialState((0, 0), (1, 1))
    # one Hadamard step spreads over four diagonal neighbours; (1,1) holds 1/4
    traj = evolve(init, lat, DephasingSpec(0.0), 2)
    assert distribution(traj[0]).at((1, 1)) == pytest.approx(0.25)
    # of that quarter, all returns to the origin: nothing reaches (2, 2)
    assert distribution(traj[1]).at((2, 2)) == 0.0
    assert distribution(traj[1]).at((0, 0)) >= 0.25 - 1e-12


def test_edge_error_is_config_error():
    assert issubclass(EdgeError, ConfigError)
