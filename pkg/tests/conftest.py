import itertools
import math

import numpy as np
import pytest

from congested_qwalk import ExperimentConfig
from congested_qwalk.lattice import CoinLattice, open_lattice


def dict_walk(steps, x0, c0, defects=frozenset()):
    """Reference quantum walk on a dict of {(pos, coins): amplitude}.

    Coin rule written straight from C|x,+-1> = (|x,1> +- |x,-1>)/sqrt(2),
    applied per axis; defects swap the coin on every axis.
    """
    dim = len(x0)
    state = {(tuple(x0), tuple(c0)): 1.0}
    for _ in range(steps):
        coined = {}
        for (pos, coins), a in state.items():
            if pos in defects:
                outs = [(tuple(-c for c in coins), a)]
            else:
                outs = []
                for new in itertools.product((1, -1), repeat=dim):
                    sign = 1.0
                    for c_in, c_out in zip(coins, new):
                        if c_in == -1 and c_out == -1:
                            sign = -sign
                    outs.append((new, sign * a / math.sqrt(2) ** dim))
            for new, amp in outs:
                coined[(pos, new)] = coined.get((pos, new), 0.0) + amp
        state = {}
        for (pos, coins), a in coined.items():
            key = (tuple(x + c for x, c in zip(pos, coins)), coins)
            state[key] = state.get(key, 0.0) + a
    probs = {}
    for (pos, _), a in state.items():
        probs[pos] = probs.get(pos, 0.0) + a * a
    return probs


def enumerate_classical(steps, x0, c0, defects=frozenset()):
    """Exhaustive path enumeration of the classical walker."""
    dim = len(x0)
    paths = {(tuple(x0), tuple(c0)): 1.0}
    for _ in range(steps):
        nxt = {}
        for (pos, coins), w in paths.items():
            if pos in defects:
                choices = [(tuple(-c for c in coins), w)]
            else:
                choices = [(cc, w / 2**dim) for cc in itertools.product((1, -1), repeat=dim)]
            for cc, ww in choices:
                key = (tuple(x + c for x, c in zip(pos, cc)), cc)
                nxt[key] = nxt.get(key, 0.0) + ww
        paths = nxt
    probs = {}
    for (pos, _), w in paths.items():
        probs[pos] = probs.get(pos, 0.0) + w
    return probs


def defect_set(lattice):
    out = set()
    for idx in zip(*np.nonzero(lattice.defects)):
        out.add(tuple(int(i) + lo for i, (lo, _) in zip(idx, lattice.extent)))
    return frozenset(out)


def lattice_from_sites(dim, t_max, sites, extent=None):
    lat = open_lattice(dim, t_max, extent)
    d = np.zeros(lat.shape, dtype=bool)
    for s in sites:
        d[lat.index(s)] = True
    return CoinLattice(dim, t_max, lat.extent, d)


@pytest.fixture
def cfg1d():
    return ExperimentConfig(dim=1, t_max=4, steps=4, x0=(0,), c0=(1,), trials=1, master_seed=3)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def report(request, capsys):
    """Record one PASS/FAIL line for an acceptance criterion."""

    def _report(number, ok, detail):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE_LINES.append(line)
        with capsys.disabled():
            print(f"\n{line}")
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
