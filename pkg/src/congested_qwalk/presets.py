"""Named parameter sets for the standard experiments."""

from __future__ import annotations

from .config import DEFAULT_TRIALS, ExperimentConfig, edge_start

ORIGIN_INPUT_2D = ((0, 0), (1, 1))
P_GRID = (1.0, 0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1, 0.0)
PD_GRID = (0.0, 0.00005, 0.00015, 0.0005, 0.005, 0.05, 0.5)
CLASSICAL_PD = 0.5


def _trials(p: float, p_d: float, trials: int) -> int:
    # no congestion and no noise: every trajectory is identical
    return 1 if p == 1.0 and p_d in (0.0, 1.0) else trials


def _cfg(t_max, x0, c0, p, p_d, trials, seed, t_b=None) -> ExperimentConfig:
    return ExperimentConfig(
        dim=2, t_max=t_max, steps=t_max, x0=x0, c0=c0, p=p, p_d=p_d, t_b=t_b,
        trials=_trials(p, p_d, trials), master_seed=seed,
    )


def fig1(trials: int = DEFAULT_TRIALS, seed: int | None = None) -> list[tuple[str, ExperimentConfig]]:
    """Spreading and escape, quantum vs classical, 2D ``t_max = 20``, ``t_b = 4``.

    Spreading uses the origin start ``|0,0,1,1>``; escape uses the left-edge
    start, where the boundary is defined.
    """
    t_max = 20
    x0, c0 = ORIGIN_INPUT_2D
    edge = edge_start(2, t_max)
    return [
        ("spread_quantum", _cfg(t_max, x0, c0, 1.0, 0.0, trials, seed, t_b=4)),
        ("spread_classical", _cfg(t_max, x0, c0, 1.0, CLASSICAL_PD, trials, seed, t_b=4)),
        ("escape_quantum", _cfg(t_max, edge, c0, 1.0, 0.0, trials, seed, t_b=4)),
        ("escape_classical", _cfg(t_max, edge, c0, 1.0, CLASSICAL_PD, trials, seed, t_b=4)),
    ]


def fig2(trials: int = DEFAULT_TRIALS, seed: int | None = None) -> list[tuple[str, ExperimentConfig]]:
    """Escape versus time for several congestion levels, 2D ``t_max = 15``, ``t_b = 4``."""
    t_max = 15
    x0 = edge_start(2, t_max)
    runs = [(f"quantum_p{p:.1f}", _cfg(t_max, x0, (1, 1), p, 0.0, trials, seed, t_b=4)) for p in (1.0, 0.9, 0.8, 0.7)]
    runs.append(("classical_p0.7", _cfg(t_max, x0, (1, 1), 0.7, CLASSICAL_PD, trials, seed, t_b=4)))
    return runs


def fig3(trials: int = DEFAULT_TRIALS, seed: int | None = None) -> list[tuple[str, ExperimentConfig]]:
    """Final distributions from ``|0,0,1,1>`` at ``t_max = 10`` for weak dephasing."""
    x0, c0 = ORIGIN_INPUT_2D
    return [(f"pd{p_d:g}", _cfg(10, x0, c0, 1.0, p_d, trials, seed)) for p_d in (0.0, 0.00015, 0.0005)]


def fig4(trials: int = DEFAULT_TRIALS, seed: int | None = None) -> list[tuple[str, ExperimentConfig]]:
    """Final variance over the (p, p_d) grid from ``|0,0,1,1>``, ``t_max = 10``."""
    x0, c0 = ORIGIN_INPUT_2D
    return [
        (f"p{p:.1f}_pd{p_d:g}", _cfg(10, x0, c0, p, p_d, trials, seed))
        for p in P_GRID
        for p_d in PD_GRID
    ]


def fig5(trials: int = DEFAULT_TRIALS, seed: int | None = None) -> list[tuple[str, ExperimentConfig]]:
    """Final escape probability over the (p, p_d) grid, edge start, ``t_max = 10``, ``t_b = 2``."""
    x0 = edge_start(2, 10)
    return [
        (f"p{p:.1f}_pd{p_d:g}", _cfg(10, x0, (1, 1), p, p_d, trials, seed, t_b=2))
        for p in P_GRID
        for p_d in PD_GRID
    ]


PRESETS = {"fig1": fig1, "fig2": fig2, "fig3": fig3, "fig4": fig4, "fig5": fig5}
GRID_PRESETS = {"fig4", "fig5"}
