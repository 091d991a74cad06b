"""Command-line front end.

Subcommands: ``evolve`` (one trajectory), ``experiment`` (ensemble or sweep),
``oracle`` (exact density-matrix run with a channel report) and
``preset <fig1..fig5>``. Every invocation writes its files plus one
``manifest.json`` into the output directory (``--out``, else
``$QWALK_OUTPUT_DIR``, else ``./qwalk_out``).

Exit codes: 0 success, 2 configuration error, 3 capacity error, 4 I/O error.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, io, oracle, presets
from .config import DEFAULT_TRIALS, LATTICE_MODES, ExperimentConfig
from .dephasing import DephasingSpec
from .errors import CapacityError, ConfigError, PreconditionError, QWalkError
from .lattice import generate
from .metrics import Boundary, MetricSeries, distribution, escape_probability, variance
from .montecarlo import RNG_ALGORITHM, fresh_seed, run, sweep, trial_rng
from .walk import evolve, prepare

log = logging.getLogger("congested_qwalk")

EXIT_OK, EXIT_CONFIG, EXIT_CAPACITY, EXIT_IO = 0, 2, 3, 4
OUTPUT_ENV = "QWALK_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def parse_input(text: str, dim: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """``"x,c"`` (1D) or ``"x,y,cx,cy"`` (2D)."""
    try:
        vals = [int(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"--input must be comma-separated integers (got {text!r})") from None
    if len(vals) != 2 * dim:
        raise ConfigError(f"--input needs {2 * dim} values for dim={dim} (got {len(vals)})")
    return tuple(vals[:dim]), tuple(vals[dim:])


def _add_walk_flags(p: argparse.ArgumentParser, trials: bool = True) -> None:
    p.add_argument("--dim", type=int, default=1, choices=(1, 2))
    p.add_argument("--tmax", type=int, default=10)
    p.add_argument("--steps", type=int, default=None, help="defaults to --tmax")
    p.add_argument("--input", default=None, help="x[,y],c[,cy]; default origin with all coins +1")
    p.add_argument("--p", type=float, default=1.0, help="probability a site is open")
    p.add_argument("--pd", type=float, default=0.0, help="per-step sign-flip probability")
    p.add_argument("--tb", type=int, default=None, help="escape boundary offset from the left edge")
    p.add_argument("--seed", type=int, default=None)
    if trials:
        p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
        p.add_argument("--lattice-mode", choices=LATTICE_MODES, default="resample_per_trial")


def _add_output_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--threads", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qwalk", description=__doc__.split("\n\n")[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evolve", help="single trajectory over walk-core")
    _add_walk_flags(p, trials=False)
    _add_output_flags(p)

    p = sub.add_parser("experiment", help="Monte Carlo ensemble or sweep")
    p.add_argument("--config", type=Path, default=None, help="JSON config (object, list, or {configs: [...]})")
    _add_walk_flags(p)
    _add_output_flags(p)

    p = sub.add_parser("oracle", help="exact density-matrix evolution and channel report")
    _add_walk_flags(p, trials=False)
    p.add_argument("--max-basis", type=int, default=oracle.DEFAULT_MAX_BASIS)
    _add_output_flags(p)

    p = sub.add_parser("preset", help="reproduce a figure's parameter set")
    p.add_argument("name", choices=sorted(presets.PRESETS))
    p.add_argument("--trials", type=int, default=DEFAULT_TRIALS)
    p.add_argument("--seed", type=int, default=None)
    _add_output_flags(p)
    return parser


def _config_from_flags(args, trials: int = 1) -> ExperimentConfig:
    steps = args.tmax if args.steps is None else args.steps
    if args.input is None:
        x0, c0 = (0,) * args.dim, (1,) * args.dim
    else:
        x0, c0 = parse_input(args.input, args.dim)
    return ExperimentConfig(
        dim=args.dim, t_max=args.tmax, steps=steps, x0=x0, c0=c0, p=args.p, p_d=args.pd,
        t_b=args.tb, trials=getattr(args, "trials", trials),
        lattice_mode=getattr(args, "lattice_mode", "resample_per_trial"),
        master_seed=fresh_seed() if args.seed is None else args.seed,
    )


def _outdir(args) -> Path:
    out = args.out or Path(os.environ.get(OUTPUT_ENV, "qwalk_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


class _Manifest:
    def __init__(self, out: Path, argv):
        self.out = out
        self.doc = {
            "software": {"name": "congested_qwalk", "version": __version__, "numpy": np.__version__},
            "rng": {"algorithm": RNG_ALGORITHM, "numpy": np.__version__},
            "command": list(argv),
            "started": _now(),
            "configs": [],
            "seeds": [],
            "files": [],
        }

    def add_config(self, cfg: ExperimentConfig, label: str | None = None) -> None:
        entry = cfg.to_json()
        if label is not None:
            entry["label"] = label
        self.doc["configs"].append(entry)
        if cfg.master_seed not in self.doc["seeds"]:
            self.doc["seeds"].append(cfg.master_seed)

    def file(self, name: str) -> Path:
        self.doc["files"].append(name)
        return self.out / name

    def write(self) -> Path:
        self.doc["finished"] = _now()
        return io.write_json(self.out / "manifest.json", self.doc)


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat()


def cmd_evolve(args, argv) -> int:
    cfg = _config_from_flags(args)
    out = _outdir(args)
    man = _Manifest(out, argv)
    man.add_config(cfg)
    # Same stream layout as trial 0 of an ensemble run: lattice draws, then masks.
    rng = trial_rng(cfg.master_seed, 0)
    lattice = generate(cfg.extent(), cfg.p, [cfg.x0], rng, t_max=cfg.t_max, seed=cfg.master_seed)
    init = cfg.initial_state()
    states = [prepare(init, lattice)] + evolve(init, lattice, DephasingSpec(cfg.p_d), cfg.steps, rng)
    dists = [distribution(s) for s in states]
    T = len(dists)
    boundary = cfg.boundary()
    series = MetricSeries(
        times=np.arange(T),
        variance=np.array([variance(d) for d in dists]),
        p_esc=np.array([escape_probability(d, boundary) if boundary else np.nan for d in dists]),
        stderr_var=np.zeros(T),
        stderr_pesc=np.zeros(T) if boundary else np.full(T, np.nan),
        metadata={"p": cfg.p, "p_d": cfg.p_d, "t_max": cfg.t_max, "t_b": cfg.t_b, "trials": 1},
    )
    io.write_distributions_csv(man.file("distributions.csv"), dists)
    io.write_metrics_csv(man.file("metrics.csv"), series)
    io.write_json(man.file("lattice.json"), lattice.to_json())
    io.write_json(man.file("config.json"), cfg.to_json())
    man.write()
    final = dists[-1]
    print(f"t={final.time} variance={series.variance[-1]:.6g} argmax={final.argmax()} -> {out}")
    return EXIT_OK


def _load_configs(path: Path) -> list[ExperimentConfig]:
    doc = io.read_json(path)
    if isinstance(doc, dict) and "configs" in doc:
        doc = doc["configs"]
    items = doc if isinstance(doc, list) else [doc]
    configs = []
    for item in items:
        item = {k: v for k, v in item.items() if k != "label"}
        configs.append(ExperimentConfig.from_json(item))
    return configs


def _write_results(man: _Manifest, labelled, results) -> None:
    for (label, _), res in zip(labelled, results):
        man.add_config(res.config, label)
        io.write_distributions_csv(man.file(f"{label}_distributions.csv"), res.distributions)
        io.write_metrics_csv(man.file(f"{label}_metrics.csv"), res.series)
        io.write_json(man.file(f"{label}_result.json"), io.result_to_json(res))
    io.write_json(
        man.file("config.json"),
        {"configs": [dict(r.config.to_json(), label=lab) for (lab, _), r in zip(labelled, results)]},
    )


def cmd_experiment(args, argv) -> int:
    if args.config is not None:
        configs = _load_configs(args.config)
    else:
        configs = [_config_from_flags(args)]
    configs = [c if c.master_seed is not None else c.replace(master_seed=fresh_seed()) for c in configs]
    out = _outdir(args)
    man = _Manifest(out, argv)
    labelled = [(f"run{i:03d}", c) for i, c in enumerate(configs)]
    results = sweep(configs, threads=args.threads)
    _write_results(man, labelled, results)
    man.write()
    for (label, _), res in zip(labelled, results):
        s = res.series
        print(f"{label}: final variance={s.variance[-1]:.6g} p_esc={s.p_esc[-1]:.6g}")
    return EXIT_OK


def cmd_oracle(args, argv) -> int:
    cfg = _config_from_flags(args)
    rng = trial_rng(cfg.master_seed, 0)
    lattice = generate(cfg.extent(), cfg.p, [cfg.x0], rng, t_max=cfg.t_max, seed=cfg.master_seed)
    rhos = oracle.evolve_density(cfg, lattice, max_basis=args.max_basis)
    out = _outdir(args)
    man = _Manifest(out, argv)
    man.add_config(cfg)
    U = oracle.step_unitary(lattice)
    factor = (1.0 - 2.0 * cfg.p_d) ** 2
    steps, ok = [], True
    for t in range(1, len(rhos)):
        prev = rhos[t - 1]
        unitary_part = U @ (U @ prev).T
        unitary_part = unitary_part.T
        off = ~np.eye(prev.shape[0], dtype=bool)
        deviation = float(np.abs(rhos[t][off] - factor * unitary_part[off]).max(initial=0.0))
        diag_dev = float(np.abs(np.diag(rhos[t]) - np.diag(unitary_part)).max())
        big = np.abs(unitary_part[off]) > 1e-12
        ratios = rhos[t][off][big] / unitary_part[off][big]
        entry = {
            "t": t,
            "trace": float(np.trace(rhos[t])),
            "purity": float(np.sum(rhos[t] * rhos[t].T)),
            "min_eigenvalue": float(np.linalg.eigvalsh(rhos[t]).min()),
            "offdiag_max_deviation": deviation,
            "diag_max_deviation": diag_dev,
            "offdiag_ratio_min": float(ratios.min()) if ratios.size else None,
            "offdiag_ratio_max": float(ratios.max()) if ratios.size else None,
        }
        entry["pass"] = deviation < 1e-9 and diag_dev < 1e-9 and abs(entry["trace"] - 1) < 1e-9
        ok &= entry["pass"]
        steps.append(entry)
    report = {
        "p_d": cfg.p_d,
        "expected_offdiag_ratio": factor,
        "basis_size": int(rhos[0].shape[0]),
        "pure_throughout": bool(all(abs(s["purity"] - 1.0) < 1e-9 for s in steps)),
        "steps": steps,
        "pass": bool(ok),
    }
    dists = [oracle.density_distribution(r, cfg, t) for t, r in enumerate(rhos)]
    io.write_distributions_csv(man.file("oracle_diag.csv"), dists)
    io.write_json(man.file("oracle_report.json"), report)
    io.write_json(man.file("lattice.json"), lattice.to_json())
    man.write()
    print(
        f"oracle: m={report['basis_size']} expected ratio={factor:.6g} "
        f"pure={report['pure_throughout']} pass={report['pass']} -> {out}"
    )
    return EXIT_OK if ok else 1


def cmd_preset(args, argv) -> int:
    seed = fresh_seed() if args.seed is None else args.seed
    labelled = presets.PRESETS[args.name](trials=args.trials, seed=seed)
    out = _outdir(args)
    man = _Manifest(out, argv)
    man.doc["preset"] = args.name
    results = sweep([c for _, c in labelled], threads=args.threads)
    _write_results(man, labelled, results)
    if args.name in presets.GRID_PRESETS:
        rows = []
        for (label, cfg), res in zip(labelled, results):
            s = res.series
            rows.append((cfg.p, cfg.p_d, int(s.times[-1]), s.variance[-1], s.p_esc[-1], s.stderr_var[-1], s.stderr_pesc[-1]))
        path = man.file("summary.csv")
        with open(path, "w") as fh:
            fh.write("p,p_d,t,variance,p_esc,stderr_var,stderr_pesc\n")
            for r in rows:
                fh.write(",".join([repr(r[0]), repr(r[1]), str(r[2])] + [repr(float(v)) for v in r[3:]]) + "\n")
    man.write()
    print(f"preset {args.name}: {len(results)} runs -> {out}")
    return EXIT_OK


COMMANDS = {"evolve": cmd_evolve, "experiment": cmd_experiment, "oracle": cmd_oracle, "preset": cmd_preset}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args, argv)
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY
    except (ConfigError, PreconditionError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except QWalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
