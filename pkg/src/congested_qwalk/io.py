"""CSV and JSON serializers for distributions, metric series and ensemble results.

Column contracts:

* distributions: ``t,x,P`` (1D) or ``t,x,y,P`` (2D), one row per site per step
* metrics: ``t,variance,p_esc,stderr_var,stderr_pesc``, one row per step
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

import numpy as np

from .metrics import Distribution, MetricSeries

METRIC_COLUMNS = ["t", "variance", "p_esc", "stderr_var", "stderr_pesc"]


def distribution_columns(dim: int) -> list[str]:
    return ["t", "x", "P"] if dim == 1 else ["t", "x", "y", "P"]


def _fmt(v: float) -> str:
    return repr(float(v))


def write_distributions_csv(path: Path, dists: Iterable[Distribution]) -> Path:
    dists = list(dists)
    dim = dists[0].dim
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(distribution_columns(dim))
        for d in dists:
            axes = d.axes()
            if dim == 1:
                for x, pr in zip(axes[0], d.probs):
                    w.writerow([d.time, int(x), _fmt(pr)])
            else:
                for i, x in enumerate(axes[0]):
                    for j, y in enumerate(axes[1]):
                        w.writerow([d.time, int(x), int(y), _fmt(d.probs[i, j])])
    return path


def read_distributions_csv(path: Path) -> dict[int, dict[tuple[int, ...], float]]:
    out: dict[int, dict[tuple[int, ...], float]] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            pos = (int(row["x"]),) if "y" not in row else (int(row["x"]), int(row["y"]))
            out.setdefault(int(row["t"]), {})[pos] = float(row["P"])
    return out


def write_metrics_csv(path: Path, series: MetricSeries) -> Path:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(METRIC_COLUMNS)
        for t, *vals in series.rows():
            w.writerow([t, *(_fmt(v) for v in vals)])
    return path


def series_to_json(series: MetricSeries) -> dict:
    def clean(a):
        return [None if not np.isfinite(v) else float(v) for v in a]

    return {
        "t": [int(t) for t in series.times],
        "variance": clean(series.variance),
        "p_esc": clean(series.p_esc),
        "stderr_var": clean(series.stderr_var),
        "stderr_pesc": clean(series.stderr_pesc),
        "metadata": series.metadata,
    }


def result_to_json(result) -> dict:
    final = result.final
    return {
        "config": result.config.to_json(),
        "series": series_to_json(result.series),
        "final_distribution": {
            "t": final.time,
            "extent": [list(e) for e in final.extent],
            "probs": final.probs.tolist(),
        },
    }


def write_json(path: Path, obj) -> Path:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_json(path: Path):
    with open(path) as fh:
        return json.load(fh)
