"""Experiment reports and their JSON / CSV serialisation."""

from __future__ import annotations

import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np


def _mean_std(xs):
    xs = np.asarray(xs, dtype=float)
    if xs.size == 0:
        return None, None
    std = float(xs.std(ddof=1)) if xs.size > 1 else 0.0
    return float(xs.mean()), std


def _plain(obj):
    """Recursively convert numpy scalars/arrays and dict keys to JSON types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        value = float(obj)
        return value if np.isfinite(value) else None
    return obj


@dataclass
class ExperimentReport:
    """Per-run records plus aggregates.

    Each record is a dict with at least ``run``, ``seed`` and ``damages``
    (``{strategy: {budget: damage}}``).  Pipeline runs add ``phase2_feasible``,
    ``restored_feasible``, ``converged``, ``gap``, ``iterations``,
    ``original_objective``, ``released_objective``, ``values`` and ``sites``
    (each ``{"original": [...], "released": [...]}``).
    """

    meta: dict = field(default_factory=dict)
    records: list = field(default_factory=list)

    @property
    def runs(self):
        return len(self.records)

    def damages(self, strategy, budget):
        return [r["damages"][strategy][budget] for r in self.records]

    def _rate(self, key):
        flags = [bool(r[key]) for r in self.records if key in r]
        return sum(flags) / len(flags) if flags else None

    @property
    def feasibility_rate(self):
        """Share of runs whose noisy network admitted a feasible solution."""
        return self._rate("phase2_feasible")

    @property
    def restored_feasibility_rate(self):
        return self._rate("restored_feasible")

    @property
    def convergence_rate(self):
        return self._rate("converged")

    def aggregates(self):
        out = {"runs": self.runs, "damage": {}}
        for strategy in self.meta.get("strategies", []):
            out["damage"][strategy] = {}
            for b in self.meta.get("budgets", []):
                mean, std = _mean_std(self.damages(strategy, b))
                out["damage"][strategy][b] = {"mean": mean, "std": std, "count": self.runs}
        out["feasibility_rate"] = self.feasibility_rate
        out["restored_feasibility_rate"] = self.restored_feasibility_rate
        out["convergence_rate"] = self.convergence_rate
        gaps = [r["gap"] for r in self.records if "gap" in r]
        out["gap"] = dict(zip(("mean", "std"), _mean_std(gaps)))
        return out

    def to_dict(self):
        return _plain({"meta": self.meta, "aggregates": self.aggregates(), "records": self.records})

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _fmt(x):
    return "" if x is None else repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def emit_report(report, out_dir):
    """Write ``report.json`` and flat CSV series into ``out_dir`` (overwriting).

    Series files:

    ``runs.csv``       one row per run: feasibility flags, gap, objectives
    ``damages.csv``    one row per run: one column per strategy and budget
    ``values.csv``     one row per run and element: original vs released value
    ``sites.csv``      one row per run and site: original vs released site total

    Returns the list of written paths.
    """
    os.makedirs(out_dir, exist_ok=True)
    data = report.to_dict()
    records = data["records"]
    paths = []

    path = os.path.join(out_dir, "report.json")
    with open(path, "w") as fh:
        fh.write(report.to_json())
    paths.append(path)

    cols = ["phase2_feasible", "restored_feasible", "converged", "gap", "iterations",
            "original_objective", "released_objective"]
    path = os.path.join(out_dir, "runs.csv")
    _write_csv(path, ["run", "seed"] + cols,
               [[r["run"], r["seed"]] + [_fmt(r.get(c)) for c in cols] for r in records])
    paths.append(path)

    strategies = [str(s) for s in data["meta"].get("strategies", [])]
    budgets = [str(b) for b in data["meta"].get("budgets", [])]
    combos = [(s, b) for s in strategies for b in budgets]
    path = os.path.join(out_dir, "damages.csv")
    _write_csv(path, ["run", "seed"] + [f"{s}_b{b}" for s, b in combos],
               [[r["run"], r["seed"]] + [_fmt(r["damages"][s][b]) for s, b in combos] for r in records])
    paths.append(path)

    for name, key in (("values.csv", "element"), ("sites.csv", "site")):
        series = "values" if key == "element" else "sites"
        rows = []
        for r in records:
            if series in r:
                pair = r[series]
                for idx, (a, b) in enumerate(zip(pair["original"], pair["released"])):
                    rows.append([r["run"], idx, _fmt(a), _fmt(b)])
        path = os.path.join(out_dir, name)
        _write_csv(path, ["run", key, "original", "released"], rows)
        paths.append(path)
    return paths
