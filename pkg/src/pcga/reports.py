"""Plot-ready tables computed from a directory of run logs.

Every report is comma-separated text with a single header line. Missing
data is never silently dropped: cells listed in the manifest whose logs are
absent or incomplete appear with ``NA`` in every statistic and status
``incomplete``. Infinite ERTs are written as ``inf``; configurations that
failed every run are marked ``failed`` in normalized tables.

Column schemas
--------------
ert-table
    problem, n, mu, lambda, p_c, mutation, crossover, scheme, target,
    runs, successes, success_rate, ert, ert_over_n2, status
normalized-heatmap-data
    problem, n, mu, lambda, p_c, mutation, crossover, scheme, target,
    ert, normalized_ert, status   (normalized_ert capped at 40)
fixed-target
    problem, n, mu, lambda, p_c, mutation, crossover, scheme, target,
    mean_evals, gradient          (gradient is NA on the first target)
pc-star-table
    problem, lambda_rule, mutation, crossover, scheme, n, then one
    ``mu=<k>`` column per population size holding p_c* (``none`` if all
    probed values failed, NA if data is missing)
mutation-comparison
    problem, n, mu, lambda, p_c, crossover, scheme, target, ert_sbm,
    ert_fast, relative_ert, marker   (relative_ert bounded to [-1, 1])
"""

from __future__ import annotations

import csv
import io
import math
from collections import defaultdict
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .analytics import best_pc, compute_ert, curve_gradient, fixed_target_curve, normalize_ert, relative_ert, select_targets
from .experiment import LOG_DIR, read_manifest
from .logfiles import read_log

KINDS = ("ert-table", "normalized-heatmap-data", "fixed-target", "pc-star-table", "mutation-comparison")
NA = "NA"

ALG_FIELDS = ("mu", "lambda", "p_c", "mutation", "crossover", "scheme")


@dataclass
class LogSet:
    """All logs of an experiment grouped by grid cell."""

    cells: dict = field(default_factory=dict)  # cell index -> metadata dict
    logs: dict = field(default_factory=lambda: defaultdict(list))  # cell index -> [RunLog]
    runs_expected: int | None = None

    def complete(self, cell: int) -> bool:
        if self.runs_expected is None:
            return bool(self.logs.get(cell))
        return len(self.logs.get(cell, ())) == self.runs_expected

    @property
    def incomplete_cells(self) -> list:
        return [c for c in sorted(self.cells) if not self.complete(c)]

    def problems(self) -> list:
        return sorted({(m["problem"], m["n"]) for m in self.cells.values()})


def _alg_key(meta: dict) -> tuple:
    return tuple(meta[f] for f in ALG_FIELDS)


def load_logs(root, check: bool = True) -> LogSet:
    """Read ``root/logs/*.log``; the manifest, if present, lists expected cells.

    With ``check`` every log is verified against the run-log invariants
    (AssertionError on violation).
    """
    root = Path(root)
    log_dir = root / LOG_DIR if (root / LOG_DIR).is_dir() else root
    out = LogSet()
    manifest = read_manifest(root)
    if manifest is not None:
        out.runs_expected = manifest["runs_per_cell"]
        for key, entry in manifest["cells"].items():
            out.cells[int(key)] = {k: entry[k] for k in ("problem", "n", "lambda_rule", *ALG_FIELDS)}
    for path in sorted(log_dir.glob("*.log")):
        log = read_log(path)
        if check:
            log.check()
        cell = log.meta["cell"]
        out.logs[cell].append(log)
        if cell not in out.cells:
            out.cells[cell] = {k: log.meta[k] for k in ("problem", "n", "lambda_rule", *ALG_FIELDS)}
    for logs in out.logs.values():
        logs.sort(key=lambda lg: lg.meta["run"])
    return out


def _fmt(x) -> str:
    if x is None:
        return NA
    if isinstance(x, float):
        if math.isnan(x):
            return NA
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x:.10g}"
    return str(x)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def read_targets(path) -> dict:
    """Read a ``problem,n,target`` CSV into {(problem, n): target}."""
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {(int(r["problem"]), int(r["n"])): float(r["target"]) for r in rows}


def compute_targets(data: LogSet, q: float = 2.0) -> dict:
    """Per (problem, n): max over algorithms of the q-th percentile of final best values."""
    best: dict = defaultdict(dict)
    for cell, logs in data.logs.items():
        if not logs:
            continue
        meta = data.cells[cell]
        best[(meta["problem"], meta["n"])][_alg_key(meta)] = [lg.final_best for lg in logs]
    return select_targets(best, q)


def targets_csv(targets: dict) -> str:
    return _csv(("problem", "n", "target"), [(p, n, float(t)) for (p, n), t in sorted(targets.items())])


def _cell_targets(data: LogSet, targets: dict | None) -> dict:
    """Target per cell: explicit table, else the run's stop target, else selected from the data."""
    chosen = {}
    auto = None
    for cell, meta in data.cells.items():
        key = (meta["problem"], meta["n"])
        if targets is not None and key in targets:
            chosen[cell] = targets[key]
            continue
        logs = data.logs.get(cell)
        stop = logs[0].target if logs else math.inf
        if math.isfinite(stop):
            chosen[cell] = stop
            continue
        if auto is None:
            auto = compute_targets(data)
        chosen[cell] = auto.get(key, math.nan)
    return chosen


def _ert_rows(data: LogSet, targets: dict | None):
    tg = _cell_targets(data, targets)
    for cell in sorted(data.cells):
        meta = data.cells[cell]
        base = (meta["problem"], meta["n"], *_alg_key(meta), tg[cell])
        if not data.complete(cell) or math.isnan(tg[cell]):
            yield cell, base, None
            continue
        logs = data.logs[cell]
        ert, rate = compute_ert(logs, tg[cell])
        yield cell, base, (len(logs), round(rate * len(logs)), rate, ert)


def ert_table(data: LogSet, targets: dict | None = None) -> str:
    header = ("problem", "n", *ALG_FIELDS, "target", "runs", "successes", "success_rate", "ert", "ert_over_n2", "status")
    rows = []
    for _, base, stats in _ert_rows(data, targets):
        if stats is None:
            rows.append((*base, None, None, None, None, None, "incomplete"))
            continue
        runs, hits, rate, ert = stats
        n = base[1]
        rows.append((*base, runs, hits, rate, ert, ert / (n * n), "ok" if hits else "failed"))
    return _csv(header, rows)


def normalized_heatmap(data: LogSet, targets: dict | None = None) -> str:
    header = ("problem", "n", *ALG_FIELDS, "target", "ert", "normalized_ert", "status")
    per_problem: dict = defaultdict(dict)
    info = {}
    for cell, base, stats in _ert_rows(data, targets):
        info[cell] = (base, stats)
        if stats is not None:
            per_problem[base[:2]][cell] = stats[3]
    normalized = normalize_ert(per_problem)
    rows = []
    for cell in sorted(info):
        base, stats = info[cell]
        if stats is None:
            rows.append((*base, None, None, "incomplete"))
            continue
        value = normalized[base[:2]][cell]
        rows.append((*base, stats[3], value, "failed" if math.isnan(value) else "ok"))
    return _csv(header, rows)


def _target_grid(data: LogSet, cells) -> np.ndarray:
    """Integer grid 0..max when fitness values are integral, else all observed values."""
    values = np.unique(np.concatenate([lg.best for c in cells for lg in data.logs.get(c, ())] or [np.zeros(0)]))
    if values.size == 0:
        return values
    if np.all(values == np.round(values)):
        return np.arange(0, int(values.max()) + 1, dtype=float)
    return values


def fixed_target(data: LogSet, targets: list | None = None) -> str:
    header = ("problem", "n", *ALG_FIELDS, "target", "mean_evals", "gradient")
    by_problem: dict = defaultdict(list)
    for cell, meta in data.cells.items():
        by_problem[(meta["problem"], meta["n"])].append(cell)
    rows = []
    for key in sorted(by_problem):
        cells = sorted(by_problem[key])
        grid = np.asarray(targets, dtype=float) if targets is not None else _target_grid(data, cells)
        for cell in cells:
            meta = data.cells[cell]
            alg = _alg_key(meta)
            if not data.complete(cell):
                rows += [(*key, *alg, float(t), None, None) for t in grid]
                continue
            curve = fixed_target_curve(data.logs[cell], grid)
            grad = curve_gradient(curve)
            for j, t in enumerate(grid):
                rows.append((*key, *alg, float(t), float(curve[j]), float(grad[j - 1]) if j else None))
    return _csv(header, rows)


def pc_star_table(data: LogSet, targets: dict | None = None) -> str:
    groups: dict = defaultdict(lambda: defaultdict(dict))
    gaps: set = set()
    mus = sorted({m["mu"] for m in data.cells.values()})
    for cell, base, stats in _ert_rows(data, targets):
        meta = data.cells[cell]
        group = (meta["problem"], meta["lambda_rule"], meta["mutation"], meta["crossover"], meta["scheme"], meta["n"])
        if stats is None:
            gaps.add((group, meta["mu"]))
            continue
        groups[group][meta["mu"]][meta["p_c"]] = stats[3]
    for group, _ in gaps:
        groups.setdefault(group, defaultdict(dict))
    rows = []
    for group in sorted(groups):
        row = list(group)
        for mu in mus:
            ert_by_pc = groups[group].get(mu)
            if (group, mu) in gaps or not ert_by_pc or len(ert_by_pc) < 2:
                row.append(None)
                continue
            pc = best_pc(ert_by_pc)
            row.append("none" if pc is None else float(pc))
        rows.append(row)
    header = ("problem", "lambda_rule", "mutation", "crossover", "scheme", "n", *(f"mu={m}" for m in mus))
    return _csv(header, rows)


def mutation_comparison(data: LogSet, targets: dict | None = None) -> str:
    header = ("problem", "n", "mu", "lambda", "p_c", "crossover", "scheme", "target",
              "ert_sbm", "ert_fast", "relative_ert", "marker")
    pairs: dict = defaultdict(dict)
    for cell, base, stats in _ert_rows(data, targets):
        meta = data.cells[cell]
        key = (meta["problem"], meta["n"], meta["mu"], meta["lambda"], meta["p_c"],
               meta["crossover"], meta["scheme"], base[-1])
        pairs[key][meta["mutation"]] = None if stats is None else stats[3]
    rows = []
    for key in sorted(pairs):
        sbm = pairs[key].get("sbm")
        fast = pairs[key].get("fast")
        if sbm is None or fast is None:
            rows.append((*key, sbm, fast, None, "incomplete"))
            continue
        value, marker = relative_ert(fast, sbm)
        rows.append((*key, sbm, fast, value, marker or "ok"))
    return _csv(header, rows)


def report(data: LogSet, kind: str, targets: dict | None = None) -> str:
    if kind == "ert-table":
        return ert_table(data, targets)
    if kind == "normalized-heatmap-data":
        return normalized_heatmap(data, targets)
    if kind == "fixed-target":
        return fixed_target(data)
    if kind == "pc-star-table":
        return pc_star_table(data, targets)
    if kind == "mutation-comparison":
        return mutation_comparison(data, targets)
    raise ValueError(f"unknown report kind {kind!r}; choose from {', '.join(KINDS)}")
