"""Line-oriented run-log files.

A log starts with ``# key: value`` header lines holding the full run
configuration and outcome, followed by a tab-separated ``evals best`` table
with one improvement event per line. Floats are written with ``repr`` so
they round-trip exactly.
"""

from __future__ import annotations

import math
import os
from pathlib import Path

import numpy as np

from .analytics import RunLog

MAGIC = "# pcga run log v1"

_INT_KEYS = {"problem", "n", "cell", "run", "seed", "mu", "lambda", "budget", "final_evals"}
_FLOAT_KEYS = {"p_c", "target", "best", "beta"}


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    if value is None:
        return "none"
    return str(value)


def format_log(log: RunLog) -> str:
    header = dict(log.meta)
    header.update(
        budget=log.budget,
        target=float(log.target),
        final_evals=log.final_evals,
        hit_target=bool(log.hit_target),
        cause=log.cause,
        best=log.final_best,
    )
    lines = [MAGIC]
    lines += [f"# {k}: {_fmt(v)}" for k, v in header.items()]
    lines.append("evals\tbest")
    lines += [f"{int(e)}\t{_fmt(float(b))}" for e, b in zip(log.evals, log.best)]
    return "\n".join(lines) + "\n"


def write_log(path: Path, log: RunLog) -> None:
    """Write atomically: a log file either exists complete or not at all."""
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(format_log(log))
    os.replace(tmp, path)


def _parse_value(key: str, text: str):
    if text == "none":
        return None
    if key in _INT_KEYS:
        return int(text)
    if key in _FLOAT_KEYS:
        return float(text)
    if key in ("hit_target", "inherit_clone_fitness"):
        return text == "1"
    if key == "mutation_rate":
        return float(text)
    return text


def parse_log(text: str) -> RunLog:
    lines = text.splitlines()
    if not lines or lines[0] != MAGIC:
        raise ValueError("not a pcga run log")
    meta = {}
    i = 1
    while i < len(lines) and lines[i].startswith("# "):
        key, _, value = lines[i][2:].partition(": ")
        meta[key] = _parse_value(key, value)
        i += 1
    if i >= len(lines) or lines[i] != "evals\tbest":
        raise ValueError("run log is missing its event table")
    evals, best = [], []
    for line in lines[i + 1:]:
        e, b = line.split("\t")
        evals.append(int(e))
        best.append(float(b))
    outcome = {k: meta.pop(k) for k in ("budget", "target", "final_evals", "hit_target", "cause", "best")}
    return RunLog(
        evals=np.array(evals, dtype=np.int64),
        best=np.array(best, dtype=float),
        final_evals=outcome["final_evals"],
        budget=outcome["budget"],
        hit_target=outcome["hit_target"],
        target=outcome["target"],
        cause=outcome["cause"],
        meta=meta,
    )


def read_log(path: Path) -> RunLog:
    return parse_log(Path(path).read_text())
