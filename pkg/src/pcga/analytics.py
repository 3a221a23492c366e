"""Run logs and the statistics computed from them.

ERT follows the usual benchmarking definition: evaluations spent by all
runs (the full budget for runs that miss the target) divided by the number
of runs that hit it. Fixed-target curves charge unsuccessful runs the full
budget as well, so the last point of a curve times the number of runs is
exactly the ERT numerator.
"""

from __future__ import annotations

import math
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np

ERT_CAP = 40.0


@dataclass
class RunLog:
    """Improvement events of one run.

    ``evals[i]`` is the evaluation count at which the best-so-far fitness
    first became ``best[i]``; both arrays are strictly increasing. ``target``
    is the fitness at which the run was stopped (``inf`` if it ran to the end
    of its budget).
    """

    evals: np.ndarray
    best: np.ndarray
    final_evals: int
    budget: int
    hit_target: bool
    target: float = math.inf
    cause: str = "budget"
    meta: dict = field(default_factory=dict)
    trace_evals: np.ndarray | None = None
    trace_fitness: np.ndarray | None = None
    generation_best: np.ndarray | None = None

    def __post_init__(self):
        self.evals = np.asarray(self.evals, dtype=np.int64)
        self.best = np.asarray(self.best, dtype=float)

    @property
    def final_best(self) -> float:
        return float(self.best[-1]) if self.best.size else -math.inf

    def hitting_time(self, target: float) -> int | None:
        """Evaluation at which a fitness >= ``target`` was first seen."""
        i = int(np.searchsorted(self.best, target, side="left"))
        if i < self.best.size:
            return int(self.evals[i])
        if self.hit_target and target > self.target:
            raise ValueError(
                f"run stopped at target {self.target}; cannot tell when it would reach {target}"
            )
        return None

    def cost(self, target: float) -> tuple[int, bool]:
        """Evaluations charged for ``target`` and whether it was reached."""
        t = self.hitting_time(target)
        if t is None:
            return self.budget, False
        return t, True

    def check(self) -> None:
        """Raise AssertionError if the log violates its invariants."""
        assert self.evals.shape == self.best.shape
        assert np.all(np.diff(self.evals) > 0), "event evaluation counts must increase"
        assert np.all(np.diff(self.best) > 0), "event fitness values must increase"
        assert self.final_evals <= self.budget, "run exceeded its budget"
        if self.evals.size:
            assert self.evals[-1] <= self.final_evals


def compute_ert(logs: Sequence[RunLog], target: float) -> tuple[float, float]:
    """Return ``(ert, success_rate)``; ERT is ``inf`` without successes."""
    if not logs:
        raise ValueError("ERT needs at least one run")
    total = 0
    hits = 0
    for log in logs:
        cost, hit = log.cost(target)
        total += cost
        hits += hit
    rate = hits / len(logs)
    return (total / hits if hits else math.inf), rate


def percentile_nearest_rank(values: Iterable[float], q: float) -> float:
    """Nearest-rank percentile: the ceil(q/100 * N)-th smallest value."""
    ordered = sorted(values)
    if not ordered:
        raise ValueError("percentile of an empty sample")
    if not 0 < q <= 100:
        raise ValueError(f"percentile must lie in (0, 100], got {q}")
    rank = max(1, math.ceil(q / 100.0 * len(ordered) - 1e-12))
    return ordered[rank - 1]


def select_targets(best_values: Mapping, q: float = 2.0) -> dict:
    """Pick one ERT target per problem.

    ``best_values`` maps problem -> algorithm -> final best fitness of each
    run. For every algorithm take the ``q``-th percentile of its sample; the
    target is the largest of these over algorithms.
    """
    targets = {}
    for problem, per_alg in best_values.items():
        if not per_alg:
            raise ValueError(f"no algorithms for problem {problem!r}")
        targets[problem] = max(percentile_nearest_rank(v, q) for v in per_alg.values())
    return targets


@dataclass(frozen=True)
class ErtEntry:
    ert: float
    success_rate: float
    runs: int


class ErtTable:
    """ERT and success rate per (algorithm, problem, target)."""

    def __init__(self):
        self.entries: dict[tuple, ErtEntry] = {}

    def add(self, algorithm, problem, target: float, logs: Sequence[RunLog]) -> ErtEntry:
        ert, rate = compute_ert(logs, target)
        entry = ErtEntry(ert, rate, len(logs))
        self.entries[(algorithm, problem, target)] = entry
        return entry

    def __getitem__(self, key) -> ErtEntry:
        return self.entries[key]

    def __iter__(self):
        return iter(self.entries.items())

    def __len__(self) -> int:
        return len(self.entries)

    def by_problem(self) -> dict:
        """problem -> algorithm -> ERT."""
        out: dict = {}
        for (alg, prob, _), entry in self.entries.items():
            out.setdefault(prob, {})[alg] = entry.ert
        return out


def normalize_ert(table: ErtTable | Mapping, cap: float = ERT_CAP) -> dict:
    """Divide each ERT by the best ERT on its problem, capped at ``cap``.

    Accepts an :class:`ErtTable` or a mapping problem -> algorithm -> ERT.
    Configurations that never hit the target get NaN; a problem nobody
    solved is all NaN.
    """
    erts = table.by_problem() if isinstance(table, ErtTable) else table
    out = {}
    for problem, per_alg in erts.items():
        finite = [v for v in per_alg.values() if math.isfinite(v)]
        best = min(finite) if finite else None
        out[problem] = {
            alg: (min(v / best, cap) if best is not None and math.isfinite(v) else math.nan)
            for alg, v in per_alg.items()
        }
    return out


def relative_ert(ert_fast: float, ert_sbm: float, bound: float = 1.0) -> tuple[float, str]:
    """``(ERT_fast - ERT_sbm) / ERT_sbm`` clipped to ``[-bound, bound]``.

    The second element names which operator failed everywhere ("" if
    neither); the value is NaN whenever one of them failed.
    """
    fast_ok = math.isfinite(ert_fast)
    sbm_ok = math.isfinite(ert_sbm)
    if fast_ok and sbm_ok:
        return max(-bound, min(bound, (ert_fast - ert_sbm) / ert_sbm)), ""
    if sbm_ok:
        return math.nan, "fast-failed"
    if fast_ok:
        return math.nan, "sbm-failed"
    return math.nan, "both-failed"


def fixed_target_curve(logs: Sequence[RunLog], targets: Sequence[float]) -> np.ndarray:
    """Mean first-hitting evaluation count for each target.

    Runs that never reach a target are charged their full budget.
    """
    if not logs:
        raise ValueError("fixed-target curve needs at least one run")
    curve = np.empty(len(targets))
    for j, t in enumerate(targets):
        curve[j] = sum(log.cost(t)[0] for log in logs) / len(logs)
    return curve


def curve_gradient(curve: Sequence[float]) -> np.ndarray:
    """Finite differences ``curve[i] - curve[i-1]`` (aligned with targets[1:])."""
    return np.diff(np.asarray(curve, dtype=float))


def best_pc(ert_by_pc: Mapping[float, float]) -> float | None:
    """Crossover probability with the smallest ERT; ties go to the smaller p_c.

    Returns None when every probed value failed.
    """
    if len(ert_by_pc) < 2:
        raise ValueError("need at least two probed crossover probabilities")
    finite = [(ert, pc) for pc, ert in ert_by_pc.items() if math.isfinite(ert)]
    if not finite:
        return None
    return min(finite)[1]


def runtime_summary(logs: Sequence[RunLog], target: float) -> dict:
    """Mean, standard deviation and success count of hitting times."""
    times = [t for t in (log.hitting_time(target) for log in logs) if t is not None]
    arr = np.asarray(times, dtype=float)
    return {
        "runs": len(logs),
        "successes": len(times),
        "mean": float(arr.mean()) if times else math.nan,
        "std": float(arr.std(ddof=1)) if len(times) > 1 else math.nan,
    }
