"""Declarative experiment grids and their resumable execution.

An experiment spec lists problems and dimensions plus sets of GA
parameters; :func:`expand_grid` takes the Cartesian product in a fixed
order and numbers the cells. Every run's seed is derived from
``(master_seed, cell, run)``, so results never depend on scheduling order
or worker count.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from functools import lru_cache
from pathlib import Path

import yaml

from . import __version__
from .core import Budget, ConfigurationError
from .engine import GaConfig, run_ga
from .logfiles import write_log
from .problems import catalog_version, check_dimension, make_problem, reference_target
from .rng import RngStream, derive_seed

log = logging.getLogger(__name__)

WORKERS_ENV = "PCGA_WORKERS"
MANIFEST = "manifest.json"
LOG_DIR = "logs"

LAMBDA_RULES = ("1", "half", "mu")
PC_GRID = tuple(round(0.1 * k, 1) for k in range(10)) + (0.95,)
MU_GRID = (2, 3, 5, 8, 10, 20, 30, 40, 50, 60, 70, 80, 90, 100)


class ManifestMismatch(RuntimeError):
    """The output directory belongs to a different experiment spec."""


@dataclass(frozen=True)
class ExperimentSpec:
    problems: tuple  # ((fid, (n, ...)), ...)
    mu: tuple
    lam: tuple = ("1",)  # entries: "1", "half", "mu", or absolute ints
    p_c: tuple = (0.5,)
    mutation: tuple = ("sbm",)
    crossover: tuple = ("uniform",)
    scheme: tuple = ("offspring",)
    runs: int = 100
    budget_factor: float = 100.0
    master_seed: int = 0
    target: object = "optimum"  # "optimum", "reference", "none" or a number
    name: str = "experiment"
    # p_c = 0 never uses crossover or the scheme, so keep only the first such variant
    collapse_mutation_only: bool = False
    inherit_clone_fitness: bool = True

    def __post_init__(self):
        if self.runs < 1:
            raise ConfigurationError("an experiment needs at least one run per cell")
        if self.budget_factor <= 0:
            raise ConfigurationError("budget factor must be positive")
        for rule in self.lam:
            if str(rule) not in LAMBDA_RULES and not (isinstance(rule, int) and rule >= 1):
                raise ConfigurationError(f"lambda entry {rule!r} is neither a rule {LAMBDA_RULES} nor a positive int")
        if not (self.target in ("optimum", "reference", "none") or isinstance(self.target, (int, float))):
            raise ConfigurationError(f"unknown target mode {self.target!r}")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentSpec:
        data = dict(data)
        problems = []
        for entry in data.pop("problems"):
            dims = entry.get("dims", entry.get("n"))
            dims = (dims,) if isinstance(dims, int) else tuple(dims)
            problems.append((int(entry["id"]), tuple(int(d) for d in dims)))
        grid = data.pop("grid", {})
        kwargs = {
            "problems": tuple(problems),
            "mu": tuple(int(m) for m in grid.get("mu", data.pop("mu", ()))),
            "lam": tuple(_lambda_entry(v) for v in grid.get("lambda", ("1",))),
            "p_c": tuple(float(p) for p in grid.get("p_c", (0.5,))),
            "mutation": tuple(grid.get("mutation", ("sbm",))),
            "crossover": tuple(grid.get("crossover", ("uniform",))),
            "scheme": tuple(grid.get("scheme", ("offspring",))),
        }
        for key in ("runs", "budget_factor", "master_seed", "target", "name", "collapse_mutation_only", "inherit_clone_fitness"):
            if key in data:
                kwargs[key] = data.pop(key)
        unknown = set(data) - {"description"}
        if unknown:
            raise ConfigurationError(f"unknown spec keys: {sorted(unknown)}")
        if not kwargs["mu"]:
            raise ConfigurationError("spec must list at least one mu")
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> ExperimentSpec:
        with open(path) as fh:
            return cls.from_dict(yaml.safe_load(fh))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "problems": [{"id": fid, "dims": list(dims)} for fid, dims in self.problems],
            "grid": {
                "mu": list(self.mu),
                "lambda": [r if isinstance(r, int) else str(r) for r in self.lam],
                "p_c": list(self.p_c),
                "mutation": list(self.mutation),
                "crossover": list(self.crossover),
                "scheme": list(self.scheme),
            },
            "runs": self.runs,
            "budget_factor": self.budget_factor,
            "master_seed": self.master_seed,
            "target": self.target,
            "collapse_mutation_only": self.collapse_mutation_only,
            "inherit_clone_fitness": self.inherit_clone_fitness,
        }

    def digest(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _lambda_entry(value):
    if isinstance(value, int) and not isinstance(value, bool):
        return "1" if value == 1 else value
    text = str(value)
    return text if text in LAMBDA_RULES else int(text)


def resolve_lambda(rule, mu: int) -> int:
    if rule == "1":
        return 1
    if rule == "half":
        return math.ceil(mu / 2)
    if rule == "mu":
        return mu
    return int(rule)


@dataclass(frozen=True)
class Cell:
    index: int
    fid: int
    n: int
    config: GaConfig
    lambda_rule: str
    budget: int
    target: float

    def key(self) -> dict:
        return {
            "cell": self.index, "problem": self.fid, "n": self.n,
            "mu": self.config.mu, "lambda": self.config.lam, "lambda_rule": self.lambda_rule,
            "p_c": self.config.p_c, "mutation": self.config.mutation,
            "crossover": self.config.crossover, "scheme": self.config.scheme,
        }


@dataclass(frozen=True)
class Job:
    cell: Cell
    run: int
    seed: int

    @property
    def filename(self) -> str:
        return f"c{self.cell.index:05d}_r{self.run:03d}.log"


@dataclass
class Grid:
    spec: ExperimentSpec
    cells: list = field(default_factory=list)
    skipped: list = field(default_factory=list)

    def jobs(self) -> list:
        return [
            Job(cell, run, derive_seed(self.spec.master_seed, cell.index, run))
            for cell in self.cells
            for run in range(self.spec.runs)
        ]

    def __iter__(self):
        return iter(self.jobs())

    def __len__(self) -> int:
        return len(self.cells) * self.spec.runs


def _cell_target(spec: ExperimentSpec, fid: int, n: int) -> float:
    if spec.target == "none":
        return math.inf
    if spec.target == "reference":
        return reference_target(fid)
    if spec.target == "optimum":
        opt = make_problem(fid, n).optimum
        return math.inf if opt is None else opt
    return float(spec.target)


def expand_grid(spec: ExperimentSpec) -> Grid:
    """Expand a spec into numbered cells; invalid combinations are skipped.

    Cell indices count skipped combinations too, so adding an invalid
    dimension never shifts the seeds of valid cells.
    """
    grid = Grid(spec)
    index = 0
    for fid, dims in spec.problems:
        for n in dims:
            try:
                check_dimension(fid, n)
                target = _cell_target(spec, fid, n)
                dim_error = None
            except ConfigurationError as exc:
                dim_error = str(exc)
            budget = max(1, int(round(spec.budget_factor * n * n)))
            for mu in spec.mu:
                for rule in spec.lam:
                    lam = resolve_lambda(rule, mu)
                    for p_c in spec.p_c:
                        for mutation in spec.mutation:
                            for crossover in spec.crossover:
                                for scheme in spec.scheme:
                                    reason = dim_error
                                    cfg = None
                                    if reason is None and spec.collapse_mutation_only and p_c == 0 and (
                                        crossover != spec.crossover[0] or scheme != spec.scheme[0]
                                    ):
                                        reason = "duplicate of a mutation-only cell"
                                    if reason is None:
                                        try:
                                            cfg = GaConfig(mu, lam, p_c, mutation, crossover, scheme,
                                                           inherit_clone_fitness=spec.inherit_clone_fitness)
                                            cfg.mutation_operator(n)
                                            if budget < mu:
                                                raise ConfigurationError(f"budget {budget} below mu={mu}")
                                        except (ConfigurationError, ValueError) as exc:
                                            reason = str(exc)
                                    if reason is not None:
                                        grid.skipped.append({
                                            "cell": index, "problem": fid, "n": n, "mu": mu,
                                            "lambda": lam, "p_c": p_c, "mutation": mutation,
                                            "crossover": crossover, "scheme": scheme, "reason": reason,
                                        })
                                        log.debug("skipping cell %d: %s", index, reason)
                                    else:
                                        grid.cells.append(Cell(index, fid, n, cfg, str(rule), budget, target))
                                    index += 1
    if grid.skipped:
        reasons = sorted({s["reason"] for s in grid.skipped})
        log.warning("skipped %d of %d cells: %s", len(grid.skipped), index, "; ".join(reasons))
    return grid


@lru_cache(maxsize=64)
def _problem(fid: int, n: int):
    return make_problem(fid, n)


def execute_job(job: Job):
    """Run one job and return its log (problem instances are cached per process)."""
    cell = job.cell
    problem = _problem(cell.fid, cell.n)
    result = run_ga(cell.config, problem, Budget(cell.budget), cell.target, RngStream(job.seed))
    result.log.meta = {
        **cell.key(),
        "run": job.run,
        "seed": job.seed,
        "mutation_rate": cell.config.mutation_rate,
        "beta": cell.config.beta,
        "inherit_clone_fitness": cell.config.inherit_clone_fitness,
    }
    return result.log


def _run_and_write(args):
    job, path = args
    try:
        write_log(path, execute_job(job))
        return job.cell.index, None
    except Exception as exc:  # noqa: BLE001 - recorded in the manifest
        return job.cell.index, f"{type(exc).__name__}: {exc}"


def worker_count(requested: int | None = None) -> int:
    if requested is not None:
        return max(1, requested)
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else 1


def _write_manifest(out: Path, manifest: dict) -> None:
    tmp = out / (MANIFEST + ".tmp")
    tmp.write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")
    os.replace(tmp, out / MANIFEST)


def read_manifest(out) -> dict | None:
    path = Path(out) / MANIFEST
    if not path.exists():
        return None
    return json.loads(path.read_text())


def run_experiment(spec: ExperimentSpec, out_dir, workers: int | None = None) -> Path:
    """Execute every missing job of ``spec`` under ``out_dir``.

    Existing log files are kept, so an interrupted experiment resumes where
    it stopped. Refuses to touch a directory created for a different spec.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    logs = out / LOG_DIR
    logs.mkdir(exist_ok=True)
    digest = spec.digest()
    previous = read_manifest(out)
    if previous is not None and previous.get("spec_hash") != digest:
        raise ManifestMismatch(
            f"{out} holds results of spec {previous.get('spec_hash', '?')[:12]}, "
            f"not {digest[:12]}; use a fresh output directory"
        )
    (out / "spec.yaml").write_text(yaml.safe_dump(spec.to_dict(), sort_keys=False))

    grid = expand_grid(spec)
    manifest = {
        "spec_hash": digest,
        "catalog_version": catalog_version(),
        "pcga_version": __version__,
        "runs_per_cell": spec.runs,
        "cells": {
            str(c.index): {**c.key(), "budget": c.budget, "target": _json_float(c.target), "status": "pending"}
            for c in grid.cells
        },
        "skipped": grid.skipped,
        "complete": False,
    }
    _write_manifest(out, manifest)

    pending = [(job, logs / job.filename) for job in grid.jobs() if not (logs / job.filename).exists()]
    log.info("%d of %d jobs pending", len(pending), len(grid))
    errors: dict[int, str] = {}
    n_workers = worker_count(workers)
    if n_workers == 1 or len(pending) < 2:
        outcomes = map(_run_and_write, pending)
        for cell, err in outcomes:
            if err:
                errors.setdefault(cell, err)
    else:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            for cell, err in pool.map(_run_and_write, pending, chunksize=max(1, len(pending) // (8 * n_workers))):
                if err:
                    errors.setdefault(cell, err)

    for c in grid.cells:
        done = sum((logs / Job(c, r, 0).filename).exists() for r in range(spec.runs))
        entry = manifest["cells"][str(c.index)]
        entry["runs_done"] = done
        entry["status"] = "complete" if done == spec.runs else "incomplete"
        if c.index in errors:
            entry["error"] = errors[c.index]
    manifest["complete"] = all(e["status"] == "complete" for e in manifest["cells"].values())
    _write_manifest(out, manifest)
    return out


def _json_float(x: float):
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


def preset(name: str) -> ExperimentSpec:
    """Built-in experiment grids."""
    if name == "ioh":
        return ExperimentSpec(
            name="ioh",
            problems=tuple((f, (100,)) for f in range(1, 26)),
            mu=(10, 50, 100), lam=LAMBDA_RULES, p_c=(0.0, 0.5),
            crossover=("one-point", "two-point", "uniform"),
            scheme=("offspring", "population"), mutation=("sbm", "fast"),
            runs=100, budget_factor=100.0, target="none", collapse_mutation_only=True,
        )
    if name == "leadingones":
        return ExperimentSpec(
            name="leadingones",
            problems=((2, (64, 100, 150, 200, 250, 500)),),
            mu=MU_GRID, lam=LAMBDA_RULES, p_c=PC_GRID, mutation=("sbm", "fast"),
            runs=100, budget_factor=5.0, target="optimum",
        )
    if name == "table2-desk":
        return ExperimentSpec(
            name="table2-desk",
            problems=((2, (64, 100)),),
            mu=(2, 10, 50, 100), lam=("1", "mu"), p_c=PC_GRID,
            runs=30, budget_factor=5.0, target="optimum",
        )
    if name == "fixed-target":
        return ExperimentSpec(
            name="fixed-target",
            problems=((2, (200,)),),
            mu=(50,), lam=("mu",), p_c=PC_GRID,
            runs=100, budget_factor=5.0, target="optimum",
        )
    raise ConfigurationError(f"unknown preset {name!r}; choose from ioh, leadingones, table2-desk, fixed-target")
