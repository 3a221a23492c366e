"""The (mu+lambda) GA with crossover probability p_c.

Each offspring comes from *either* crossover of two parents drawn u.a.r.
with replacement (probability p_c) *or* mutation of one parent drawn u.a.r.
Offspring identical to a parent inherit its fitness and cost nothing.
Survivors are the best mu of parents and offspring, ties broken u.a.r.

Two variator-choice schemes are supported: ``"offspring"`` flips the
crossover-or-mutation coin for every offspring, ``"population"`` flips it
once per generation. The coin is ``r <= p_c`` with r uniform on (0, 1], so
p_c = 0 never crosses over and p_c = 1 always does.

The generation loop runs in a single numba kernel; the helpers it uses are
also exposed as Python functions so they can be tested in isolation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .analytics import RunLog
from .core import BIT_DTYPE, Budget, ConfigurationError, Problem, evaluate_counted, fill_uniform, new_uniform_bitstring
from .problems.kernels import evaluate_kernel
from .rng import RngStream, next_double_open_closed, randbelow
from .variation import (
    CROSSOVER_CODES,
    CROSSOVERS,
    DEFAULT_BETA,
    MUTATIONS,
    MutationOperator,
    crossover_into,
    mutate_into,
)

OFFSPRING_BASED = "offspring"
POPULATION_BASED = "population"
SCHEMES = (OFFSPRING_BASED, POPULATION_BASED)

CAUSE_TARGET = 0
CAUSE_BUDGET = 1
CAUSE_STALLED = 2
CAUSES = {CAUSE_TARGET: "target", CAUSE_BUDGET: "budget", CAUSE_STALLED: "stalled"}

# indices into the kernel's statistics array
ST_CROSSOVER, ST_MUTATION, ST_INHERITED, ST_GENERATIONS = range(4)


@dataclass(frozen=True)
class GaConfig:
    mu: int
    lam: int
    p_c: float
    mutation: str = "sbm"
    crossover: str = "uniform"
    scheme: str = OFFSPRING_BASED
    mutation_rate: float | None = None  # None means 1/n
    beta: float = DEFAULT_BETA
    # False evaluates every crossover child, even one identical to a parent
    inherit_clone_fitness: bool = True

    def __post_init__(self):
        if self.mu < 1 or self.lam < 1:
            raise ConfigurationError(f"population sizes must be positive, got mu={self.mu}, lambda={self.lam}")
        if not 0.0 <= self.p_c <= 1.0:
            raise ConfigurationError(f"crossover probability must lie in [0, 1], got {self.p_c}")
        if self.mutation not in MUTATIONS:
            raise ConfigurationError(f"unknown mutation {self.mutation!r}")
        if self.crossover not in CROSSOVERS:
            raise ConfigurationError(f"unknown crossover {self.crossover!r}")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(f"unknown variator scheme {self.scheme!r}")
        if self.mu == 1 and self.p_c > 0:
            warnings.warn("mu=1 with p_c>0: every crossover child is a clone of the single parent", stacklevel=3)

    def mutation_operator(self, n: int) -> MutationOperator:
        return MutationOperator.build(self.mutation, n, self.mutation_rate, self.beta)

    @property
    def label(self) -> str:
        text = f"({self.mu}+{self.lam}) GA p_c={self.p_c:g} {self.crossover} {self.mutation} {self.scheme}"
        return text if self.inherit_clone_fitness else text + " (clones evaluated)"


@dataclass
class Individual:
    genome: np.ndarray
    fitness: float
    evaluated: bool = True


@dataclass
class Population:
    """``genomes`` is a (size, n) uint8 matrix; ``fitness`` is aligned with it."""

    genomes: np.ndarray
    fitness: np.ndarray

    def __len__(self) -> int:
        return len(self.fitness)

    def __getitem__(self, i: int) -> Individual:
        return Individual(self.genomes[i], float(self.fitness[i]))

    @classmethod
    def from_individuals(cls, individuals) -> Population:
        individuals = list(individuals)
        return cls(
            np.array([ind.genome for ind in individuals], dtype=BIT_DTYPE),
            np.array([ind.fitness for ind in individuals], dtype=float),
        )


@dataclass
class Offspring(Population):
    """Offspring of one generation.

    ``inherited[i]`` marks clones of a parent (fitness copied, no evaluation);
    other entries of ``fitness`` are NaN until evaluated.
    """

    inherited: np.ndarray = None
    by_crossover: np.ndarray = None


@dataclass
class RunResult:
    log: RunLog
    succeeded: bool
    evals_used: int
    best_fitness: float
    cause: str
    stats: dict = field(default_factory=dict)
    population: Population | None = None


# -- compiled helpers ------------------------------------------------------

@nb.njit(cache=True)
def _rows_equal(a, b):
    for i in range(a.size):
        if a[i] != b[i]:
            return False
    return True


@nb.njit(cache=True)
def _coin(s, p_c):
    """Crossover coin ``r <= p_c`` with r on (0, 1]; endpoints draw nothing."""
    if p_c <= 0.0:
        return False
    if p_c >= 1.0:
        return True
    return next_double_open_closed(s) <= p_c


@nb.njit(cache=True)
def _vary(pool, fit, parents, row, use_crossover, xcode, mcdf, moffset, mreject, idx, s, inherit=True):
    """Create one offspring in ``pool[row]``.

    Returns ``(inherited, fitness)``; fitness is only meaningful when the
    offspring equals a parent. With ``inherit=False`` crossover clones are
    treated as new points and evaluated.
    """
    mu = parents.size
    z = pool[row]
    if use_crossover:
        a = parents[randbelow(s, mu)]
        b = parents[randbelow(s, mu)]
        crossover_into(z, pool[a], pool[b], xcode, s)
        if not inherit:
            return False, np.nan
        if _rows_equal(z, pool[a]):
            return True, fit[a]
        if _rows_equal(z, pool[b]):
            return True, fit[b]
        return False, np.nan
    a = parents[randbelow(s, mu)]
    mutate_into(z, pool[a], mcdf, moffset, mreject, idx, s)
    # strength is at least 1, so a mutant never equals its parent
    return False, np.nan


@nb.njit(cache=True)
def _select(fit, cand, mu, s, out):
    """Write into ``out`` the rows of the best ``mu`` candidates, ties u.a.r."""
    k = cand.size
    if k == mu + 1:
        # drop one worst candidate, chosen u.a.r. among the worst
        worst = fit[cand[0]]
        for i in range(1, k):
            if fit[cand[i]] < worst:
                worst = fit[cand[i]]
        drop = -1
        ties = 0
        for i in range(k):
            if fit[cand[i]] == worst:
                ties += 1
                if randbelow(s, ties) == 0:
                    drop = i
        j = 0
        for i in range(k):
            if i != drop:
                out[j] = cand[i]
                j += 1
        return
    perm = cand.copy()
    for i in range(k - 1, 0, -1):
        j = randbelow(s, i + 1)
        t = perm[i]
        perm[i] = perm[j]
        perm[j] = t
    keys = np.empty(k)
    for i in range(k):
        keys[i] = -fit[perm[i]]
    order = np.argsort(keys, kind="mergesort")
    for i in range(mu):
        out[i] = perm[order[i]]


@nb.njit(cache=True)
def _make_offspring(pool, fit, parents, free, p_c, per_generation, xcode,
                    mcdf, moffset, mreject, idx, s, inherited, by_crossover, inherit=True):
    gen_crossover = False
    if per_generation:
        gen_crossover = _coin(s, p_c)
    for i in range(free.size):
        if per_generation:
            use = gen_crossover
        else:
            use = _coin(s, p_c)
        inh, f = _vary(pool, fit, parents, free[i], use, xcode, mcdf, moffset, mreject, idx, s, inherit)
        inherited[i] = inh
        by_crossover[i] = use
        fit[free[i]] = f


@nb.njit(cache=True)
def _all_identical(pool, parents):
    first = pool[parents[0]]
    for i in range(1, parents.size):
        if not _rows_equal(first, pool[parents[i]]):
            return False
    return True


@nb.njit(cache=True)
def _grow_int(a):
    b = np.empty(2 * a.size + 16, dtype=a.dtype)
    b[: a.size] = a
    return b


@nb.njit(cache=True)
def _grow_float(a):
    b = np.empty(2 * a.size + 16)
    b[: a.size] = a
    return b


@nb.njit(cache=True)
def _run_kernel(pool, fit, mu, lam, p_c, per_generation, xcode, mcdf, moffset, mreject,
                kind, ip, fp, pos, max_evals, target, trace, s, stats, inherit):
    n = pool.shape[1]
    scratch = np.empty(2 * n + 2, dtype=np.uint8)
    idx = np.arange(n)
    ev_n = np.empty(64, dtype=np.int64)
    ev_f = np.empty(64)
    n_ev = 0
    tr_n = np.empty(64 if trace else 0, dtype=np.int64)
    tr_f = np.empty(64 if trace else 0)
    n_tr = 0
    gen_max = np.empty(64 if trace else 0)
    n_gen = 0
    evals = 0
    best = -np.inf
    cause = CAUSE_BUDGET

    parents = np.arange(mu)
    free = np.arange(mu, mu + lam)
    cand = np.empty(mu + lam, dtype=np.int64)
    keep = np.empty(mu, dtype=np.int64)
    kept = np.zeros(mu + lam, dtype=np.bool_)

    done = False
    for i in range(mu):
        fill_uniform(pool[i], s)
        f = evaluate_kernel(kind, ip, fp, pos, pool[i], scratch)
        fit[i] = f
        evals += 1
        if trace:
            if n_tr == tr_n.size:
                tr_n = _grow_int(tr_n)
                tr_f = _grow_float(tr_f)
            tr_n[n_tr] = evals
            tr_f[n_tr] = f
            n_tr += 1
        if f > best:
            best = f
            if n_ev == ev_n.size:
                ev_n = _grow_int(ev_n)
                ev_f = _grow_float(ev_f)
            ev_n[n_ev] = evals
            ev_f[n_ev] = f
            n_ev += 1
        if best >= target:
            cause = CAUSE_TARGET
            done = True
            break
        if evals >= max_evals:
            done = True
            break
    if done and evals < mu:
        # stopped during initialisation; the population is the evaluated prefix
        parents = np.arange(evals)

    while not done:
        if p_c >= 1.0 and _all_identical(pool, parents):
            cause = CAUSE_STALLED
            break
        gen_crossover = False
        if per_generation:
            gen_crossover = _coin(s, p_c)
        made = 0
        for i in range(lam):
            if per_generation:
                use = gen_crossover
            else:
                use = _coin(s, p_c)
            row = free[i]
            inherited, f = _vary(pool, fit, parents, row, use, xcode, mcdf, moffset, mreject, idx, s, inherit)
            made += 1
            if use:
                stats[ST_CROSSOVER] += 1
            else:
                stats[ST_MUTATION] += 1
            if inherited:
                stats[ST_INHERITED] += 1
                fit[row] = f
                continue
            f = evaluate_kernel(kind, ip, fp, pos, pool[row], scratch)
            fit[row] = f
            evals += 1
            if trace:
                if n_tr == tr_n.size:
                    tr_n = _grow_int(tr_n)
                    tr_f = _grow_float(tr_f)
                tr_n[n_tr] = evals
                tr_f[n_tr] = f
                n_tr += 1
            if f > best:
                best = f
                if n_ev == ev_n.size:
                    ev_n = _grow_int(ev_n)
                    ev_f = _grow_float(ev_f)
                ev_n[n_ev] = evals
                ev_f[n_ev] = f
                n_ev += 1
            if best >= target:
                cause = CAUSE_TARGET
                done = True
                break
            if evals >= max_evals:
                done = True
                break
        if done:
            break
        for i in range(mu):
            cand[i] = parents[i]
        for i in range(made):
            cand[mu + i] = free[i]
        _select(fit, cand, mu, s, keep)
        # rows not kept become the next generation's offspring slots
        kept[:] = False
        for q in range(mu):
            kept[keep[q]] = True
        j = 0
        for r in range(mu + lam):
            if not kept[r]:
                free[j] = r
                j += 1
        parents[:] = keep
        stats[ST_GENERATIONS] += 1
        if trace:
            if n_gen == gen_max.size:
                gen_max = _grow_float(gen_max)
            m = -np.inf
            for i in range(mu):
                if fit[parents[i]] > m:
                    m = fit[parents[i]]
            gen_max[n_gen] = m
            n_gen += 1

    return (ev_n[:n_ev].copy(), ev_f[:n_ev].copy(), tr_n[:n_tr].copy(), tr_f[:n_tr].copy(),
            gen_max[:n_gen].copy(), parents.copy(), evals, best, cause)


# -- Python API -------------------------------------------------------------

def _operator_arrays(cfg: GaConfig, n: int):
    op = cfg.mutation_operator(n)
    return CROSSOVER_CODES[cfg.crossover], op.cdf, op.offset, op.reject_zero


def initial_population(problem: Problem, mu: int, budget: Budget, rng: RngStream) -> Population:
    """Sample and evaluate ``mu`` uniform points, charging the budget."""
    genomes = np.empty((mu, problem.n), dtype=BIT_DTYPE)
    fitness = np.empty(mu)
    for i in range(mu):
        genomes[i] = new_uniform_bitstring(problem.n, rng)
        fitness[i] = evaluate_counted(problem, genomes[i], budget)
    return Population(genomes, fitness)


def _make_offspring_py(P: Population, cfg: GaConfig, rng: RngStream, per_generation: bool) -> Offspring:
    mu, n = P.genomes.shape
    if mu != cfg.mu:
        raise ValueError(f"population has {mu} members, configuration expects mu={cfg.mu}")
    pool = np.empty((mu + cfg.lam, n), dtype=BIT_DTYPE)
    pool[:mu] = P.genomes
    fit = np.empty(mu + cfg.lam)
    fit[:mu] = P.fitness
    xcode, mcdf, moffset, mreject = _operator_arrays(cfg, n)
    inherited = np.zeros(cfg.lam, dtype=np.bool_)
    by_crossover = np.zeros(cfg.lam, dtype=np.bool_)
    _make_offspring(
        pool, fit, np.arange(mu), np.arange(mu, mu + cfg.lam), cfg.p_c, per_generation,
        xcode, mcdf, moffset, mreject, np.arange(n), rng.state, inherited, by_crossover,
        cfg.inherit_clone_fitness,
    )
    return Offspring(pool[mu:].copy(), fit[mu:].copy(), inherited, by_crossover)


def make_offspring_offspring_based(P: Population, cfg: GaConfig, rng: RngStream) -> Offspring:
    """Create lambda offspring, choosing crossover or mutation per offspring."""
    return _make_offspring_py(P, cfg, rng, per_generation=False)


def make_offspring_population_based(P: Population, cfg: GaConfig, rng: RngStream) -> Offspring:
    """Create lambda offspring with one crossover-or-mutation draw for all of them."""
    return _make_offspring_py(P, cfg, rng, per_generation=True)


def select_survivors(P: Population, Pprime: Population, mu: int, rng: RngStream) -> Population:
    """Best ``mu`` of ``P`` and ``Pprime`` (plus-selection, ties broken u.a.r.)."""
    genomes = np.concatenate([P.genomes, Pprime.genomes])
    fitness = np.concatenate([P.fitness, Pprime.fitness]).astype(float)
    if np.isnan(fitness).any():
        raise ValueError("all individuals must carry a fitness before selection")
    if mu > len(fitness):
        raise ValueError(f"cannot keep {mu} of {len(fitness)} individuals")
    keep = np.empty(mu, dtype=np.int64)
    _select(fitness, np.arange(len(fitness)), mu, rng.state, keep)
    return Population(genomes[keep], fitness[keep])


def run_ga(
    cfg: GaConfig,
    problem: Problem,
    budget: Budget,
    target: float | None = None,
    rng: RngStream | None = None,
    trace: bool = False,
) -> RunResult:
    """Run the GA until ``target`` is reached or the budget is spent.

    ``target`` defaults to the problem's optimum (or no target if unknown).
    With ``trace=True`` the log also carries every evaluation and the
    population's best fitness after each generation.
    """
    if budget.remaining < cfg.mu:
        raise ConfigurationError(
            f"budget of {budget.remaining} evaluations cannot cover the initial population of {cfg.mu}"
        )
    if target is None:
        target = problem.optimum if problem.optimum is not None else math.inf
    if rng is None:
        rng = RngStream(0)
    n = problem.n
    xcode, mcdf, moffset, mreject = _operator_arrays(cfg, n)
    pool = np.empty((cfg.mu + cfg.lam, n), dtype=BIT_DTYPE)
    fit = np.full(cfg.mu + cfg.lam, np.nan)
    stats = np.zeros(4, dtype=np.int64)
    ev_n, ev_f, tr_n, tr_f, gen_max, parents, evals, best, cause = _run_kernel(
        pool, fit, cfg.mu, cfg.lam, float(cfg.p_c), cfg.scheme == POPULATION_BASED, xcode,
        mcdf, moffset, mreject, problem.kind, problem.iparams, problem.fparams,
        problem.positions, budget.remaining, float(target), trace, rng.state, stats,
        cfg.inherit_clone_fitness,
    )
    offset = budget.used
    budget.used += int(evals)
    problem.eval_count += int(evals)
    log = RunLog(
        evals=ev_n + offset,
        best=ev_f,
        final_evals=offset + int(evals),
        budget=budget.max_evals,
        hit_target=cause == CAUSE_TARGET,
        target=float(target),
        cause=CAUSES[cause],
    )
    if trace:
        log.trace_evals = tr_n + offset
        log.trace_fitness = tr_f
        log.generation_best = gen_max
    return RunResult(
        log=log,
        succeeded=cause == CAUSE_TARGET,
        evals_used=int(evals),
        best_fitness=float(best),
        cause=CAUSES[cause],
        stats={
            "crossover_offspring": int(stats[ST_CROSSOVER]),
            "mutation_offspring": int(stats[ST_MUTATION]),
            "inherited": int(stats[ST_INHERITED]),
            "generations": int(stats[ST_GENERATIONS]),
        },
        population=Population(pool[parents].copy(), fit[parents].copy()),
    )
