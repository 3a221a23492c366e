"""Mutation and crossover operators on bitstrings.

Both mutation operators flip exactly ``ell`` distinct positions; they only
differ in how ``ell`` is drawn:

* standard bit mutation draws ``ell`` from Bin(n, p) conditioned on ``ell > 0``;
* fast mutation draws ``ell`` from the power law ``ell**-beta`` on ``[1..n//2]``.

Strengths are sampled by inverse CDF over a table built once per operator.
For standard bit mutation the table is the plain binomial and zeros are
rejected; when Pr[ell = 0] exceeds 1/2 (and always for n = 1) the sampler
switches to the zero-truncated table directly so rejection never loops long.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .core import InvalidDimensionError
from .rng import RngStream, next_double, next_u64, randbelow

SBM = "sbm"
FAST = "fast"
MUTATIONS = (SBM, FAST)

ONE_POINT = "one-point"
TWO_POINT = "two-point"
UNIFORM = "uniform"
CROSSOVERS = (ONE_POINT, TWO_POINT, UNIFORM)
CROSSOVER_CODES = {ONE_POINT: 1, TWO_POINT: 2, UNIFORM: 3}

DEFAULT_BETA = 1.5


def sbm_strength_pmf(n: int, p: float) -> np.ndarray:
    """Pr[ell = k] for k = 1..n under Bin(n, p) conditioned on ell > 0."""
    _check_rate(n, p)
    nonzero = -math.expm1(n * math.log1p(-p))
    return np.exp(_binom_log_pmf(n, p, np.arange(1, n + 1))) / nonzero


def _binom_log_pmf(n: int, p: float, k: np.ndarray) -> np.ndarray:
    log_choose = np.array([math.lgamma(n + 1) - math.lgamma(i + 1) - math.lgamma(n - i + 1) for i in k])
    return log_choose + k * math.log(p) + (n - k) * math.log1p(-p)


def power_law_norm(n: int, beta: float = DEFAULT_BETA) -> float:
    """Normalising constant sum_{i=1}^{n//2} i**-beta."""
    return math.fsum(i ** -beta for i in range(1, n // 2 + 1))


def fast_strength_pmf(n: int, beta: float = DEFAULT_BETA) -> np.ndarray:
    """Pr[ell = k] for k = 1..n//2 under the truncated power law."""
    if n < 2:
        raise InvalidDimensionError(f"fast mutation needs n >= 2, got {n}")
    if beta <= 1:
        raise ValueError(f"power-law exponent must exceed 1, got {beta}")
    k = np.arange(1, n // 2 + 1, dtype=float)
    return k ** -beta / power_law_norm(n, beta)


def _check_rate(n: int, p: float) -> None:
    if n < 1:
        raise InvalidDimensionError(f"dimension must be positive, got {n}")
    if not 0 < p < 1:
        raise ValueError(f"mutation rate must lie in (0, 1), got {p}")


def _cdf(pmf: np.ndarray) -> np.ndarray:
    cdf = np.cumsum(pmf)
    cdf /= cdf[-1]
    cdf[-1] = 1.0
    return cdf


@dataclass(frozen=True, eq=False)
class MutationOperator:
    """A strength distribution bound to a dimension.

    Build with :meth:`standard` or :meth:`fast`. ``cdf``, ``offset`` and
    ``reject_zero`` are what the compiled sampler consumes: the sampled
    strength is ``searchsorted(cdf, u) + offset``.
    """

    kind: str
    n: int
    p: float | None = None
    beta: float | None = None
    norm_const: float | None = None
    cdf: np.ndarray = field(default=None, repr=False)
    offset: int = 0
    reject_zero: bool = False

    @property
    def half_n(self) -> int:
        return self.n // 2

    @classmethod
    def standard(cls, n: int, p: float | None = None) -> MutationOperator:
        p = 1.0 / n if p is None else p
        if n == 1:
            # only support point is ell = 1; any p is accepted
            if not 0 < p <= 1:
                raise ValueError(f"mutation rate must lie in (0, 1], got {p}")
            return cls(SBM, n, p=p, cdf=np.array([1.0]), offset=1)
        _check_rate(n, p)
        p_zero = math.exp(n * math.log1p(-p))
        if p_zero > 0.5:
            return cls(SBM, n, p=p, cdf=_cdf(sbm_strength_pmf(n, p)), offset=1)
        pmf = np.exp(_binom_log_pmf(n, p, np.arange(0, n + 1)))
        return cls(SBM, n, p=p, cdf=_cdf(pmf), offset=0, reject_zero=True)

    @classmethod
    def fast(cls, n: int, beta: float = DEFAULT_BETA) -> MutationOperator:
        pmf = fast_strength_pmf(n, beta)
        return cls(FAST, n, beta=beta, norm_const=power_law_norm(n, beta), cdf=_cdf(pmf), offset=1)

    @classmethod
    def build(cls, kind: str, n: int, p: float | None = None, beta: float = DEFAULT_BETA) -> MutationOperator:
        if kind == SBM:
            return cls.standard(n, p)
        if kind == FAST:
            return cls.fast(n, beta)
        raise ValueError(f"unknown mutation operator {kind!r}; expected one of {MUTATIONS}")

    def pmf(self) -> np.ndarray:
        """Analytic strength pmf over ``1..len``."""
        if self.kind == FAST:
            return fast_strength_pmf(self.n, self.beta)
        if self.n == 1:
            return np.array([1.0])
        return sbm_strength_pmf(self.n, self.p)

    def sample_strength(self, rng: RngStream, size: int | None = None):
        if size is None:
            return int(sample_strength(self.cdf, self.offset, self.reject_zero, rng.state))
        out = np.empty(size, dtype=np.int64)
        _sample_strengths(self.cdf, self.offset, self.reject_zero, rng.state, out)
        return out


@dataclass(frozen=True)
class CrossoverOperator:
    kind: str

    def __post_init__(self):
        if self.kind not in CROSSOVERS:
            raise ValueError(f"unknown crossover operator {self.kind!r}; expected one of {CROSSOVERS}")

    @property
    def code(self) -> int:
        return CROSSOVER_CODES[self.kind]


# -- compiled primitives ---------------------------------------------------

@nb.njit(cache=True)
def sample_strength(cdf, offset, reject_zero, s):
    last = cdf.size - 1
    while True:
        i = np.searchsorted(cdf, next_double(s), side="right")
        ell = min(i, last) + offset
        if not (reject_zero and ell == 0):
            return ell


@nb.njit(cache=True)
def _sample_strengths(cdf, offset, reject_zero, s, out):
    for i in range(out.size):
        out[i] = sample_strength(cdf, offset, reject_zero, s)


@nb.njit(cache=True)
def flip_positions(z, ell, idx, s):
    """Flip ``ell`` distinct u.a.r. positions of ``z`` in place.

    ``idx`` is a permutation of ``0..n-1`` kept across calls; a partial
    Fisher-Yates pass over any permutation selects a uniform ell-subset.
    """
    n = z.size
    for i in range(ell):
        j = i + randbelow(s, n - i)
        t = idx[i]
        idx[i] = idx[j]
        idx[j] = t
        z[idx[i]] ^= 1


@nb.njit(cache=True)
def mutate_into(z, x, cdf, offset, reject_zero, idx, s):
    """Write a mutant of ``x`` into ``z``; returns the strength used."""
    ell = sample_strength(cdf, offset, reject_zero, s)
    z[:] = x
    flip_positions(z, ell, idx, s)
    return ell


@nb.njit(cache=True)
def crossover_into(z, x, y, code, s):
    """Write ``crossover(x, y)`` into ``z``; ``x`` is the first parent."""
    n = z.size
    if code == 1:
        c = 1 + randbelow(s, n)
        z[:c] = x[:c]
        z[c:] = y[c:]
    elif code == 2:
        if n < 2:
            z[:] = x
            return
        c1 = 1 + randbelow(s, n)
        c2 = 1 + randbelow(s, n - 1)
        if c2 >= c1:
            c2 += 1
        if c1 > c2:
            c1, c2 = c2, c1
        z[:c1] = x[:c1]
        z[c1:c2] = y[c1:c2]
        z[c2:] = x[c2:]
    else:
        for start in range(0, n, 64):
            w = next_u64(s)
            stop = min(start + 64, n)
            for i in range(start, stop):
                if (w >> np.uint64(i - start)) & np.uint64(1):
                    z[i] = y[i]
                else:
                    z[i] = x[i]


# -- Python-level API ------------------------------------------------------

def sample_sbm_strength(n: int, p: float, rng: RngStream, size: int | None = None):
    """Draw strengths from Bin(n, p) conditioned on being positive."""
    return MutationOperator.standard(n, p).sample_strength(rng, size)


def sample_fast_strength(n: int, beta: float, rng: RngStream, size: int | None = None):
    """Draw strengths from the power law ``ell**-beta`` on ``[1..n//2]``."""
    return MutationOperator.fast(n, beta).sample_strength(rng, size)


def mutate(x: np.ndarray, op: MutationOperator, rng: RngStream) -> np.ndarray:
    """Return a copy of ``x`` with ``ell`` distinct bits flipped."""
    if x.size != op.n:
        raise ValueError(f"operator built for n={op.n}, got length {x.size}")
    z = np.empty_like(x)
    idx = np.arange(x.size, dtype=np.int64)
    mutate_into(z, x, op.cdf, op.offset, op.reject_zero, idx, rng.state)
    return z


def crossover(x: np.ndarray, y: np.ndarray, op: CrossoverOperator | str, rng: RngStream) -> np.ndarray:
    """Recombine two parents; ``x`` is the first parent."""
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    if isinstance(op, str):
        op = CrossoverOperator(op)
    z = np.empty_like(x)
    crossover_into(z, x, y, op.code, rng.state)
    return z


def one_point_crossover(x: np.ndarray, y: np.ndarray, point: int) -> np.ndarray:
    """Positions ``1..point`` from ``x``, the rest from ``y`` (1-based)."""
    if not 1 <= point <= x.size:
        raise ValueError(f"crossover point must lie in [1..{x.size}], got {point}")
    return np.concatenate([x[:point], y[point:]])


def two_point_crossover(x: np.ndarray, y: np.ndarray, c1: int, c2: int) -> np.ndarray:
    """``x`` on ``[1..c1]``, ``y`` on ``[c1+1..c2]``, ``x`` after ``c2``."""
    if not 1 <= c1 < c2 <= x.size:
        raise ValueError(f"need 1 <= c1 < c2 <= {x.size}, got ({c1}, {c2})")
    return np.concatenate([x[:c1], y[c1:c2], x[c2:]])
