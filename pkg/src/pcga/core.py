"""Bitstrings, problems, and evaluation budgets."""

from __future__ import annotations

from dataclasses import dataclass, field

import numba as nb
import numpy as np

from .rng import RngStream, next_u64

BIT_DTYPE = np.uint8


class InvalidDimensionError(ValueError):
    pass


class ConfigurationError(ValueError):
    pass


class BudgetExhausted(RuntimeError):
    """Raised when an evaluation is requested with no budget left."""


def bitstring(bits) -> np.ndarray:
    """Build a validated bitstring from a ``"0101"`` string or a 0/1 sequence.

    Bitstrings are plain ``uint8`` numpy arrays. Length is fixed by the
    array; every element must be 0 or 1.
    """
    if isinstance(bits, str):
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"not a bitstring: {bits!r}")
        arr = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    else:
        arr = np.asarray(bits)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("bitstring must be a non-empty 1-D sequence")
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("bitstring entries must be 0 or 1")
    return np.ascontiguousarray(arr, dtype=BIT_DTYPE)


def to_str(x: np.ndarray) -> str:
    return "".join("1" if b else "0" for b in x)


@nb.njit(cache=True)
def fill_uniform(x, s):
    n = x.size
    for start in range(0, n, 64):
        w = next_u64(s)
        stop = min(start + 64, n)
        for i in range(start, stop):
            x[i] = (w >> np.uint64(i - start)) & np.uint64(1)


def new_uniform_bitstring(n: int, rng: RngStream) -> np.ndarray:
    """Sample a point of {0,1}^n uniformly at random."""
    if n < 1:
        raise InvalidDimensionError(f"dimension must be positive, got {n}")
    x = np.empty(n, dtype=BIT_DTYPE)
    fill_uniform(x, rng.state)
    return x


def hamming_distance(x: np.ndarray, y: np.ndarray) -> int:
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.size} vs {y.size}")
    return int(np.count_nonzero(x != y))


@dataclass
class Budget:
    max_evals: int
    used: int = 0

    def __post_init__(self):
        if self.max_evals < 1:
            raise ValueError("budget must allow at least one evaluation")

    @property
    def remaining(self) -> int:
        return self.max_evals - self.used

    @property
    def exhausted(self) -> bool:
        return self.used >= self.max_evals

    def charge(self, k: int = 1) -> None:
        if self.used + k > self.max_evals:
            raise BudgetExhausted(f"budget of {self.max_evals} evaluations exhausted")
        self.used += k

    @classmethod
    def quadratic(cls, n: int, factor: float) -> Budget:
        """Budget of ``factor * n**2`` evaluations."""
        return cls(int(round(factor * n * n)))


@dataclass(eq=False)
class Problem:
    """A pseudo-Boolean objective with compiled evaluation data.

    ``kind``, ``iparams``, ``fparams`` and ``positions`` are the flat
    arrays consumed by :func:`pcga.problems.kernels.evaluate_kernel`; the
    catalog in :mod:`pcga.problems` builds them. Instances are immutable
    apart from ``eval_count``.
    """

    id: int
    name: str
    n: int
    kind: int
    iparams: np.ndarray
    fparams: np.ndarray
    positions: np.ndarray
    optimum: float | None = None
    eval_count: int = field(default=0, compare=False)

    def __post_init__(self):
        for arr in (self.iparams, self.fparams, self.positions):
            arr.setflags(write=False)

    def evaluate(self, x: np.ndarray) -> float:
        """Fitness of ``x`` without touching any counter."""
        from .problems.kernels import evaluate_kernel

        if x.shape != (self.n,):
            raise ValueError(f"{self.name} expects length {self.n}, got {x.shape}")
        return float(
            evaluate_kernel(
                self.kind, self.iparams, self.fparams, self.positions,
                np.ascontiguousarray(x, dtype=BIT_DTYPE), scratch_for(self.n),
            )
        )

    __call__ = evaluate

    def __repr__(self) -> str:
        return f"Problem(F{self.id} {self.name}, n={self.n})"


def scratch_for(n: int) -> np.ndarray:
    """Work buffer the evaluation kernel needs for dimension ``n``."""
    return np.empty(2 * n + 2, dtype=BIT_DTYPE)


def evaluate_counted(problem: Problem, x: np.ndarray, budget: Budget) -> float:
    """Evaluate ``x`` and charge one evaluation to both counters."""
    if budget.exhausted:
        raise BudgetExhausted(f"budget of {budget.max_evals} evaluations exhausted")
    value = problem.evaluate(x)
    budget.used += 1
    problem.eval_count += 1
    return value
