"""The 25-problem pseudo-Boolean suite (F1-F25).

Use :func:`make_problem` for catalog instances. The standalone functions
below evaluate a single bitstring and exist mainly for tests and
exploration; they share the compiled kernels with the engine.
"""

from __future__ import annotations

import math

import numpy as np

from ..core import ConfigurationError
from . import kernels as K
from .catalog import (
    NkLandscape,
    TrapParams,
    catalog_entry,
    catalog_version,
    check_dimension,
    load_catalog,
    make_problem,
    reference_target,
)
from .wmodel import WModelLayers, apply_wmodel

PROBLEM_IDS = tuple(range(1, 26))


def _bits(x) -> np.ndarray:
    return np.ascontiguousarray(x, dtype=np.uint8)


def onemax(x) -> int:
    x = _bits(x)
    return int(K.onemax(x, x.size))


def leading_ones(x) -> int:
    x = _bits(x)
    return int(K.leading_ones(x, x.size))


def linear_harmonic(x) -> int:
    """Sum of ``i * x_i`` with 1-based positions."""
    return int(K.linear(_bits(x)))


def labs(x) -> float:
    """Merit factor of the +-1 sequence ``2x - 1``."""
    x = _bits(x)
    if x.size < 2:
        raise ConfigurationError("merit factor is undefined for n < 2 (zero energy)")
    return float(K.labs_merit(x))


def _square(x) -> np.ndarray:
    x = _bits(x)
    if math.isqrt(x.size) ** 2 != x.size:
        raise ConfigurationError(f"2-D lattice needs a square dimension, got {x.size}")
    return x


def ising_ring(x) -> int:
    return int(K.ising_ring(_bits(x)))


def ising_torus(x) -> int:
    return int(K.ising_torus(_square(x), False))


def ising_triangular(x) -> int:
    return int(K.ising_torus(_square(x), True))


def mivs(x) -> int:
    return int(K.mivs(_bits(x)))


def nqueens(x) -> int:
    return int(K.nqueens(_square(x)))


def concatenated_trap(x, params: TrapParams = TrapParams()) -> float:
    x = _bits(x)
    params.segments(x.size)
    return float(K.concatenated_trap(x, params.k))


def nk_eval(x, inst: NkLandscape) -> float:
    x = _bits(x)
    if x.size != inst.n:
        raise ValueError(f"landscape has n={inst.n}, got length {x.size}")
    return float(K.nk_eval(x, inst.k, inst.neighbors.ravel(), inst.tables.ravel()))


__all__ = [
    "PROBLEM_IDS",
    "NkLandscape",
    "TrapParams",
    "WModelLayers",
    "apply_wmodel",
    "catalog_entry",
    "catalog_version",
    "check_dimension",
    "concatenated_trap",
    "ising_ring",
    "ising_torus",
    "ising_triangular",
    "labs",
    "leading_ones",
    "linear_harmonic",
    "load_catalog",
    "make_problem",
    "mivs",
    "nk_eval",
    "nqueens",
    "onemax",
    "reference_target",
]
