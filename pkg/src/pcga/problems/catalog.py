"""Problem construction from the checked-in catalog."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from importlib import resources

import numpy as np
import yaml

from ..core import ConfigurationError, Problem
from ..rng import RngStream, derive_seed, next_double, randbelow
from . import kernels as K
from .wmodel import WModelLayers

_KINDS = {
    "onemax": K.ONEMAX,
    "leadingones": K.LEADINGONES,
    "linear": K.LINEAR,
    "wmodel": K.WMODEL,
    "labs": K.LABS,
    "ising_ring": K.ISING_RING,
    "ising_torus": K.ISING_TORUS,
    "ising_triangular": K.ISING_TRIANGULAR,
    "mivs": K.MIVS,
    "nqueens": K.NQUEENS,
    "trap": K.TRAP,
    "nk": K.NK,
}

# smallest boards where n queens fit are 1x1 and 4x4
_NQUEENS_SMALL_OPTIMA = {1: 1, 2: 1, 3: 2}


@dataclass(frozen=True)
class TrapParams:
    k: int = 5

    def segments(self, n: int) -> int:
        if self.k < 1 or n % self.k:
            raise ConfigurationError(f"trap needs n divisible by k={self.k}, got n={n}")
        return n // self.k


@dataclass(frozen=True, eq=False)
class NkLandscape:
    """Random NK landscape; all randomness is drawn at construction."""

    n: int
    k: int
    neighbors: np.ndarray  # shape (n, k), 0-based, self-neighbours allowed
    tables: np.ndarray  # shape (n, 2**(k+1)), entries in (0, 1)
    seed: int

    @classmethod
    def generate(cls, n: int, k: int = 1, seed: int = 1) -> NkLandscape:
        if n < 2 or not 0 <= k < n:
            raise ConfigurationError(f"NK landscape needs n >= 2 and 0 <= k < n, got n={n}, k={k}")
        state = RngStream(derive_seed(seed, n, k)).state
        neighbors = np.empty((n, k), dtype=np.int64)
        for i in range(n):
            for j in range(k):
                neighbors[i, j] = randbelow(state, n)
        width = 1 << (k + 1)
        tables = np.empty((n, width))
        for i in range(n):
            for j in range(width):
                u = next_double(state)
                while u == 0.0:
                    u = next_double(state)
                tables[i, j] = u
        return cls(n, k, neighbors, tables, seed)


@functools.lru_cache(maxsize=1)
def load_catalog() -> dict:
    text = resources.files("pcga.problems").joinpath("catalog.yaml").read_text()
    return yaml.safe_load(text)


def catalog_version() -> str:
    return str(load_catalog()["version"])


def catalog_entry(fid: int) -> dict:
    for entry in load_catalog()["problems"]:
        if entry["id"] == fid:
            return entry
    raise ConfigurationError(f"unknown problem id F{fid}; valid ids are 1..25")


def reference_target(fid: int) -> float:
    """Reference ERT target for n = 100."""
    return float(catalog_entry(fid)["reference_target_n100"])


def _is_square(n: int) -> bool:
    r = math.isqrt(n)
    return r * r == n


def check_dimension(fid: int, n: int) -> None:
    """Raise ConfigurationError if F-``fid`` is undefined at dimension n."""
    entry = catalog_entry(fid)
    if n < 1:
        raise ConfigurationError(f"dimension must be positive, got {n}")
    cons = entry.get("constraint") or {}
    if cons.get("square") and not _is_square(n):
        raise ConfigurationError(f"F{fid} ({entry['name']}) needs a square dimension, got {n}")
    if "divisible" in cons and n % cons["divisible"]:
        raise ConfigurationError(f"F{fid} ({entry['name']}) needs n divisible by {cons['divisible']}, got {n}")
    if n < cons.get("min_n", 1):
        raise ConfigurationError(f"F{fid} ({entry['name']}) needs n >= {cons['min_n']}, got {n}")
    if entry["kind"] == "wmodel":
        _layers(entry, n).validate(n)


def _layers(entry: dict, n: int) -> WModelLayers:
    spec = entry.get("layers") or {}
    dummy = spec.get("dummy")
    return WModelLayers(
        dummy_m=None if dummy is None else int(math.floor(n * dummy)),
        neutrality_mu=spec.get("neutrality"),
        epistasis_nu=spec.get("epistasis"),
        ruggedness_gamma=spec.get("ruggedness"),
        dummy_seed=int(load_catalog()["instance_seed"]),
    )


def make_problem(fid: int, n: int) -> Problem:
    """Instance 1 of problem F-``fid`` in dimension ``n``."""
    check_dimension(fid, n)
    entry = catalog_entry(fid)
    kind = entry["kind"]
    params = entry.get("params") or {}
    ip = np.zeros(0, dtype=np.int64)
    fp = np.zeros(0)
    pos = np.zeros(0, dtype=np.int64)
    optimum: float | None = None
    if kind == "onemax" or kind == "leadingones":
        optimum = float(n)
    elif kind == "linear":
        optimum = n * (n + 1) / 2
    elif kind == "wmodel":
        layers = _layers(entry, n)
        ip, fp, pos = layers.compile(n, entry["base"])
        optimum = layers.optimum(n)
    elif kind == "ising_ring":
        optimum = float(n)
    elif kind == "ising_torus":
        optimum = 2.0 * n
    elif kind == "ising_triangular":
        optimum = 3.0 * n
    elif kind == "nqueens":
        side = math.isqrt(n)
        optimum = float(_NQUEENS_SMALL_OPTIMA.get(side, side))
    elif kind == "trap":
        trap = TrapParams(int(params.get("k", 5)))
        ip = np.array([trap.k], dtype=np.int64)
        optimum = float(trap.segments(n))
    elif kind == "nk":
        inst = NkLandscape.generate(n, int(params.get("k", 1)), int(load_catalog()["instance_seed"]))
        ip = np.array([inst.k], dtype=np.int64)
        pos = inst.neighbors.ravel().copy()
        fp = inst.tables.ravel().copy()
    return Problem(
        id=fid, name=entry["name"], n=n, kind=_KINDS[kind],
        iparams=ip, fparams=fp, positions=pos, optimum=optimum,
    )
