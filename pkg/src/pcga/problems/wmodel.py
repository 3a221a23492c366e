"""W-model layers: dummy bits, neutrality, epistasis and ruggedness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import ConfigurationError, scratch_for
from ..rng import RngStream, derive_seed, randbelow
from . import kernels as K

_BASES = {"onemax": K.ONEMAX, "leadingones": K.LEADINGONES}


@dataclass(frozen=True)
class WModelLayers:
    """Optional W-model transformations; ``None`` disables a layer.

    Layers apply in the order dummy, neutrality, epistasis, then the base
    function, then ruggedness on the resulting value.
    """

    dummy_m: int | None = None
    neutrality_mu: int | None = None
    epistasis_nu: int | None = None
    ruggedness_gamma: int | None = None
    dummy_seed: int = 1

    def reduced_length(self, n: int) -> int:
        """Length of the string the base function finally sees."""
        m = n if self.dummy_m is None else self.dummy_m
        if self.neutrality_mu and self.neutrality_mu > 1:
            m //= self.neutrality_mu
        return m

    def validate(self, n: int) -> None:
        if self.dummy_m is not None and not 1 <= self.dummy_m <= n:
            raise ConfigurationError(f"dummy layer keeps {self.dummy_m} of {n} bits")
        if self.neutrality_mu is not None and self.neutrality_mu < 1:
            raise ConfigurationError("neutrality block size must be positive")
        if self.epistasis_nu is not None and not 1 <= self.epistasis_nu <= 5:
            # beyond 5 bits the skipped-input rule wraps and stops being a bijection
            raise ConfigurationError(f"epistasis block size must lie in [1, 5], got {self.epistasis_nu}")
        if self.ruggedness_gamma not in (None, 1, 2, 3):
            raise ConfigurationError(f"unknown ruggedness variant {self.ruggedness_gamma}")
        if self.reduced_length(n) < 1:
            raise ConfigurationError(f"layers reduce n={n} to an empty string")

    def dummy_positions(self, n: int) -> np.ndarray:
        """Sorted positions kept by the dummy layer (seeded, fixed per n)."""
        if self.dummy_m is None:
            return np.zeros(0, dtype=np.int64)
        state = RngStream(derive_seed(self.dummy_seed, n, self.dummy_m)).state
        idx = np.arange(n, dtype=np.int64)
        for i in range(self.dummy_m):
            j = i + int(randbelow(state, n - i))
            idx[i], idx[j] = idx[j], idx[i]
        return np.sort(idx[: self.dummy_m])

    def compile(self, n: int, base: str):
        """Kernel arrays ``(ip, fp, pos)`` for this layer stack at dimension n."""
        self.validate(n)
        m = self.reduced_length(n)
        ip = np.array(
            [
                _BASES[base],
                self.neutrality_mu or 0,
                self.epistasis_nu or 0,
                self.ruggedness_gamma or K.RUGGED_NONE,
                int(self.dummy_m is not None),
            ],
            dtype=np.int64,
        )
        fp = K.ruggedness_3_table(m) if self.ruggedness_gamma == 3 else np.zeros(0)
        return ip, fp, self.dummy_positions(n)

    def optimum(self, n: int) -> float:
        m = self.reduced_length(n)
        if self.ruggedness_gamma == 1:
            return float(K.ruggedness_1(float(m), m))
        return float(m)


def _base_name(base) -> str:
    if isinstance(base, str):
        key = base.replace("_", "").lower()
    else:
        key = getattr(base, "__name__", "").replace("_", "").lower()
    if key not in _BASES:
        raise ValueError(f"W-model base must be onemax or leading_ones, got {base!r}")
    return key


def apply_wmodel(x: np.ndarray, layers: WModelLayers, base="onemax") -> float:
    """Evaluate ``x`` through the W-model layers on top of ``base``."""
    ip, fp, pos = layers.compile(x.size, _base_name(base))
    x = np.ascontiguousarray(x, dtype=np.uint8)
    return float(K.wmodel(x, ip, fp, pos, scratch_for(x.size)))
