"""Counter-based random streams keyed by (seed, purpose, party, iteration).

Every stream is an independent Philox generator derived through
``numpy.random.SeedSequence`` with the stream id as spawn key, so a party's
noise never depends on how many draws other parties made before it.
Normals come from the inverse CDF of 53-bit uniforms.
"""

from __future__ import annotations

import zlib
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RngStream:
    seed: int
    purpose: str = "default"
    party: int = 0
    iteration: int = 0

    def child(self, purpose: str | None = None, party: int | None = None,
              iteration: int | None = None) -> "RngStream":
        return RngStream(
            self.seed,
            self.purpose if purpose is None else purpose,
            self.party if party is None else party,
            self.iteration if iteration is None else iteration,
        )

    def _bit_generator(self) -> np.random.Philox:
        key = (zlib.crc32(self.purpose.encode()), self.party, self.iteration)
        if min(key) < 0:
            raise ValueError(f"stream ids must be non-negative, got {key}")
        return np.random.Philox(np.random.SeedSequence(self.seed & _MASK64, spawn_key=key))

    def uniforms(self, size: int) -> np.ndarray:
        """Uniforms strictly inside (0, 1), on the grid (j + 1/2) / 2**53."""
        bits = self._bit_generator().random_raw(size)
        return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53

    def standard_normal(self, shape: tuple[int, ...]) -> np.ndarray:
        size = int(np.prod(shape))
        return ndtri(self.uniforms(size)).reshape(shape)

    def generator(self) -> np.random.Generator:
        """A numpy Generator on this stream, for plumbing (bootstrap, datasets)."""
        return np.random.Generator(self._bit_generator())


def gaussian_matrix(stream: RngStream, rows: int, cols: int, sigma: float = 1.0) -> np.ndarray:
    """i.i.d. N(0, sigma^2) entries; sigma = 0 gives exact zeros."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return np.zeros((rows, cols))
    return sigma * stream.standard_normal((rows, cols))


class StreamTape:
    """Standard-normal noise tape: one stream per (party, iteration, attempt)."""

    def __init__(self, seed: int, purpose: str = "noise"):
        self.seed = seed
        self.purpose = purpose

    def __call__(self, party: int, iteration: int, shape: tuple[int, int],
                 attempt: int = 0) -> np.ndarray:
        purpose = self.purpose if attempt == 0 else f"{self.purpose}-retry{attempt}"
        return RngStream(self.seed, purpose, party, iteration).standard_normal(shape)


class CachedTape(StreamTape):
    """StreamTape that memoizes draws; lets paired runs reuse identical noise."""

    def __init__(self, seed: int, purpose: str = "noise"):
        super().__init__(seed, purpose)
        self._cache: dict = {}

    def __call__(self, party, iteration, shape, attempt=0):
        key = (party, iteration, tuple(shape), attempt)
        z = self._cache.get(key)
        if z is None:
            z = super().__call__(party, iteration, shape, attempt)
            z.setflags(write=False)
            self._cache[key] = z
        return z
