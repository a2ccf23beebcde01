"""Federated private power method over simulated secure aggregation.

Each party i holds a symmetric share A_i with sum_i A_i = A. Per iteration
the server broadcasts X, party i returns A_i X + G_i with G_i drawn at scale
Delta * nu where nu = c / sqrt(s), and the server only ever sees the sum.
Secure aggregation is simulated as an exact sum in a fixed order; no
cryptography, no dropouts, no quantization.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import ShapeMismatch
from .linalg import _check_symmetric
from .ppm import IterationTrace, PowerMethodConfig, oracle_basis, power_iterate
from .rng import StreamTape


@dataclass(frozen=True)
class PartyShard:
    """A party's dense local share of the global matrix."""

    index: int
    a: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.a, dtype=np.float64)
        _check_symmetric(a)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    def apply(self, x: np.ndarray) -> np.ndarray:
        return self.a @ x

    def dense(self) -> np.ndarray:
        return self.a


@dataclass(frozen=True)
class InteractionShard:
    """A user's share weight * r^T r, stored as the item indices of r."""

    index: int
    items: np.ndarray
    weight: float
    n: int

    def apply(self, x: np.ndarray) -> np.ndarray:
        out = np.zeros((self.n, x.shape[1]))
        out[self.items] = self.weight * x[self.items].sum(axis=0)
        return out

    def dense(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        m[np.ix_(self.items, self.items)] = self.weight
        return m


def sec_agg(shares: Sequence[np.ndarray]) -> np.ndarray:
    """Sum of the parties' matrices, folded left in ascending party order."""
    if not shares:
        raise ValueError("secure aggregation needs at least one share")
    shape = np.shape(shares[0])
    total = np.array(shares[0], dtype=np.float64, copy=True)
    for sh in shares[1:]:
        if np.shape(sh) != shape:
            raise ShapeMismatch(f"share shape {np.shape(sh)} differs from {shape}")
        total += sh
    return total


def run_federated(shards: Sequence, cfg: PowerMethodConfig, *,
                  oracle: np.ndarray | None = None, tape: Callable | None = None,
                  executor: Executor | None = None) -> tuple[np.ndarray, IterationTrace]:
    """Federated private power method.

    Party i draws its noise from stream (seed, "noise", i, iteration) unless
    a ``tape`` is supplied. The trace's sigma is the aggregate scale
    Delta * nu * sqrt(s), which equals the centralized Delta * c.
    """
    if not shards:
        raise ValueError("need at least one party")
    n = shards[0].n
    if any(sh.n != n for sh in shards):
        raise ShapeMismatch("parties hold shares of different sizes")
    s = len(shards)
    tape = tape or StreamTape(cfg.seed)
    skipped = False
    if oracle is None and cfg.track_oracle:
        oracle = oracle_basis(sum(sh.dense() for sh in shards), cfg.k)
        skipped = oracle is None

    def release(x, it, sigma, attempt):
        nu_scale = sigma / math.sqrt(s)

        def local(shard):
            y = shard.apply(x)
            if nu_scale > 0:
                y += nu_scale * tape(shard.index, it, (n, cfg.p), attempt)
            return y

        if executor is None:
            ys = [local(sh) for sh in shards]
        else:
            ys = list(executor.map(local, shards))
        return sec_agg(ys), None

    x, trace = power_iterate(n, cfg, release, oracle)
    trace.oracle_skipped = skipped
    return x, trace


OVERHEAD_COLUMNS = ("mode", "s", "n", "p", "client_comm", "server_comm",
                    "client_flops", "server_flops")
COST_MODEL = ("unit-cost model: l=ceil(log2 s); SecAgg client comm = l + n*p, "
              "client flops = l^2 + n*p*max(l,1); plain client comm = flops = n*p; "
              "server = s * client")


@dataclass(frozen=True)
class OverheadReport:
    mode: str
    s: int
    n: int
    p: int
    client_comm: int
    server_comm: int
    client_flops: int
    server_flops: int

    def row(self) -> list:
        return [getattr(self, c) for c in OVERHEAD_COLUMNS]


def overhead(s: int, n: int, p: int, mode: str = "secagg") -> OverheadReport:
    """Per-iteration aggregation cost under the declared unit-cost model."""
    if min(s, n, p) < 1:
        raise ValueError("s, n and p must be positive")
    np_ = n * p
    if mode == "secagg":
        lg = (s - 1).bit_length()  # ceil(log2 s)
        comm = lg + np_
        flops = lg * lg + np_ * max(lg, 1)
    elif mode == "plain":
        comm = flops = np_
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return OverheadReport(mode, s, n, p, comm, s * comm, flops, s * flops)


def overhead_csv(reports: Sequence[OverheadReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(OVERHEAD_COLUMNS)
    for r in reports:
        w.writerow(r.row())
    return buf.getvalue()
