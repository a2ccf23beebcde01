"""Centralized privacy-preserving randomized power iteration.

Each iteration releases Y = A X + G with G ~ N(0, (Delta * c)^2), where Delta
is the sensitivity policy evaluated on the iterate being multiplied and c
the calibrated noise multiplier, then re-orthonormalizes Y by QR.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .accounting import PrivacyBudget, ZcdpLedger, calibrate_sigma, verify_algorithm_budget
from .errors import RankDeficient
from .linalg import (EIG_SIZE_LIMIT, _check_symmetric, _gram_top_eigenvalue, max_row_l2,
                     qr_orthonormalize, spectral_norm, symmetric_eig)
from .rng import RngStream, StreamTape, gaussian_matrix
from .sensitivity import SensitivityPolicy

TRACE_COLUMNS = ("iter", "delta", "sigma", "max_row_l2", "proj_err", "rho_cum")


@dataclass(frozen=True)
class PowerMethodConfig:
    """Inputs of one power-method run.

    ``budget=None`` with no ``noise_multiplier`` runs the noiseless method.
    ``noise_multiplier`` replaces the calibrated multiplier (noise studies);
    the accountant still charges every release against ``budget`` if given.
    """

    k: int = 1
    p: int = 32
    iterations: int = 3
    budget: PrivacyBudget | None = None
    policy: SensitivityPolicy = field(default_factory=SensitivityPolicy.improved)
    seed: int = 0
    noise_multiplier: float | None = None
    track_oracle: bool = False
    qr_method: str = "cgs2"

    def __post_init__(self):
        if self.k < 1 or self.p < self.k:
            raise ValueError(f"need 1 <= k <= p, got k={self.k}, p={self.p}")
        if self.iterations < 1:
            raise ValueError("need at least one iteration")
        if self.budget is not None:
            self.budget.require_valid()
        if self.noise_multiplier is not None and self.noise_multiplier < 0:
            raise ValueError("noise multiplier must be non-negative")

    def multiplier(self) -> float:
        if self.noise_multiplier is not None:
            return self.noise_multiplier
        if self.budget is None:
            return 0.0
        return calibrate_sigma(self.budget, self.iterations)


@dataclass
class IterationRecord:
    iteration: int
    delta: float
    sigma: float
    max_row_l2: float
    proj_err: float
    rho_cum: float
    attempts: int = 1
    noise_norm: float = math.nan
    noise_proj_norm: float = math.nan


@dataclass
class IterationTrace:
    records: list[IterationRecord] = field(default_factory=list)
    ledger: ZcdpLedger = field(default_factory=ZcdpLedger)
    epsilon_effective: float | None = None
    satisfied: bool | None = None
    oracle_skipped: bool = False

    def __len__(self):
        return len(self.records)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.records:
            w.writerow([r.iteration] + [repr(float(v)) for v in
                       (r.delta, r.sigma, r.max_row_l2, r.proj_err, r.rho_cum)])
        return buf.getvalue()


def projection_error(x, u_k) -> float:
    """||(I - X X^T) U_k||_2 by power iteration on the k x k residual Gram matrix."""
    x = np.asarray(x, dtype=np.float64)
    u_k = np.asarray(u_k, dtype=np.float64)
    resid = u_k - x @ (x.T @ u_k)
    if not np.any(resid):
        return 0.0
    val, _ = _gram_top_eigenvalue(resid.T @ resid, 1e-12, 2000)
    return val


def matrix_error(x, a) -> float:
    """||(I - X X^T) A||_2^2."""
    x = np.asarray(x, dtype=np.float64)
    a = np.asarray(a, dtype=np.float64)
    return spectral_norm(a - x @ (x.T @ a), tol=1e-12, max_iter=2000)[0] ** 2


def initial_iterate(n: int, cfg: PowerMethodConfig) -> np.ndarray:
    g0 = gaussian_matrix(RngStream(cfg.seed, "init"), n, cfg.p)
    return qr_orthonormalize(g0, cfg.qr_method)[0]


# release(x_prev, iteration, sigma_l, attempt) -> (Y, aggregate noise or None)
Release = Callable[[np.ndarray, int, float, int], tuple[np.ndarray, "np.ndarray | None"]]


def power_iterate(n: int, cfg: PowerMethodConfig, release: Release,
                  oracle: np.ndarray | None = None) -> tuple[np.ndarray, IterationTrace]:
    """Shared loop of the centralized and federated methods.

    On a rank-deficient QR the release is redrawn once from a fresh noise
    stream; both draws are charged to the ledger.
    """
    if cfg.p > n:
        raise ValueError(f"iteration rank p={cfg.p} exceeds n={n}")
    mult = cfg.multiplier()
    trace = IterationTrace()
    releases: list[tuple[float, float]] = []
    x = initial_iterate(n, cfg)
    for it in range(1, cfg.iterations + 1):
        delta = cfg.policy.evaluate(x)
        sigma = delta * mult
        row = max_row_l2(x)
        for attempt in range(2):
            y, g = release(x, it, sigma, attempt)
            if sigma > 0:
                trace.ledger = trace.ledger.record(delta, sigma)
                releases.append((delta, sigma))
            try:
                x_next = qr_orthonormalize(y, cfg.qr_method)[0]
                break
            except RankDeficient:
                if attempt == 1:
                    raise
        x = x_next
        rec = IterationRecord(
            iteration=it, delta=delta, sigma=sigma, max_row_l2=row,
            proj_err=projection_error(x, oracle) if oracle is not None else math.nan,
            rho_cum=trace.ledger.rho_total, attempts=attempt + 1,
        )
        if g is not None:
            rec.noise_norm = spectral_norm(g)[0]
            if oracle is not None:
                rec.noise_proj_norm = spectral_norm(oracle.T @ g)[0]
        trace.records.append(rec)
    if cfg.budget is not None:
        check = verify_algorithm_budget(cfg.budget, len(releases), releases)
        trace.epsilon_effective = check.epsilon_effective
        trace.satisfied = check.satisfied
    return x, trace


def oracle_basis(a: np.ndarray, k: int) -> np.ndarray | None:
    if a.shape[0] > EIG_SIZE_LIMIT:
        return None
    return symmetric_eig(a).top(k)


def run_centralized(a, cfg: PowerMethodConfig, *, oracle: np.ndarray | None = None,
                    tape: Callable | None = None) -> tuple[np.ndarray, IterationTrace]:
    """Private power method on a symmetric PSD matrix held by one curator.

    ``tape(party, iteration, shape, attempt)`` supplies standard normals;
    the default draws party 0's stream keyed by ``cfg.seed``.
    """
    a = np.asarray(a, dtype=np.float64)
    _check_symmetric(a)
    n = a.shape[0]
    tape = tape or StreamTape(cfg.seed)
    skipped = False
    if oracle is None and cfg.track_oracle:
        oracle = oracle_basis(a, cfg.k)
        skipped = oracle is None

    def release(x, it, sigma, attempt):
        y = a @ x
        if sigma == 0:
            return y, None
        g = sigma * tape(0, it, (n, cfg.p), attempt)
        return y + g, g

    x, trace = power_iterate(n, cfg, release, oracle)
    trace.oracle_skipped = skipped
    return x, trace
