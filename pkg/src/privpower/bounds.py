"""Convergence-bound calculators and the first-step sensitivity ratio study.

All big-O bounds are evaluated with constant 1 and natural logs, so only
ratios between bounds computed here are meaningful, not absolute values.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numpy as np

from .accounting import PrivacyBudget
from .errors import ZeroGap
from .linalg import max_abs, max_row_l2, qr_orthonormalize
from .rng import RngStream, gaussian_matrix

BOUND_CONVENTION = "bounds use constant 1 and natural logs; compare ratios only"


@dataclass(frozen=True)
class SpectrumSummary:
    """Eigenvalues (descending) plus target rank k, intermediate rank q, iteration rank p."""

    eigenvalues: tuple[float, ...]
    k: int
    q: int
    p: int
    tau: float = 1.0

    def __post_init__(self):
        lam = tuple(float(v) for v in self.eigenvalues)
        object.__setattr__(self, "eigenvalues", lam)
        n = len(lam)
        if any(a < b for a, b in zip(lam, lam[1:])):
            raise ValueError("eigenvalues must be sorted in descending order")
        if lam and lam[-1] < 0:
            raise ValueError("eigenvalues must be non-negative")
        if not (1 <= self.k <= self.q and 2 * self.q <= self.p <= n):
            raise ValueError(f"need 1 <= k <= q, 2q <= p <= n; got k={self.k}, q={self.q}, p={self.p}, n={n}")
        if not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    @property
    def gap(self) -> float:
        return self.eigenvalues[self.k - 1] - self.eigenvalues[self.q]

    @property
    def oversampling(self) -> int:
        return self.p - self.k

    def require_gap(self) -> float:
        g = self.gap
        if not g > 0:
            raise ZeroGap(f"lambda_k - lambda_(q+1) = {g} is not positive")
        return g


def _noise_factor(spectrum: SpectrumSummary, budget: PrivacyBudget, iterations: int) -> float:
    if iterations < 1:
        raise ValueError("need at least one iteration")
    # log L is 0 at L = 1, so every bound is 0 there; kept as the formula states
    return math.sqrt(iterations * spectrum.n * math.log(1 / budget.delta) * math.log(iterations)) \
        / (budget.epsilon * spectrum.require_gap())


def eta_runtime_dependent(spectrum: SpectrumSummary, budget: PrivacyBudget, iterations: int,
                          max_row_stat: float) -> float:
    """Noise tolerance driven by the largest iterate row norm seen at runtime."""
    return max_row_stat * _noise_factor(spectrum, budget, iterations)


def eta_runtime_independent(spectrum: SpectrumSummary, budget: PrivacyBudget, iterations: int,
                            mu0: float, mu1: float) -> tuple[float, str]:
    """Coherence-based bound; returns (value, branch) with branch "mu0" or "mu1"."""
    mu0_branch = mu0 * math.sqrt(spectrum.p * math.log(spectrum.n))
    if mu0_branch < mu1:
        coef, branch = mu0_branch, "mu0"
    else:
        coef, branch = mu1, "mu1"
    return coef * _noise_factor(spectrum, budget, iterations), branch


def eta_prior(spectrum: SpectrumSummary, budget: PrivacyBudget, iterations: int,
              max_abs_stat: float) -> float:
    """The earlier entrywise bound, under the same constant convention."""
    return max_abs_stat * math.sqrt(4 * spectrum.p) * _noise_factor(spectrum, budget, iterations)


def ratio_theoretical(k: int, n: int) -> float:
    """Approximate E[prior sensitivity] / E[max-row sensitivity] for a random first iterate.

    Treats the squared row norms of a Gaussian matrix normalized by the
    diagonal of Z^T Z as inverse-chi-square-like with the mean and variance
    below, then takes extreme values over kn entries versus n rows.
    """
    if n <= 4:
        raise ValueError("need n > 4")
    if not 1 <= k <= n:
        raise ValueError("need 1 <= k <= n")
    mu = n / (n - 2)
    var = 2 * n**2 * (n - 1) / ((n - 2) ** 2 * (n - 4))
    prior_sq = math.sqrt(2 * var * math.log(k * n) * k**2 / n**2) + k * mu / n
    hat_sq = math.sqrt(2 * var * math.log(n) * k / n**2) + k * mu / n
    return math.sqrt(prior_sq / hat_sq)


def default_k_grid(n: int, step: int = 64) -> tuple[int, ...]:
    return tuple(range(step, n + 1, step)) or (n,)


@dataclass(frozen=True)
class RatioStudyConfig:
    n: int = 1000
    k_grid: tuple[int, ...] = field(default=())
    trials: int = 5
    seed: int = 0

    def __post_init__(self):
        grid = tuple(int(k) for k in (self.k_grid or default_k_grid(self.n)))
        object.__setattr__(self, "k_grid", grid)
        if self.trials < 1:
            raise ValueError("need at least one trial")
        if any(not 1 <= k <= self.n for k in grid):
            raise ValueError(f"every k must lie in [1, {self.n}]")


@dataclass(frozen=True)
class RatioRow:
    n: int
    k: int
    ratio_empirical: float
    ratio_theoretical: float
    min_sample_ratio: float  # smallest per-trial prior / max-row ratio


def ratio_at(n: int, k: int, trials: int, seed: int) -> RatioRow:
    prior, hat, per = [], [], []
    for t in range(trials):
        g = gaussian_matrix(RngStream(seed, "ratio", k, t), n, k)
        # Householder is much faster than CGS2 at this size; the basis is equally orthonormal
        x = qr_orthonormalize(g, "householder")[0]
        dp = math.sqrt(k) * max_abs(x)
        dh = max_row_l2(x)
        prior.append(dp)
        hat.append(dh)
        per.append(dp / dh)
    return RatioRow(n, k, float(np.mean(prior) / np.mean(hat)), ratio_theoretical(k, n), min(per))


def ratio_empirical(cfg: RatioStudyConfig, executor=None) -> list[RatioRow]:
    """First-step sensitivity ratio mean(prior) / mean(max-row) over ``trials`` draws per k."""
    if executor is None:
        return [ratio_at(cfg.n, k, cfg.trials, cfg.seed) for k in cfg.k_grid]
    futures = [executor.submit(ratio_at, cfg.n, k, cfg.trials, cfg.seed) for k in cfg.k_grid]
    return [f.result() for f in futures]


RATIO_COLUMNS = ("n", "k", "ratio_empirical", "ratio_theoretical")


def ratio_csv(rows: list[RatioRow], header: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    if header:
        w.writerow(RATIO_COLUMNS)
    for r in sorted(rows, key=lambda r: (r.n, r.k)):
        w.writerow([r.n, r.k, repr(r.ratio_empirical), repr(r.ratio_theoretical)])
    return buf.getvalue()
