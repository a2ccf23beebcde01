"""zCDP accountant for the Gaussian noise added by the power method.

All logarithms are natural. A release of a sensitivity-``delta`` query with
N(0, sigma^2) noise costs rho = delta^2 / (2 sigma^2); costs add under
adaptive composition and convert to (eps, delta)-DP via
rho + 2 sqrt(rho ln(1/delta)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidBudget, NonPositiveSigma

VERIFY_SLACK = 1e-12


@dataclass(frozen=True)
class PrivacyBudget:
    epsilon: float
    delta: float

    def __post_init__(self):
        if not self.epsilon > 0:
            raise InvalidBudget(f"epsilon must be positive, got {self.epsilon}")
        if not 0 < self.delta < 1:
            raise InvalidBudget(f"delta must lie in (0, 1), got {self.delta}")

    def valid(self) -> bool:
        return self.delta <= math.exp(-self.epsilon / 4)

    def require_valid(self) -> "PrivacyBudget":
        if not self.valid():
            raise InvalidBudget(
                f"delta={self.delta:g} violates delta <= exp(-epsilon/4) = "
                f"{math.exp(-self.epsilon / 4):.6g} for epsilon={self.epsilon:g}"
            )
        return self


def default_delta(epsilon: float) -> float:
    return min(0.01, math.exp(-epsilon / 4) / 2)


def calibrate_sigma(budget: PrivacyBudget, iterations: int) -> float:
    """Noise multiplier eps^-1 sqrt(4 L ln(1/delta)); multiply by the sensitivity."""
    budget.require_valid()
    if iterations < 1:
        raise ValueError("need at least one iteration")
    return math.sqrt(4 * iterations * math.log(1 / budget.delta)) / budget.epsilon


def tight_sigma(budget: PrivacyBudget, iterations: int) -> float:
    """Smallest multiplier whose composed zCDP cost converts back to exactly epsilon.

    Solves rho + 2 sqrt(rho ln(1/delta)) = epsilon for the total rho and splits
    it evenly over the iterations. Not used by default.
    """
    if iterations < 1:
        raise ValueError("need at least one iteration")
    log_term = math.log(1 / budget.delta)
    rho = (math.sqrt(log_term + budget.epsilon) - math.sqrt(log_term)) ** 2
    return math.sqrt(iterations / (2 * rho))


@dataclass(frozen=True)
class LedgerEntry:
    delta_sensitivity: float
    sigma: float
    rho: float


@dataclass(frozen=True)
class ZcdpLedger:
    entries: tuple[LedgerEntry, ...] = field(default_factory=tuple)

    @property
    def rho_total(self) -> float:
        # fsum is correctly rounded, so the total does not depend on record order
        return math.fsum(e.rho for e in self.entries)

    def record(self, delta_sensitivity: float, sigma: float) -> "ZcdpLedger":
        return record_gaussian_release(self, delta_sensitivity, sigma)


def record_gaussian_release(ledger: ZcdpLedger, delta_sensitivity: float, sigma: float) -> ZcdpLedger:
    if not sigma > 0:
        raise NonPositiveSigma(f"sigma must be positive, got {sigma}")
    if delta_sensitivity < 0:
        raise ValueError("sensitivity must be non-negative")
    rho = delta_sensitivity**2 / (2 * sigma**2)
    return ZcdpLedger(ledger.entries + (LedgerEntry(delta_sensitivity, sigma, rho),))


def zcdp_to_dp(rho: float, delta: float) -> float:
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if not 0 < delta < 1:
        raise ValueError("delta must lie in (0, 1)")
    return rho + 2 * math.sqrt(rho * math.log(1 / delta))


@dataclass(frozen=True)
class BudgetCheck:
    epsilon_effective: float
    satisfied: bool
    rho: float


def verify_algorithm_budget(budget: PrivacyBudget, iterations: int,
                            releases: list[tuple[float, float]]) -> BudgetCheck:
    """Compose every (sensitivity, sigma) release and compare against the budget."""
    if len(releases) != iterations:
        raise ValueError(f"expected {iterations} releases, got {len(releases)}")
    ledger = ZcdpLedger()
    for d, s in releases:
        ledger = ledger.record(d, s)
    rho = ledger.rho_total
    eps = zcdp_to_dp(rho, budget.delta)
    return BudgetCheck(eps, eps <= budget.epsilon + VERIFY_SLACK, rho)
