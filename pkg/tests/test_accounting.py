import math
from decimal import Decimal, getcontext

import pytest
from hypothesis import assume, given, strategies as st

from privpower.accounting import (PrivacyBudget, ZcdpLedger, calibrate_sigma, default_delta,
                                  record_gaussian_release, tight_sigma, verify_algorithm_budget,
                                  zcdp_to_dp)
from privpower.errors import InvalidBudget, NonPositiveSigma


def sigma_oracle(eps, delta, L):
    getcontext().prec = 40
    return float((4 * L * (1 / Decimal(delta)).ln()).sqrt() / Decimal(eps))


def test_calibration_matches_high_precision():
    assert sigma_oracle(1, 0.01, 3) == pytest.approx(7.433844, abs=5e-7)
    assert calibrate_sigma(PrivacyBudget(1, 0.01), 3) == pytest.approx(sigma_oracle(1, 0.01, 3), rel=1e-14)


def test_calibration_inverse_in_epsilon():
    a = calibrate_sigma(PrivacyBudget(1, 0.01), 3)
    assert calibrate_sigma(PrivacyBudget(2, 0.01), 3) == pytest.approx(a / 2, rel=1e-15)


def test_gate_rejects_large_delta():
    assert math.exp(-0.25) == pytest.approx(0.7788, abs=1e-4)
    with pytest.raises(InvalidBudget, match="exp"):
        calibrate_sigma(PrivacyBudget(1, 0.9), 3)


def test_budget_fields_validated():
    for eps, delta in ((0, 0.1), (-1, 0.1), (1, 0), (1, 1)):
        with pytest.raises(InvalidBudget):
            PrivacyBudget(eps, delta)


def test_vanishing_noise_budget_is_outside_the_gate():
    with pytest.raises(InvalidBudget):
        PrivacyBudget(1e6, 1e-9).require_valid()


def test_default_delta_is_valid():
    for eps in (0.1, 1, 10, 100, 1000):
        assert PrivacyBudget(eps, default_delta(eps)).valid()


@pytest.mark.parametrize("d,s,rho", [(1, 1, 0.5), (0, 1, 0.0), (2, 4, 0.125)])
def test_release_cost(d, s, rho):
    assert record_gaussian_release(ZcdpLedger(), d, s).rho_total == rho


def test_release_needs_positive_sigma():
    with pytest.raises(NonPositiveSigma):
        record_gaussian_release(ZcdpLedger(), 1, 0)


def test_conversion_examples():
    assert zcdp_to_dp(0, 0.5) == 0
    assert zcdp_to_dp(0.125, math.exp(-2)) == pytest.approx(1.125, rel=1e-15)


def test_conversion_at_calibrated_rho_within_budget():
    eps, delta = 1.0, 0.01
    rho = eps**2 / (8 * math.log(1 / delta))
    # 2 sqrt(rho ln(1/delta)) = eps / sqrt(2) exactly, not eps / 2
    assert zcdp_to_dp(rho, delta) == pytest.approx(rho + eps / math.sqrt(2), rel=1e-15)
    assert zcdp_to_dp(rho, delta) > rho + eps / 2
    assert zcdp_to_dp(rho, delta) <= eps


def test_verify_calibrated_releases():
    b = PrivacyBudget(1, 0.01)
    c = calibrate_sigma(b, 3)
    rel = [(0.7, 0.7 * c), (0.9, 0.9 * c), (1.0, c)]
    assert verify_algorithm_budget(b, 3, rel).satisfied
    halved = rel[:2] + [(1.0, c / 2)]
    check = verify_algorithm_budget(b, 3, halved)
    assert check.rho > verify_algorithm_budget(b, 3, rel).rho


def test_verify_empty():
    check = verify_algorithm_budget(PrivacyBudget(1, 0.01), 0, [])
    assert check.epsilon_effective == 0 and check.satisfied


def test_verify_length_mismatch():
    with pytest.raises(ValueError):
        verify_algorithm_budget(PrivacyBudget(1, 0.01), 2, [(1, 1)])


@given(st.floats(0.01, 100), st.floats(1e-15, 0.5), st.integers(1, 30))
def test_tight_sigma_spends_exactly_epsilon(eps, delta, L):
    c = tight_sigma(PrivacyBudget(eps, delta), L)
    check = verify_algorithm_budget(PrivacyBudget(eps, delta), L, [(1.0, c)] * L)
    assert check.epsilon_effective == pytest.approx(eps, rel=1e-9)


@given(st.floats(0.01, 50), st.floats(1e-15, 0.5), st.integers(1, 20))
def test_calibrated_cost_independent_of_sensitivity_scale(eps, delta, L):
    b = PrivacyBudget(eps, delta)
    assume(b.valid())
    c = calibrate_sigma(b, L)
    a = verify_algorithm_budget(b, L, [(1.0, c)] * L).rho
    z = verify_algorithm_budget(b, L, [(3.7, 3.7 * c)] * L).rho
    assert a == pytest.approx(z, rel=1e-12)
    # total cost eps^2 / (8 ln(1/delta)) does not depend on L
    assert a == pytest.approx(eps**2 / (8 * math.log(1 / delta)), rel=1e-12)


@given(st.lists(st.tuples(st.floats(0, 10), st.floats(0.1, 10)), max_size=20))
def test_ledger_total_order_independent(rel):
    fwd, rev = ZcdpLedger(), ZcdpLedger()
    for d, s in rel:
        fwd = fwd.record(d, s)
    for d, s in reversed(rel):
        rev = rev.record(d, s)
    assert fwd.rho_total == rev.rho_total
