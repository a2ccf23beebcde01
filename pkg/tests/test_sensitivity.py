import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from privpower.errors import MagnitudeTooLarge, NotSymmetric
from privpower.linalg import max_row_l2
from privpower.rng import RngStream
from privpower.sensitivity import (AdjacencyUpdate, PolicyKind, SensitivityPolicy,
                                   brute_force_sensitivity, coherence, random_update,
                                   single_entry_update)

from conftest import random_psd


def test_identity_slice_policies():
    x = np.eye(6)[:, :4]
    assert SensitivityPolicy.prior().evaluate(x) == pytest.approx(2.0)
    assert SensitivityPolicy.improved().evaluate(x) == 1.0
    assert SensitivityPolicy.recsys().evaluate(x) == pytest.approx(math.sqrt(2))
    assert SensitivityPolicy.fixed(3.5).evaluate(x) == 3.5
    assert SensitivityPolicy.fixed().evaluate(x) == 1.0


def test_row_with_unit_norm():
    x = np.zeros((3, 2))
    x[0] = (0.6, 0.8)
    x[1] = (0.8, -0.6)
    assert SensitivityPolicy.improved().evaluate(x) == pytest.approx(1.0)


def test_from_name():
    assert SensitivityPolicy.from_name("recsys").kind is PolicyKind.RECSYS_SQRT2
    assert SensitivityPolicy.from_name("fixed", 2.0).value == 2.0
    with pytest.raises(ValueError):
        SensitivityPolicy.from_name("nope")


def test_coherence_identity():
    r = coherence(np.eye(4))
    assert (r.mu0, r.mu1) == (1.0, 1.0)


def test_coherence_rotated():
    c = math.cos(math.pi / 4)
    q = np.array([[c, -c], [c, c]])
    r = coherence(q @ np.diag([2.0, 1.0]) @ q.T)
    assert r.mu0 == pytest.approx(1 / math.sqrt(2))
    assert r.mu1 == pytest.approx(1.0)


def test_coherence_rejects_indefinite():
    with pytest.raises(ValueError):
        coherence(np.diag([1.0, -1.0]))


@given(st.integers(1, 12), st.integers(0, 10**6))
def test_coherence_ordering(n, seed):
    r = coherence(random_psd(n, seed, rank=max(1, n // 2)))
    assert r.mu0 <= r.mu1 + 1e-12 <= 1 + 2e-12


def test_single_entry_updates():
    assert single_entry_update(0, 0, 1, 3).constraint_value == 1
    assert single_entry_update(0, 1, 1, 3).constraint_value == pytest.approx(math.sqrt(0.5))
    with pytest.raises(MagnitudeTooLarge):
        single_entry_update(0, 0, 2, 3)


def test_adjacency_validation():
    with pytest.raises(NotSymmetric):
        AdjacencyUpdate(np.array([[0.0, 0.5], [0.0, 0.0]]))
    with pytest.raises(MagnitudeTooLarge):
        AdjacencyUpdate(np.eye(2))


def test_bound_attained_by_corner_update():
    x = np.eye(5)[:, :2]
    assert single_entry_update(0, 0, 1, 5).response(x) == 1 == max_row_l2(x)


def test_zero_trials():
    assert brute_force_sensitivity(np.eye(3)[:, :1], 0, RngStream(0)) == 0


@given(st.integers(2, 10), st.integers(1, 4), st.integers(0, 10**6))
def test_random_update_response_below_max_row(n, p, seed):
    p = min(p, n)
    x = np.linalg.qr(np.random.default_rng(seed).standard_normal((n, p)))[0]
    c = random_update(RngStream(seed, "update"), n)
    assert c.constraint_value == pytest.approx(1.0)
    bound = SensitivityPolicy.improved().evaluate(x)
    assert c.response(x) <= bound + 1e-10
    assert bound <= SensitivityPolicy.prior().evaluate(x) + 1e-12


def test_brute_force_independent_of_batching():
    x = np.linalg.qr(np.random.default_rng(1).standard_normal((6, 2)))[0]
    s = RngStream(4, "bf")
    assert brute_force_sensitivity(x, 300, s, batch=300) != 0
    # batches come from per-block child streams, so batch size changes the draws
    # but every value stays under the bound
    for batch in (1, 7, 300):
        assert brute_force_sensitivity(x, 300, s, batch=batch) <= max_row_l2(x) + 1e-10
