import numpy as np
import pytest
from hypothesis import given, strategies as st

from privpower.rng import CachedTape, RngStream, StreamTape, gaussian_matrix


def test_zero_sigma_gives_zeros():
    assert not np.any(gaussian_matrix(RngStream(1), 4, 3, sigma=0.0))


def test_negative_sigma_rejected():
    with pytest.raises(ValueError):
        gaussian_matrix(RngStream(1), 2, 2, sigma=-1.0)


def test_moments_at_1e5_entries():
    g = gaussian_matrix(RngStream(7, "moments"), 1000, 100)
    # standard errors are about 0.003 (mean) and 0.0045 (variance)
    assert abs(g.mean()) < 0.02
    assert abs(g.var() - 1) < 0.05


def test_same_stream_same_draws():
    s = RngStream(3, "noise", 2, 5)
    assert np.array_equal(gaussian_matrix(s, 5, 4), gaussian_matrix(s, 5, 4))


def test_streams_differ_by_every_key_component():
    base = RngStream(3, "noise", 2, 5).standard_normal((8,))
    for other in (RngStream(4, "noise", 2, 5), RngStream(3, "init", 2, 5),
                  RngStream(3, "noise", 3, 5), RngStream(3, "noise", 2, 6)):
        assert not np.array_equal(base, other.standard_normal((8,)))


def test_prefix_stability():
    # a longer draw extends a shorter one from the same stream
    s = RngStream(9, "x")
    assert np.array_equal(s.uniforms(10), s.uniforms(50)[:10])


def test_tape_retry_uses_fresh_stream():
    tape = StreamTape(1)
    assert not np.array_equal(tape(0, 1, (3, 3)), tape(0, 1, (3, 3), attempt=1))


def test_cached_tape_matches_and_is_read_only():
    a, b = CachedTape(5), StreamTape(5)
    x = a(2, 3, (4, 2))
    assert np.array_equal(x, b(2, 3, (4, 2)))
    assert a(2, 3, (4, 2)) is x
    with pytest.raises(ValueError):
        x[0, 0] = 1.0


@given(st.integers(0, 2**63), st.integers(0, 1000), st.integers(0, 1000))
def test_uniforms_strictly_inside_unit_interval(seed, party, it):
    u = RngStream(seed, "u", party, it).uniforms(64)
    assert np.all((u > 0) & (u < 1))
