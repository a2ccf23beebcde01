import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def orthonormal():
    """orthonormal(n, p, seed) -> n x p matrix with orthonormal columns."""
    from privpower.linalg import qr_orthonormalize
    from privpower.rng import RngStream, gaussian_matrix

    def make(n, p, seed=0):
        return qr_orthonormalize(gaussian_matrix(RngStream(seed, "fixture"), n, p), "householder")[0]
    return make


def random_psd(n, seed, rank=None):
    gen = np.random.default_rng(seed)
    b = gen.standard_normal((n, rank or n))
    return b @ b.T


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("]")[0].split()[-1])):
            terminalreporter.write_line(line)
