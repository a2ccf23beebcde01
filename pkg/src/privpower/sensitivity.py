"""Sensitivity rules for the noisy power iteration and a sampling oracle."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import MagnitudeTooLarge, NotSymmetric
from .linalg import max_abs, max_row_l2, mixed_l1_l2, symmetric_eig
from .rng import RngStream, gaussian_matrix


class PolicyKind(enum.Enum):
    PRIOR = "prior"
    IMPROVED_MAX_ROW = "improved"
    RECSYS_SQRT2 = "recsys"
    FIXED_WORST_CASE = "fixed"


@dataclass(frozen=True)
class SensitivityPolicy:
    """Maps the current iterate X (n x p) to the noise scale of the next release.

    PRIOR: sqrt(p) * max|X_ij|.  IMPROVED_MAX_ROW: max_i ||X_i:||_2.
    RECSYS_SQRT2: sqrt(2) * max_i ||X_i:||_2, for interaction-deletion
    adjacency on the normalized item-item matrix.  FIXED_WORST_CASE: a
    constant, non-adaptive bound (1 by default, the row-norm ceiling).
    """

    kind: PolicyKind
    value: float = 1.0

    @classmethod
    def prior(cls):
        return cls(PolicyKind.PRIOR)

    @classmethod
    def improved(cls):
        return cls(PolicyKind.IMPROVED_MAX_ROW)

    @classmethod
    def recsys(cls):
        return cls(PolicyKind.RECSYS_SQRT2)

    @classmethod
    def fixed(cls, value: float = 1.0):
        if not value > 0:
            raise ValueError("fixed sensitivity must be positive")
        return cls(PolicyKind.FIXED_WORST_CASE, value)

    @classmethod
    def from_name(cls, name: str, value: float | None = None):
        kind = PolicyKind(name)
        if kind is PolicyKind.FIXED_WORST_CASE:
            return cls.fixed(1.0 if value is None else value)
        return cls(kind)

    @property
    def name(self) -> str:
        return self.kind.value

    def evaluate(self, x) -> float:
        return evaluate_policy(self, x)


def evaluate_policy(policy: SensitivityPolicy, x) -> float:
    x = np.asarray(x, dtype=np.float64)
    if policy.kind is PolicyKind.PRIOR:
        return math.sqrt(x.shape[1]) * max_abs(x)
    if policy.kind is PolicyKind.IMPROVED_MAX_ROW:
        return max_row_l2(x)
    if policy.kind is PolicyKind.RECSYS_SQRT2:
        return math.sqrt(2) * max_row_l2(x)
    return float(policy.value)


@dataclass(frozen=True)
class CoherenceReport:
    mu0: float
    mu1: float
    n: int
    count: int


def coherence(a, psd_tol: float = 1e-10) -> CoherenceReport:
    """mu0 = max |U_ij| and mu1 = max row norm of the full eigenvector matrix."""
    eig = symmetric_eig(a)
    if eig.eigenvalues.size and eig.eigenvalues[-1] < -psd_tol:
        raise ValueError(f"matrix is not PSD (smallest eigenvalue {eig.eigenvalues[-1]:.3e})")
    u = eig.eigenvectors
    return CoherenceReport(max_abs(u), max_row_l2(u), u.shape[0], u.shape[1])


@dataclass(frozen=True)
class AdjacencyUpdate:
    """Symmetric update C with sqrt(sum_i ||C_i:||_1^2) <= 1."""

    c: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.c, dtype=np.float64)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("update must be square")
        if np.max(np.abs(c - c.T), initial=0.0) > 1e-12:
            raise NotSymmetric("adjacency update must be symmetric")
        if mixed_l1_l2(c) > 1 + 1e-12:
            raise MagnitudeTooLarge(f"constraint value {mixed_l1_l2(c):.6g} exceeds 1")
        object.__setattr__(self, "c", c)

    @property
    def constraint_value(self) -> float:
        return mixed_l1_l2(self.c)

    def response(self, x) -> float:
        """||C x||_F, the change this update causes in A x."""
        return float(np.linalg.norm(self.c @ np.asarray(x, dtype=np.float64)))


def single_entry_update(i: int, j: int, c: float, n: int) -> AdjacencyUpdate:
    """Single-element change of magnitude |c| <= 1.

    Off-diagonal changes are split symmetrically as c (e_i e_j^T + e_j e_i^T) / 2;
    the unsymmetrized single-entry model is kept only as a legacy notion.
    """
    if abs(c) > 1:
        raise MagnitudeTooLarge(f"|c| = {abs(c)} exceeds 1")
    m = np.zeros((n, n))
    if i == j:
        m[i, i] = c
    else:
        m[i, j] = m[j, i] = c / 2
    return AdjacencyUpdate(m)


def random_update(stream: RngStream, n: int) -> AdjacencyUpdate:
    g = gaussian_matrix(stream, n, n)
    c = (g + g.T) / 2
    return AdjacencyUpdate(c / mixed_l1_l2(c))


def brute_force_sensitivity(x, trials: int, stream: RngStream, batch: int = 512) -> float:
    """Max ||C x||_F over ``trials`` random updates scaled onto the constraint boundary.

    A lower bound on the true sensitivity. Updates are drawn in batches from
    one stream; the max-reduction does not depend on batch order.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.shape[0]
    best = 0.0
    done = 0
    block = 0
    while done < trials:
        b = min(batch, trials - done)
        g = stream.child(iteration=block).standard_normal((b, n, n))
        c = (g + np.swapaxes(g, 1, 2)) / 2
        scale = np.sqrt(np.sum(np.sum(np.abs(c), axis=2) ** 2, axis=1))
        c /= scale[:, None, None]
        resp = np.sqrt(np.sum((c @ x) ** 2, axis=(1, 2)))
        best = max(best, float(resp.max()))
        done += b
        block += 1
    return best
