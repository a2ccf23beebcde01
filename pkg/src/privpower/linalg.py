"""Dense linear algebra used by the power method and its oracles.

Matrices are plain float64 numpy arrays. The routines here are deliberately
simple: Gram-Schmidt QR with one re-orthogonalization pass, a parallel-order
Jacobi eigensolver used only as ground truth, and power-iteration norms.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import IO

import numpy as np

from .errors import NotSymmetric, RankDeficient
from .rng import RngStream

RANK_TOL = 1e-12
# Jacobi costs O(n^3) per sweep in numpy-vectorized steps; past this it gets slow.
EIG_SIZE_LIMIT = 2000


def qr_orthonormalize(m, method: str = "cgs2") -> tuple[np.ndarray, np.ndarray]:
    """Thin QR of an n x p matrix with R_jj >= 0.

    ``method="cgs2"`` is classical Gram-Schmidt run twice per column.
    ``method="householder"`` delegates to LAPACK and fixes signs afterwards;
    with full column rank both produce the same factors up to rounding.
    """
    m = np.asarray(m, dtype=np.float64)
    n, p = m.shape
    if n < p:
        raise ValueError(f"need rows >= cols, got {m.shape}")
    scale = float(np.linalg.norm(m))
    tol = RANK_TOL * scale
    if method == "householder":
        q, r = np.linalg.qr(m)
        d = np.diag(r)
        signs = np.where(d < 0, -1.0, 1.0)
        q = q * signs
        r = r * signs[:, None]
        bad = np.flatnonzero(np.abs(d) <= tol)
        if scale == 0 or bad.size:
            col = int(bad[0]) if bad.size else 0
            raise RankDeficient(col, float(abs(d[col])) if p else 0.0)
        return q, r
    if method != "cgs2":
        raise ValueError(f"unknown QR method {method!r}")

    q = np.empty((n, p))
    r = np.zeros((p, p))
    for j in range(p):
        v = m[:, j].copy()
        basis = q[:, :j]
        for _ in range(2):
            h = basis.T @ v
            v -= basis @ h
            r[:j, j] += h
        nrm = float(np.linalg.norm(v))
        if scale == 0 or nrm <= tol:
            raise RankDeficient(j, nrm)
        r[j, j] = nrm
        q[:, j] = v / nrm
    return q, r


@dataclass(frozen=True)
class EigenDecomposition:
    eigenvectors: np.ndarray
    eigenvalues: np.ndarray

    def top(self, k: int) -> np.ndarray:
        return self.eigenvectors[:, :k]


def _check_symmetric(a: np.ndarray, tol: float = 1e-10) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise NotSymmetric(f"expected a square matrix, got shape {a.shape}")
    amax = float(np.max(np.abs(a))) if a.size else 0.0
    asym = float(np.max(np.abs(a - a.T))) if a.size else 0.0
    if asym > tol * amax:
        raise NotSymmetric(f"max |a - a^T| = {asym:.3e} exceeds {tol:g} * {amax:.3e}")


def _round_robin(n: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Tournament schedule: n - 1 rounds (n even) of disjoint index pairs."""
    m = n + (n % 2)
    players = list(range(m))
    rounds = []
    for _ in range(m - 1):
        ps, qs = [], []
        for i in range(m // 2):
            a, b = players[i], players[m - 1 - i]
            if a < n and b < n:
                ps.append(min(a, b))
                qs.append(max(a, b))
        rounds.append((np.array(ps, dtype=int), np.array(qs, dtype=int)))
        players = [players[0], players[-1]] + players[1:-1]
    return rounds


def symmetric_eig(a, max_sweeps: int = 60) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Rotations within a round of the tournament ordering touch disjoint index
    pairs and are applied together. Eigenvalues come back in descending
    order; each eigenvector is signed so its largest-magnitude entry is
    positive. Intended for n up to ``EIG_SIZE_LIMIT``.
    """
    a = np.array(a, dtype=np.float64)
    _check_symmetric(a)
    n = a.shape[0]
    a = 0.5 * (a + a.T)
    vt = np.eye(n)
    v = vt
    if n > 1:
        rounds = _round_robin(n)
        total = float(np.linalg.norm(a))
        for _ in range(max_sweeps):
            off = float(np.linalg.norm(a - np.diag(np.diag(a))))
            if off <= 1e-15 * total or total == 0:
                break
            for ps, qs in rounds:
                apq = a[ps, qs]
                if not np.any(apq):
                    continue
                app = a[ps, ps]
                aqq = a[qs, qs]
                live = apq != 0
                theta = np.divide(aqq - app, 2.0 * apq, out=np.zeros_like(apq), where=live)
                t = np.where(theta >= 0, 1.0, -1.0) / (np.abs(theta) + np.hypot(1.0, theta))
                t = np.where(live, t, 0.0)
                c = 1.0 / np.hypot(1.0, t)
                s = t * c

                # J^T A J as two row passes: rows of A, then rows of (J^T A)^T.
                for _ in range(2):
                    rp, rq = a[ps], a[qs]
                    a[ps] = c[:, None] * rp - s[:, None] * rq
                    a[qs] = s[:, None] * rp + c[:, None] * rq
                    a = np.ascontiguousarray(a.T)
                a[ps, qs] = 0.0
                a[qs, ps] = 0.0
                vp, vq = vt[ps], vt[qs]
                vt[ps] = c[:, None] * vp - s[:, None] * vq
                vt[qs] = s[:, None] * vp + c[:, None] * vq
        v = vt.T

    w = np.diag(a).copy()
    order = np.argsort(-w, kind="stable")
    w = w[order]
    v = v[:, order]
    lead = np.argmax(np.abs(v), axis=0)
    signs = np.where(v[lead, np.arange(n)] < 0, -1.0, 1.0)
    return EigenDecomposition(eigenvectors=v * signs, eigenvalues=w)


def spectral_norm(m, tol: float = 1e-8, max_iter: int = 200) -> tuple[float, bool]:
    """Largest singular value by power iteration on the smaller Gram matrix.

    Returns ``(estimate, converged)``; after ``max_iter`` steps the best
    estimate is returned with ``converged=False``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.size == 0 or not np.any(m):
        return 0.0, True
    gram = m.T @ m if m.shape[1] <= m.shape[0] else m @ m.T
    return _gram_top_eigenvalue(gram, tol, max_iter)


def _gram_top_eigenvalue(gram: np.ndarray, tol: float, max_iter: int) -> tuple[float, bool]:
    # Deterministic start with full support, so it is not orthogonal to any eigenvector a.s.
    x = np.abs(RngStream(0, "power-start").standard_normal((gram.shape[0],))) + 1.0
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iter):
        y = gram @ x
        new = float(x @ y)
        ny = float(np.linalg.norm(y))
        if ny == 0:
            return 0.0, True
        x = y / ny
        if abs(new - lam) <= tol * abs(new):
            return float(np.sqrt(max(new, 0.0))), True
        lam = new
    return float(np.sqrt(max(lam, 0.0))), False


@dataclass(frozen=True)
class MatrixNorms:
    max_abs: float
    frobenius: float
    spectral: float
    max_row_l2: float
    row_l1_l2_mixed: float
    spectral_converged: bool = True


def max_row_l2(m) -> float:
    m = np.asarray(m, dtype=np.float64)
    return float(np.sqrt(np.max(np.sum(m * m, axis=1)))) if m.size else 0.0


def max_abs(m) -> float:
    m = np.asarray(m, dtype=np.float64)
    return float(np.max(np.abs(m))) if m.size else 0.0


def mixed_l1_l2(m) -> float:
    """sqrt(sum_i ||m_i:||_1^2), the adjacency constraint functional."""
    m = np.asarray(m, dtype=np.float64)
    return float(np.sqrt(np.sum(np.sum(np.abs(m), axis=1) ** 2)))


def norms(m) -> MatrixNorms:
    m = np.asarray(m, dtype=np.float64)
    top, ok = spectral_norm(m)
    return MatrixNorms(
        max_abs=max_abs(m),
        frobenius=float(np.linalg.norm(m)),
        spectral=top,
        max_row_l2=max_row_l2(m),
        row_l1_l2_mixed=mixed_l1_l2(m),
        spectral_converged=ok,
    )


def write_matrix(fh: IO[str], m) -> None:
    """Text fixture format: "rows cols" then one row per line, %.17g."""
    m = np.atleast_2d(np.asarray(m, dtype=np.float64))
    fh.write(f"{m.shape[0]} {m.shape[1]}\n")
    for row in m:
        fh.write(" ".join(f"{x:.17g}" for x in row) + "\n")


def read_matrix(fh: IO[str]) -> np.ndarray:
    lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty matrix file")
    rows, cols = (int(t) for t in lines[0].split())
    data = [[float(t) for t in ln.split()] for ln in lines[1:]]
    if len(data) != rows or any(len(r) != cols for r in data):
        raise ValueError(f"matrix body does not match header {rows}x{cols}")
    return np.array(data, dtype=np.float64).reshape(rows, cols)
