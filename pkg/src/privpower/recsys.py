"""Recommender-system application: DP top eigenvectors of the item-item matrix.

R is the binary s x n user-item matrix, R~ = D_user^-1/2 R the user-normalized
interactions and P~ = R~^T R~ = sum_u (1/d_u) R_u^T R_u, which splits
naturally into one share per user. Item degrees are treated as public and
only enter through the low-pass filter R I^-1/2 U_p U_p^T I^1/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .accounting import PrivacyBudget
from .errors import EmptyDataset, ParseError, ZeroReference
from .federated import InteractionShard, run_federated
from .linalg import mixed_l1_l2
from .ppm import IterationTrace, PowerMethodConfig
from .rng import RngStream
from .sensitivity import SensitivityPolicy


@dataclass(frozen=True)
class InteractionDataset:
    n_users: int
    n_items: int
    pairs: np.ndarray  # (m, 2) int array of (user, item), lexicographically sorted, unique
    duplicates: int = 0
    dropped_users: int = 0

    @classmethod
    def from_pairs(cls, pairs, n_items: int | None = None, reindex: bool = True) -> "InteractionDataset":
        """Build from raw (user, item) pairs, deduplicating them.

        Users are always compacted to 0..s-1, so gaps in user ids count as
        dropped zero-degree users. Items are compacted too when ``reindex``;
        otherwise ids are kept and ``n_items`` may reserve unseen items.
        """
        arr = np.asarray(pairs, dtype=np.int64).reshape(-1, 2)
        if arr.shape[0] == 0:
            raise EmptyDataset("no interactions")
        uniq = np.unique(arr, axis=0)
        user_ids, users = np.unique(uniq[:, 0], return_inverse=True)
        if reindex:
            item_ids, items = np.unique(uniq[:, 1], return_inverse=True)
            n = len(item_ids)
            dropped = 0
        else:
            items = uniq[:, 1]
            n = int(items.max()) + 1 if n_items is None else n_items
            dropped = int(user_ids.max()) + 1 - len(user_ids)
        pairs_ = np.column_stack([users, items])
        pairs_ = pairs_[np.lexsort((pairs_[:, 1], pairs_[:, 0]))]
        return cls(len(user_ids), n, pairs_, arr.shape[0] - uniq.shape[0], dropped)

    @classmethod
    def from_matrix(cls, r) -> "InteractionDataset":
        r = np.asarray(r)
        users, items = np.nonzero(r)
        ds = cls.from_pairs(np.column_stack([users, items]), n_items=r.shape[1], reindex=False)
        return ds

    @property
    def n_interactions(self) -> int:
        return int(self.pairs.shape[0])

    def matrix(self) -> np.ndarray:
        r = np.zeros((self.n_users, self.n_items))
        r[self.pairs[:, 0], self.pairs[:, 1]] = 1.0
        return r

    def user_items(self) -> list[np.ndarray]:
        bounds = np.searchsorted(self.pairs[:, 0], np.arange(self.n_users + 1))
        return [self.pairs[bounds[u]:bounds[u + 1], 1] for u in range(self.n_users)]

    def user_degrees(self) -> np.ndarray:
        return np.bincount(self.pairs[:, 0], minlength=self.n_users)

    def item_degrees(self) -> np.ndarray:
        return np.bincount(self.pairs[:, 1], minlength=self.n_items)

    def without(self, user: int, item: int) -> "InteractionDataset":
        keep = ~((self.pairs[:, 0] == user) & (self.pairs[:, 1] == item))
        return InteractionDataset(self.n_users, self.n_items, self.pairs[keep])


def load_dataset(path, fmt: str = "triples") -> InteractionDataset:
    """Read whitespace-separated "user item" lines; blank lines and '#' comments skipped."""
    if fmt != "triples":
        raise ValueError(f"unsupported format {fmt!r}")
    pairs = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) < 2:
                raise ParseError(lineno, f"expected 'user item', got {line!r}")
            try:
                u, i = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(lineno, f"non-integer id in {line!r}") from None
            if u < 0 or i < 0:
                raise ParseError(lineno, "ids must be non-negative")
            pairs.append((u, i))
    if not pairs:
        raise EmptyDataset(f"{path}: no interactions")
    return InteractionDataset.from_pairs(pairs)


def write_dataset(path, ds: InteractionDataset) -> None:
    Path(path).write_text("".join(f"{u} {i}\n" for u, i in ds.pairs))


def synthetic_dataset(n_users: int = 500, n_items: int = 200, seed: int = 0,
                      clusters: int = 28, home: float = 0.97, item_exponent: float = 0.8,
                      degree_shape: float = 1.2, min_degree: int = 4,
                      max_degree: int = 60) -> InteractionDataset:
    """Power-law toy data with latent taste groups.

    Items get Zipf popularity and a random group; users get a Pareto degree
    and a group, and spend a ``home`` share of their picks inside it. The
    groups give P~ a clear low-rank head, like real rating data has.
    """
    if not 0 <= home <= 1:
        raise ValueError("home share must lie in [0, 1]")
    gen = RngStream(seed, "dataset").generator()
    pop = (np.arange(1, n_items + 1, dtype=float)) ** -item_exponent
    pop = pop[gen.permutation(n_items)]
    item_group = gen.integers(0, clusters, n_items)
    user_group = gen.integers(0, clusters, n_users)
    degrees = np.clip(np.round(min_degree * (1 + gen.pareto(degree_shape, n_users))),
                      min_degree, min(max_degree, n_items)).astype(int)
    pairs = []
    for u, d in enumerate(degrees):
        inside = item_group == user_group[u]
        w = np.where(inside, home / max(pop[inside].sum(), 1e-300),
                     (1 - home) / max(pop[~inside].sum(), 1e-300)) * pop
        w /= w.sum()
        items = gen.choice(n_items, size=d, replace=False, p=w)
        pairs.extend((u, int(i)) for i in items)
    return InteractionDataset.from_pairs(pairs, n_items=n_items, reindex=False)


@dataclass(frozen=True)
class NormalizedMatrices:
    r_tilde: np.ndarray
    p_tilde: np.ndarray
    item_degrees: np.ndarray
    shards: tuple[InteractionShard, ...]


def build_item_item(ds: InteractionDataset) -> NormalizedMatrices:
    deg = ds.user_degrees()
    if np.any(deg < 1):
        raise ValueError("every user needs at least one interaction")
    r = ds.matrix()
    r_tilde = r / np.sqrt(deg)[:, None]
    p_tilde = np.zeros((ds.n_items, ds.n_items))
    shards = []
    for u, items in enumerate(ds.user_items()):
        w = 1.0 / len(items)
        p_tilde[np.ix_(items, items)] += w
        shards.append(InteractionShard(u + 1, items, w, ds.n_items))
    return NormalizedMatrices(r_tilde, p_tilde, ds.item_degrees(), tuple(shards))


def dp_top_eigenvectors(ds: InteractionDataset, p: int = 32, iterations: int = 3,
                        budget: PrivacyBudget | None = None, *, seed: int = 0,
                        policy: SensitivityPolicy | None = None, tape=None,
                        mats: NormalizedMatrices | None = None) -> tuple[np.ndarray, IterationTrace]:
    """Federated DP estimate of the top-p eigenvectors of P~, one party per user."""
    if p > ds.n_items:
        raise ValueError(f"p={p} exceeds the number of items {ds.n_items}")
    mats = mats or build_item_item(ds)
    cfg = PowerMethodConfig(k=p, p=p, iterations=iterations, budget=budget,
                            policy=policy or SensitivityPolicy.recsys(), seed=seed)
    return run_federated(mats.shards, cfg, tape=tape)


def deletion_closed_form(d: int) -> float:
    """Sum_i ||C_i:||_1^2 after deleting one interaction of a degree-d user (d >= 2).

    Each of the d - 1 remaining rows has l1 mass (d-1) * 1/(d(d-1)) + 1/d = 2/d,
    and the deleted item's row has mass 1.
    """
    return 4 * (d - 1) / d**2 + 1


@dataclass(frozen=True)
class DeletionSweep:
    max_value: float
    checked: int
    skipped_degree_one: int
    max_closed_form_error: float
    values: np.ndarray  # constraint value per checked deletion
    degrees: np.ndarray  # deleting user's degree per checked deletion


def recsys_sensitivity_oracle(ds: InteractionDataset) -> DeletionSweep:
    """Exhaustive single-interaction deletion sweep.

    For every interaction of a user with degree >= 2 forms C = P~ - P~'
    explicitly and records sqrt(sum_i ||C_i:||_1^2). Degree-1 deletions would
    remove the user entirely (1/(d-1) undefined) and are skipped and counted.
    """
    base = build_item_item(ds).p_tilde
    deg = ds.user_degrees()
    values, degrees, errs = [], [], []
    skipped = 0
    for u, i in ds.pairs:
        d = int(deg[u])
        if d < 2:
            skipped += 1
            continue
        c = base - build_item_item(ds.without(u, i)).p_tilde
        v = mixed_l1_l2(c)
        values.append(v)
        degrees.append(d)
        errs.append(abs(v**2 - deletion_closed_form(d)))
    values = np.array(values)
    return DeletionSweep(
        max_value=float(values.max()) if values.size else 0.0,
        checked=len(values),
        skipped_degree_one=skipped,
        max_closed_form_error=float(max(errs)) if errs else 0.0,
        values=values,
        degrees=np.array(degrees, dtype=int),
    )


def _item_scaling(ds: InteractionDataset) -> tuple[np.ndarray, np.ndarray]:
    deg = ds.item_degrees().astype(float)
    pos = deg > 0
    inv = np.zeros_like(deg)
    inv[pos] = 1 / np.sqrt(deg[pos])
    return inv, np.sqrt(deg)


def lowpass_filter(ds: InteractionDataset, u_p) -> np.ndarray:
    """R I^-1/2 U_p U_p^T I^1/2; zero-degree items get I^-1/2 = 0."""
    u_p = np.asarray(u_p, dtype=np.float64).reshape(ds.n_items, -1)
    inv, sq = _item_scaling(ds)
    left = ds.matrix() * inv
    return (left @ u_p) @ (u_p.T * sq)


def relative_error(r_true, r_approx) -> float:
    r_true = np.asarray(r_true, dtype=np.float64)
    ref = float(np.linalg.norm(r_true))
    if ref == 0:
        raise ZeroReference("reference filter output is zero")
    return float(np.linalg.norm(np.asarray(r_approx) - r_true)) / ref


def dataset_stats(ds: InteractionDataset, p: int) -> dict:
    """Coherence statistics of P~ and the two sensitivity coefficients."""
    from .sensitivity import coherence

    rep = coherence(build_item_item(ds).p_tilde)
    return {
        "users": ds.n_users,
        "items": ds.n_items,
        "interactions": ds.n_interactions,
        "mu0": rep.mu0,
        "mu1": rep.mu1,
        "prior_coef": rep.mu0 * math.sqrt(math.log(ds.n_items)),
        "prior": rep.mu0 * math.sqrt(p * math.log(ds.n_items)),
        "ours": rep.mu1,
    }
