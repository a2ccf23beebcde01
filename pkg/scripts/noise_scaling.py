"""Projection error of the centralized private power method vs epsilon.

Planted-spectrum matrix (n=200, top-k block well separated), both the
max-row and the entrywise sensitivity rules, several seeds. Prints a table.
"""

import argparse

import numpy as np

from privpower.accounting import PrivacyBudget, default_delta
from privpower.linalg import qr_orthonormalize
from privpower.ppm import PowerMethodConfig, oracle_basis, run_centralized
from privpower.rng import RngStream, gaussian_matrix
from privpower.sensitivity import SensitivityPolicy


def planted(n: int, k: int, top: float, seed: int) -> np.ndarray:
    q = qr_orthonormalize(gaussian_matrix(RngStream(seed, "planted"), n, n), "householder")[0]
    lam = np.concatenate([np.full(k, top), np.linspace(1, 0, n - k)])
    return (q * lam) @ q.T


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=200)
    ap.add_argument("--k", type=int, default=4)
    ap.add_argument("--p", type=int, default=8)
    ap.add_argument("--iterations", type=int, default=5)
    ap.add_argument("--seeds", type=int, default=5)
    args = ap.parse_args()
    a = planted(args.n, args.k, 50.0, 0)
    u_k = oracle_basis(a, args.k)
    print(f"{'eps':>8} {'improved':>10} {'prior':>10}")
    for eps in (1, 5, 20, 100, 1000):
        b = PrivacyBudget(eps, default_delta(eps))
        errs = {}
        for name in ("improved", "prior"):
            vals = []
            for s in range(args.seeds):
                cfg = PowerMethodConfig(k=args.k, p=args.p, iterations=args.iterations, budget=b,
                                        policy=SensitivityPolicy.from_name(name), seed=s)
                vals.append(run_centralized(a, cfg, oracle=u_k)[1].records[-1].proj_err)
            errs[name] = np.mean(vals)
        print(f"{eps:>8} {errs['improved']:>10.4f} {errs['prior']:>10.4f}")


if __name__ == "__main__":
    main()
