"""Experiment pipelines behind the command-line runner.

Configs are flat ``key = value`` text: one assignment per line, ``#`` starts
a comment, list values are comma separated. Every CSV written here starts
with a ``#`` line naming the config hash and the conventions in force, and
identical configs give byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import math
import os
from concurrent.futures import Executor, ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .accounting import PrivacyBudget, default_delta
from .bounds import BOUND_CONVENTION, RatioStudyConfig, ratio_csv, ratio_empirical
from .errors import ConfigError, EmptyInput, InvalidBudget
from .federated import COST_MODEL, overhead, overhead_csv
from .linalg import read_matrix, symmetric_eig
from .ppm import PowerMethodConfig, run_centralized
from .recsys import (InteractionDataset, build_item_item, dataset_stats, dp_top_eigenvectors,
                     load_dataset, lowpass_filter, relative_error, synthetic_dataset)
from .rng import CachedTape, RngStream
from .sensitivity import SensitivityPolicy

EXPERIMENTS = ("figure1", "figure3", "table1", "table2", "single-run")
SEED_ENV = "DP_PPM_SEED"
NOISE_CONVENTION = "sigma = Delta * sqrt(4 L ln(1/delta)) / eps; natural logs"


def _floats(v: str) -> tuple[float, ...]:
    return tuple(float(x) for x in v.split(",") if x.strip())


def _ints(v: str) -> tuple[int, ...]:
    return tuple(int(x) for x in v.split(",") if x.strip())


def _names(v: str) -> tuple[str, ...]:
    return tuple(x.strip() for x in v.split(",") if x.strip())


def _opt_float(v: str) -> float | None:
    return None if v.strip().lower() in ("", "none", "auto") else float(v)


@dataclass(frozen=True)
class ExperimentConfig:
    """One experiment. ``delta = None`` picks min(0.01, exp(-eps/4)/2) per eps.

    ``dataset`` is a triples file path, ``synthetic`` or
    ``synthetic:key=value;...`` with keyword arguments of the generator.
    ``fixed_value = None`` uses sqrt(2p) for the fixed baseline.
    ``matrix`` (single-run) is a matrix file or ``diag:v1,v2,...``.
    """

    experiment: str = "single-run"
    dataset: str = "synthetic"
    epsilons: tuple[float, ...] = (1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0, 1000.0)
    delta: float | None = None
    p: int = 32
    k: int = 1
    iterations: int = 3
    runs: int = 10
    seed: int = 0
    methods: tuple[str, ...] = ("recsys", "improved", "prior", "fixed")
    fixed_value: float | None = None
    n_values: tuple[int, ...] = (1000, 2000)
    k_step: int = 64
    trials: int = 5
    parties: tuple[int, ...] = (1, 2, 4, 8, 16, 100, 1000)
    sizes: tuple[int, ...] = (200, 1000)
    datasets: tuple[str, ...] = ()
    matrix: str = "diag:4,2,1,0.5,0.25"
    epsilon: float | None = None
    confidence: float = 0.99
    resamples: int = 1000

    _PARSERS = {
        "experiment": str.strip, "dataset": str.strip, "epsilons": _floats,
        "delta": _opt_float, "p": int, "k": int, "iterations": int, "runs": int,
        "seed": int, "methods": _names, "fixed_value": _opt_float, "n_values": _ints,
        "k_step": int, "trials": int, "parties": _ints, "sizes": _ints,
        "datasets": _names, "matrix": str.strip, "epsilon": _opt_float,
        "confidence": float, "resamples": int,
    }

    def __post_init__(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"unknown experiment {self.experiment!r}; choose from {EXPERIMENTS}")
        if self.runs < 1:
            raise ConfigError("runs must be at least 1")
        if self.iterations < 1 or self.p < 1 or self.k < 1:
            raise ConfigError("p, k and iterations must be positive")
        for m in self.methods:
            if m not in ("prior", "improved", "recsys", "fixed"):
                raise ConfigError(f"unknown method {m!r}")
        for eps in self.budget_epsilons():
            try:
                self.budget(eps)
            except InvalidBudget as exc:
                raise ConfigError(str(exc)) from None

    def budget_epsilons(self) -> tuple[float, ...]:
        if self.experiment == "figure1":
            return self.epsilons
        if self.experiment == "single-run" and self.epsilon is not None:
            return (self.epsilon,)
        return ()

    def budget(self, eps: float) -> PrivacyBudget:
        delta = default_delta(eps) if self.delta is None else self.delta
        return PrivacyBudget(eps, delta).require_valid()

    def fixed_sensitivity(self) -> float:
        return math.sqrt(2 * self.p) if self.fixed_value is None else self.fixed_value

    def policy(self, name: str) -> SensitivityPolicy:
        if name == "fixed":
            return SensitivityPolicy.fixed(self.fixed_sensitivity())
        return SensitivityPolicy.from_name(name)

    def canonical(self) -> str:
        parts = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if isinstance(v, tuple):
                v = ",".join(repr(x) if isinstance(x, float) else str(x) for x in v)
            elif isinstance(v, float):
                v = repr(v)
            parts.append(f"{f.name}={v}")
        return "\n".join(parts)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]


def parse_config(text: str, overrides: dict | None = None) -> ExperimentConfig:
    """Parse key = value text; ``overrides`` (already typed) win over the file."""
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {raw.strip()!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        parser = ExperimentConfig._PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            values[key] = parser(val)
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {exc}") from None
    env_seed = os.environ.get(SEED_ENV)
    if env_seed is not None:
        try:
            values["seed"] = int(env_seed)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env_seed!r} is not an integer") from None
    values.update(overrides or {})
    return ExperimentConfig(**values)


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    return parse_config(text, overrides)


def bootstrap_ci(values, level: float = 0.99, resamples: int = 1000,
                 seed: int = 0) -> tuple[float, float, float]:
    """Percentile bootstrap: (mean, lo, hi)."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise EmptyInput("bootstrap needs at least one value")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    mean = float(v.mean())
    if np.all(v == v[0]):
        return mean, mean, mean
    gen = RngStream(seed, "bootstrap").generator()
    idx = gen.integers(0, v.size, size=(resamples, v.size))
    means = v[idx].mean(axis=1)
    lo, hi = np.quantile(means, [(1 - level) / 2, (1 + level) / 2])
    return mean, float(lo), float(hi)


def _header(cfg: ExperimentConfig, extra: str = "") -> str:
    line = f"# config_hash={cfg.digest()} experiment={cfg.experiment}; {NOISE_CONVENTION}"
    return line + (f"; {extra}" if extra else "") + "\n"


def _csv(rows, columns) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


def _fmt(x: float) -> str:
    return repr(float(x))


def resolve_dataset(source: str) -> InteractionDataset:
    if source == "synthetic" or source.startswith("synthetic:"):
        kwargs = {}
        for item in source.partition(":")[2].split(";"):
            if item.strip():
                key, _, val = item.partition("=")
                val = val.strip()
                kwargs[key.strip()] = float(val) if "." in val else int(val)
        try:
            return synthetic_dataset(**kwargs)
        except TypeError as exc:
            raise ConfigError(f"bad synthetic dataset source {source!r}: {exc}") from None
    return load_dataset(source)


# ---- figure 1 ---------------------------------------------------------------

def _figure1_run(cfg: ExperimentConfig, ds: InteractionDataset, reference: np.ndarray,
                 run: int) -> list[tuple[str, float, int, float]]:
    """All methods and budgets for one run; they share X^0 and the noise tape."""
    seed = cfg.seed + run
    mats = build_item_item(ds)
    tape = CachedTape(seed)
    out = []
    for eps in cfg.epsilons:
        budget = cfg.budget(eps)
        for m in cfg.methods:
            u, _ = dp_top_eigenvectors(ds, cfg.p, cfg.iterations, budget, seed=seed,
                                       policy=cfg.policy(m), tape=tape, mats=mats)
            out.append((m, eps, run, relative_error(reference, lowpass_filter(ds, u))))
    return out


@dataclass(frozen=True)
class Figure1Result:
    samples: list[tuple[str, float, int, float]]  # (method, eps, run, error)
    summary: list[tuple[str, float, float, float, float]]  # (method, eps, mean, lo, hi)

    def mean_curve(self, method: str) -> list[float]:
        return [r[2] for r in self.summary if r[0] == method]


def figure1(cfg: ExperimentConfig, executor: Executor | None = None,
            ds: InteractionDataset | None = None) -> Figure1Result:
    ds = ds or resolve_dataset(cfg.dataset)
    reference = lowpass_filter(ds, symmetric_eig(build_item_item(ds).p_tilde).top(cfg.p))
    runs = range(cfg.runs)
    if executor is None:
        chunks = [_figure1_run(cfg, ds, reference, r) for r in runs]
    else:
        chunks = [f.result() for f in [executor.submit(_figure1_run, cfg, ds, reference, r) for r in runs]]
    order = {m: i for i, m in enumerate(cfg.methods)}
    samples = sorted((s for c in chunks for s in c), key=lambda s: (order[s[0]], s[1], s[2]))
    summary = []
    for m in cfg.methods:
        for eps in cfg.epsilons:
            vals = [s[3] for s in samples if s[0] == m and s[1] == eps]
            mean, lo, hi = bootstrap_ci(vals, cfg.confidence, cfg.resamples, cfg.seed)
            summary.append((m, eps, mean, lo, hi))
    return Figure1Result(samples, summary)


def epsilon_to_reach(epsilons, errors, target: float) -> float:
    """Smallest eps where the error curve hits ``target``, log-interpolated; inf if never."""
    for i, e in enumerate(errors):
        if e <= target:
            if i == 0:
                return float(epsilons[0])
            a, b = errors[i - 1], e
            la, lb = math.log(epsilons[i - 1]), math.log(epsilons[i])
            return math.exp(la + (a - target) / (a - b) * (lb - la))
    return math.inf


def write_figure1(cfg: ExperimentConfig, res: Figure1Result, out: Path) -> list[Path]:
    extra = f"fixed sensitivity={_fmt(cfg.fixed_sensitivity())}; {cfg.confidence} bootstrap CI"
    runs = out / "figure1_runs.csv"
    runs.write_text(_header(cfg, extra) + _csv(
        [(m, _fmt(e), r, _fmt(v)) for m, e, r, v in res.samples],
        ("method", "epsilon", "run", "relative_error")))
    summ = out / "figure1.csv"
    summ.write_text(_header(cfg, extra) + _csv(
        [(m, _fmt(e), _fmt(a), _fmt(lo), _fmt(hi)) for m, e, a, lo, hi in res.summary],
        ("method", "epsilon", "mean", "ci_lo", "ci_hi")))
    dat = out / "figure1.dat"
    lines = [_header(cfg, extra).rstrip("\n"), "# epsilon " + " ".join(
        f"{m}_mean {m}_lo {m}_hi" for m in cfg.methods)]
    for eps in cfg.epsilons:
        row = [_fmt(eps)]
        for m in cfg.methods:
            a, lo, hi = next(r[2:] for r in res.summary if r[0] == m and r[1] == eps)
            row += [_fmt(a), _fmt(lo), _fmt(hi)]
        lines.append(" ".join(row))
    dat.write_text("\n".join(lines) + "\n")
    return [summ, runs, dat]


# ---- other pipelines ----------------------------------------------------------

def figure3(cfg: ExperimentConfig, executor: Executor | None = None) -> str:
    rows = []
    for n in cfg.n_values:
        study = RatioStudyConfig(n=n, k_grid=tuple(range(cfg.k_step, n + 1, cfg.k_step)),
                                 trials=cfg.trials, seed=cfg.seed)
        rows += ratio_empirical(study, executor)
    return _header(cfg, BOUND_CONVENTION) + ratio_csv(rows)


def table1(cfg: ExperimentConfig) -> str:
    reports = [overhead(s, n, cfg.p, mode) for mode in ("secagg", "plain")
               for s in cfg.parties for n in cfg.sizes]
    return _header(cfg, COST_MODEL) + overhead_csv(reports)


TABLE2_COLUMNS = ("dataset", "users", "items", "interactions", "mu0", "mu1",
                  "prior_coef", "prior", "ours")


def table2(cfg: ExperimentConfig) -> str:
    rows = []
    for source in cfg.datasets or (cfg.dataset,):
        st = dataset_stats(resolve_dataset(source), cfg.p)
        rows.append([source] + [st[c] if isinstance(st[c], int) else _fmt(st[c])
                              for c in TABLE2_COLUMNS[1:]])
    return _header(cfg, f"prior = mu0 sqrt(p ln n), p={cfg.p}") + _csv(rows, TABLE2_COLUMNS)


def load_matrix(source: str) -> np.ndarray:
    if source.startswith("diag:"):
        return np.diag(_floats(source[5:]))
    try:
        with open(source) as fh:
            return read_matrix(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read matrix {source}: {exc}") from None


def single_run(cfg: ExperimentConfig) -> tuple[str, float]:
    """Returns (trace CSV, final projection error against the exact top-k basis)."""
    a = load_matrix(cfg.matrix)
    budget = None if cfg.epsilon is None else cfg.budget(cfg.epsilon)
    pcfg = PowerMethodConfig(k=cfg.k, p=min(cfg.p, a.shape[0]), iterations=cfg.iterations,
                             budget=budget, seed=cfg.seed, track_oracle=True)
    _, trace = run_centralized(a, pcfg)
    return _header(cfg) + trace.to_csv(), float(trace.records[-1].proj_err)


def run_experiment(cfg: ExperimentConfig, out, jobs: int = 1) -> list[Path]:
    """Run ``cfg`` and write its artifacts into ``out``; returns the written paths."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    executor = ProcessPoolExecutor(jobs) if jobs > 1 else None
    try:
        if cfg.experiment == "figure1":
            return write_figure1(cfg, figure1(cfg, executor), out)
        if cfg.experiment == "figure3":
            text, name = figure3(cfg, executor), "figure3.csv"
        elif cfg.experiment == "table1":
            text, name = table1(cfg), "table1.csv"
        elif cfg.experiment == "table2":
            text, name = table2(cfg), "table2.csv"
        else:
            text, err = single_run(cfg)
            print(f"projection error {err:.3e}")
            name = "single_run.csv"
    finally:
        if executor is not None:
            executor.shutdown()
    path = out / name
    path.write_text(text)
    return [path]
