"""Seeded experiment drivers: sweeps over n, calibration, and power.

Reproducibility contract: every trial draws from a generator seeded by
SeedSequence([master_seed, n_index, trial]), so a sweep's output depends
only on its configuration and master seed, never on the worker count or
scheduling order.  Aggregation is by (n_index, trial) sort.  The wall
time column in CSV output is written as 0 to keep files byte-identical
across reruns; measured times are reported separately.

Cell sizing: sweeps use c2 = 1 + 1e-6 (EXPERIMENT_C2) rather than the
class-certifying construction constant.  The certifying c2 grows like
(c3/beta)^(alpha/(alpha-r)) and at beta ~ 1 it pushes the cell width past
1/2 for every practical n, leaving no grid at all; the exponent of the
statistic does not depend on c2, so the sweeps run at the smallest
admissible scaling and interpolant certification is exercised separately
at small eps.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from io import StringIO

import numpy as np

from .detection import (
    FitResult,
    exponent_rho,
    exponent_rho_dir,
    fit_scaling_exponent,
    generate_alt_jets,
    generate_alt_oriented,
    generate_null_jets,
    generate_null_oriented,
    greedy_cell_statistic,
    oriented_to_jets,
    statistic_eps,
)
from .errors import ParamOrder
from .holder import GraphLift, HolderParams, constant_function

EXPERIMENT_C2 = 1.0 + 1e-6

CSV_COLUMNS = [
    "trial",
    "problem",
    "k",
    "d",
    "alpha",
    "beta",
    "r0",
    "n",
    "n1",
    "eps",
    "statistic",
    "cells_total",
    "seed",
    "millis",
]


@dataclass(frozen=True)
class ExperimentConfig:
    """One seeded experiment description."""

    problem: str  # "jets" | "oriented"
    k: int
    d: int
    alpha: float
    beta: float
    r0: int
    n: int
    n1: int
    seed: int
    trials: int

    def __post_init__(self):
        if self.problem not in ("jets", "oriented"):
            raise ParamOrder(f"unknown problem {self.problem!r}")
        if not 0 <= self.n1 <= self.n:
            raise ParamOrder(f"need 0 <= n1 <= n, got n1={self.n1}, n={self.n}")
        if self.problem == "oriented" and (self.alpha != 2 or self.r0 != 1):
            raise ParamOrder("the oriented problem requires alpha=2, r0=1")
        if self.seed < 0:
            raise ParamOrder("seed must be nonnegative")
        self.params()  # validates k, d, alpha, beta, r0

    def params(self) -> HolderParams:
        return HolderParams(self.k, self.d, self.alpha, self.beta, self.r0)


@dataclass
class RunRecord:
    """One Monte Carlo trial's outputs, CSV-serializable.

    ``eps_clamped`` flags trials where eps' exceeded 1/2 and the statistic
    fell back to a single cell; it is carried on the record but not in the
    CSV schema.
    """

    trial: int
    problem: str
    k: int
    d: int
    alpha: float
    beta: float
    r0: int
    n: int
    n1: int
    eps: float
    statistic: int
    cells_total: int
    seed: int
    millis: int
    eps_clamped: bool = False


def default_alternative(config: ExperimentConfig):
    """Construction-aligned planted signal: the constant map at 0.75 eps(n).

    Its jets sit inside every cell box (value in [eps/2, eps], slopes 0),
    so planted points fill cells and the greedy statistic saturates; an
    arbitrary class member would rarely intersect the boxes and the cell
    statistic would not see it.
    """
    params = config.params()
    eps = statistic_eps(params, config.n)
    g = constant_function(params.k, np.full(params.dim_out, 0.75 * eps))
    if config.problem == "jets":
        return g
    return GraphLift(g, params)


def _trial_rng(master_seed: int, n_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([master_seed, n_index, trial]))


def run_trial(
    config: ExperimentConfig,
    n: int,
    rng: np.random.Generator,
    c2: float = EXPERIMENT_C2,
    alt=None,
):
    """One trial at sample size n: generate data, compute the greedy count."""
    params = config.params()
    if config.problem == "jets":
        if config.n1 > 0:
            f = alt if alt is not None else default_alternative(config)
            samples = generate_alt_jets(n, config.n1, f, params, rng, check=False)
        else:
            samples = generate_null_jets(n, params, rng)
    else:
        if config.n1 > 0:
            f = alt if alt is not None else default_alternative(config)
            oriented = generate_alt_oriented(n, config.n1, f, rng)
        else:
            oriented = generate_null_oriented(n, config.k, config.d, rng)
        samples, _ = oriented_to_jets(oriented, params)
    return greedy_cell_statistic(samples, params, n, c2=c2, clamp=True)


def _sweep_task(payload) -> tuple:
    (cfg_tuple, n_index, n, trial, c2) = payload
    config = ExperimentConfig(*cfg_tuple)
    rng = _trial_rng(config.seed, n_index, trial)
    t0 = time.perf_counter()
    sel = run_trial(config, n, rng, c2=c2)
    millis = int((time.perf_counter() - t0) * 1000)
    return (n_index, trial, n, sel.eps, sel.count, sel.cells_total, millis, sel.eps_clamped)


@dataclass
class SweepResult:
    records: list[RunRecord]
    means: list[tuple[int, float]]
    fit: FitResult | None
    target_rho: float
    elapsed_s: float


def run_sweep(
    config: ExperimentConfig,
    n_grid,
    trials: int | None = None,
    workers: int = 1,
    c2: float = EXPERIMENT_C2,
) -> SweepResult:
    """Trials at every n in the grid; per-n mean statistic and slope fit.

    The per-trial seeds depend only on (master seed, n index, trial), so
    any worker count produces identical records.
    """
    n_grid = [int(n) for n in n_grid]
    if trials is None:
        trials = config.trials
    if trials < 1:
        raise ParamOrder("trials must be >= 1")
    cfg_tuple = (
        config.problem,
        config.k,
        config.d,
        config.alpha,
        config.beta,
        config.r0,
        config.n,
        config.n1,
        config.seed,
        config.trials,
    )
    tasks = [
        (cfg_tuple, n_index, n, trial, c2)
        for n_index, n in enumerate(n_grid)
        for trial in range(trials)
    ]
    t0 = time.perf_counter()
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunk = max(1, len(tasks) // (workers * 8))
            results = list(pool.map(_sweep_task, tasks, chunksize=chunk))
    else:
        results = [_sweep_task(t) for t in tasks]
    elapsed = time.perf_counter() - t0
    results.sort(key=lambda r: (r[0], r[1]))
    records = [
        RunRecord(
            trial=trial,
            problem=config.problem,
            k=config.k,
            d=config.d,
            alpha=config.alpha,
            beta=config.beta,
            r0=config.r0,
            n=n,
            n1=config.n1,
            eps=eps,
            statistic=count,
            cells_total=cells_total,
            seed=config.seed,
            millis=millis,
            eps_clamped=clamped,
        )
        for (n_index, trial, n, eps, count, cells_total, millis, clamped) in results
    ]
    means = []
    for n_index, n in enumerate(n_grid):
        vals = [r[4] for r in results if r[0] == n_index]
        means.append((n, float(np.mean(vals))))
    fit = None
    if len({n for n, _ in means}) >= 3 and all(m > 0 for _, m in means):
        fit = fit_scaling_exponent(means)
    if config.problem == "oriented":
        target = float(exponent_rho_dir(config.k, config.d))
    else:
        target = float(exponent_rho(config.k, config.d, config.alpha, config.r0)[1])
    return SweepResult(records, means, fit, target, elapsed)


def records_to_csv(records) -> str:
    """Deterministic CSV text; the millis column is zeroed (see module doc)."""
    buf = StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in records:
        writer.writerow(
            [
                r.trial,
                r.problem,
                r.k,
                r.d,
                repr(float(r.alpha)),
                repr(float(r.beta)),
                r.r0,
                r.n,
                r.n1,
                repr(float(r.eps)),
                r.statistic,
                r.cells_total,
                r.seed,
                0,
            ]
        )
    return buf.getvalue()


def write_records_csv(records, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(records_to_csv(records))


# ---------------------------------------------------------------------------
# Calibration and power
# ---------------------------------------------------------------------------


@dataclass
class Threshold:
    """Randomized rejection rule: reject when stat > value, and when
    stat == value with probability tie_gamma.

    The statistic is integer-valued, so a deterministic cutoff cannot hit
    an exact level; the randomized rule makes the null rejection rate
    equal the level in expectation.
    """

    value: float
    tie_gamma: float
    level: float


def null_quantile_threshold(
    config: ExperimentConfig,
    level: float,
    trials: int,
    rng: np.random.Generator,
    c2: float = EXPERIMENT_C2,
) -> Threshold:
    """Empirical randomized (1 - level) cutoff of the null statistic."""
    if not 0 < level < 1:
        raise ParamOrder("level must be in (0, 1)")
    if trials < 100:
        raise ParamOrder("need at least 100 calibration trials")
    null_cfg = ExperimentConfig(
        config.problem,
        config.k,
        config.d,
        config.alpha,
        config.beta,
        config.r0,
        config.n,
        0,
        config.seed,
        trials,
    )
    streams = rng.spawn(trials)
    stats = np.array(
        [run_trial(null_cfg, config.n, streams[t], c2=c2).count for t in range(trials)]
    )
    for value in np.sort(np.unique(stats)):
        tail = float(np.mean(stats > value))
        if tail <= level:
            at = float(np.mean(stats == value))
            gamma = 0.0 if at == 0.0 else min(1.0, (level - tail) / at)
            return Threshold(float(value), gamma, level)
    return Threshold(float(stats.max()), 0.0, level)  # pragma: no cover


@dataclass
class PowerEstimate:
    power: float
    stderr: float
    trials: int


def power_estimate(
    config: ExperimentConfig,
    threshold: Threshold,
    trials: int,
    rng: np.random.Generator,
    alt=None,
    c2: float = EXPERIMENT_C2,
) -> PowerEstimate:
    """Rejection fraction under the configured alternative."""
    if trials < 1:
        raise ParamOrder("trials must be >= 1")
    if alt is None and config.n1 > 0:
        alt = default_alternative(config)
    rejections = 0
    for trial_rng in rng.spawn(trials):
        sel = run_trial(config, config.n, trial_rng, c2=c2, alt=alt)
        if sel.count > threshold.value:
            rejections += 1
        elif sel.count == threshold.value and trial_rng.random() < threshold.tie_gamma:
            rejections += 1
    p = rejections / trials
    return PowerEstimate(p, float(np.sqrt(p * (1 - p) / trials)), trials)
