"""Monte Carlo error bars by Poisson resampling of count tables."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .metrics import METRICS
from .tomography import CountTable, reconstruct

DEFAULT_TRIALS = 1000
MAX_SKIP_FRACTION = 0.10


@dataclass(frozen=True)
class McReport:
    mean: float
    std: float
    n_trials: int
    seed: int
    skipped: int = 0

    def as_dict(self) -> dict:
        return asdict(self)


def poisson_sampler(rng: np.random.Generator, counts: np.ndarray) -> np.ndarray:
    return rng.poisson(counts).astype(float)


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent stream per trial, so results do not depend on trial order."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(trial,)))


def make_estimator(metric: str, method: str = "linear") -> Callable[[CountTable], float]:
    """Count table -> reconstructed state -> scalar metric."""
    try:
        fn = METRICS[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}") from None

    def estimator(table: CountTable) -> float:
        return fn(reconstruct(table, method).rho)

    estimator.__name__ = f"{method}_{metric}"
    return estimator


def make_multi_estimator(metrics, method: str = "linear") -> Callable[[CountTable], dict]:
    """Like make_estimator but evaluates several metrics on one reconstruction."""
    fns = {}
    for m in metrics:
        if m not in METRICS:
            raise ValueError(f"unknown metric {m!r}; choose from {sorted(METRICS)}")
        fns[m] = METRICS[m]

    def estimator(table: CountTable) -> dict:
        rho = reconstruct(table, method).rho
        return {m: fn(rho) for m, fn in fns.items()}

    return estimator


def _summarize(values: list[float], n_trials: int, seed: int, skipped: int) -> McReport:
    arr = np.array(values, dtype=float)
    if arr.size < 2:
        raise RuntimeError("fewer than two successful Monte Carlo trials")
    return McReport(float(arr.mean()), float(arr.std(ddof=1)), n_trials, seed, skipped)


def mc_resample_many(
    counts: CountTable,
    estimator: Callable[[CountTable], dict],
    n_trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    sampler: Callable = poisson_sampler,
) -> dict[str, McReport]:
    """Parametric bootstrap for an estimator that returns several named scalars.

    Every trial redraws each count around its observed value and reruns the
    estimator.  A trial whose estimator raises, or returns a non-finite value
    for some quantity, is skipped for that quantity; more than 10% skips is
    an error.
    """
    if n_trials < 2:
        raise ValueError("n_trials must be at least 2")
    observed = counts.counts()
    samples: dict[str, list[float]] = {}
    failed = 0
    for trial in range(n_trials):
        redraw = counts.with_counts(sampler(trial_rng(seed, trial), observed))
        try:
            out = estimator(redraw)
        except (ValueError, ArithmeticError, np.linalg.LinAlgError, RuntimeError):
            failed += 1
            continue
        for key, val in out.items():
            samples.setdefault(key, [])
            if math.isfinite(val):
                samples[key].append(float(val))

    reports = {}
    limit = MAX_SKIP_FRACTION * n_trials
    if failed > limit:
        raise RuntimeError(f"estimator failed on {failed} of {n_trials} resamples")
    for key, vals in samples.items():
        skipped = n_trials - len(vals)
        if skipped > limit:
            raise RuntimeError(f"estimator {key!r} failed on {skipped} of {n_trials} resamples")
        reports[key] = _summarize(vals, n_trials, seed, skipped)
    return reports


def mc_resample(
    counts: CountTable,
    estimator: Callable[[CountTable], float] | str,
    n_trials: int = DEFAULT_TRIALS,
    seed: int = 0,
    sampler: Callable = poisson_sampler,
    method: str = "linear",
) -> McReport:
    """Mean and sample standard deviation of ``estimator`` under Poisson resampling.

    ``estimator`` is either a callable on count tables or a metric name
    (``"eof"``, ``"purity"``, ...) evaluated after tomography with ``method``.
    """
    if isinstance(estimator, str):
        estimator = make_estimator(estimator, method)
    fn = estimator
    return mc_resample_many(counts, lambda t: {"value": fn(t)}, n_trials, seed, sampler)["value"]
