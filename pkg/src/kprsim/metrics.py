"""Utilization and stability fractions, and their aggregation over seeds."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .config import VariantId
from .core import CustomerState, PeriodOutcome
from .errors import AggregationError


def utilization_fraction(outcome: PeriodOutcome, n: int) -> float:
    return (n - len(outcome.idle_set)) / n


def stability_fraction(customers: Sequence[CustomerState], variant: VariantId) -> float:
    if not customers:
        return 0.0
    if VariantId.parse(variant) is VariantId.VARIANT1:
        hits = sum(1 for c in customers if c.vector.is_stable)
    else:
        hits = sum(1 for c in customers if c.served_current)
    return hits / len(customers)


@dataclass
class MetricsSeries:
    """Per-period fractions of one run; period indices start at 1."""

    utilization: np.ndarray
    stability: np.ndarray
    seed: int = 0
    protocol: str = ""
    variant: int = 2
    n: int = 0

    def __post_init__(self):
        self.utilization = np.asarray(self.utilization, dtype=np.float64)
        self.stability = np.asarray(self.stability, dtype=np.float64)
        if self.utilization.shape != self.stability.shape:
            raise ValueError("utilization and stability series differ in length")

    @property
    def periods(self) -> np.ndarray:
        return np.arange(1, len(self) + 1)

    def __len__(self) -> int:
        return self.utilization.size

    def records(self):
        return list(zip(self.periods.tolist(), self.utilization.tolist(), self.stability.tolist()))


@dataclass
class Aggregate:
    utilization_mean: np.ndarray
    utilization_std: np.ndarray
    stability_mean: np.ndarray
    stability_std: np.ndarray
    runs: int


def aggregate_runs(series: Iterable[MetricsSeries]) -> Aggregate:
    """Per-period mean and sample standard deviation across runs (std = 0 for one run)."""
    series = list(series)
    if not series:
        raise AggregationError("nothing to aggregate")
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise AggregationError(f"series lengths differ: {sorted(lengths)}")
    u = np.vstack([s.utilization for s in series])
    st = np.vstack([s.stability for s in series])
    ddof = 1 if len(series) > 1 else 0
    return Aggregate(u.mean(axis=0), u.std(axis=0, ddof=ddof), st.mean(axis=0), st.std(axis=0, ddof=ddof), len(series))


def final_utilization(series: MetricsSeries, window: int = 10) -> float:
    """Mean utilization over the last ``window`` periods."""
    if not (1 <= window <= len(series)):
        raise ValueError(f"window must lie in [1, {len(series)}], got {window}")
    return float(series.utilization[-window:].mean())


@dataclass
class SweepGrid:
    """Final utilization over an (alpha, pi) grid: ``mean[a, p]`` is the cell at alphas[a], pis[p]."""

    alphas: np.ndarray
    pis: np.ndarray
    mean: np.ndarray
    std: np.ndarray
    seeds: int
    per_seed: np.ndarray = field(default=None, repr=False)

    def cell(self, alpha: float, pi: float) -> float:
        a = int(np.argmin(np.abs(self.alphas - alpha)))
        p = int(np.argmin(np.abs(self.pis - pi)))
        return float(self.mean[a, p])

    def cells(self):
        for a, alpha in enumerate(self.alphas):
            for p, pi in enumerate(self.pis):
                yield float(alpha), float(pi), float(self.mean[a, p]), float(self.std[a, p])
