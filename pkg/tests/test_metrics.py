import numpy as np
import pytest

from kprsim.config import SimConfig
from kprsim.core import CustomerState, PeriodOutcome, ProbabilityVector, uniform_vector
from kprsim.engine import WorldState, run_simulation
from kprsim.errors import AggregationError
from kprsim.metrics import (
    MetricsSeries,
    aggregate_runs,
    final_utilization,
    stability_fraction,
    utilization_fraction,
)
from kprsim.protocols import ProtocolConfig
from kprsim.rng import RngStream


def test_utilization_perfect_and_collision():
    full = PeriodOutcome(np.array([0, 1]), np.array([0, 1]), frozenset())
    clash = PeriodOutcome(np.array([0, 0]), np.array([1, -1]), frozenset({1}))
    assert utilization_fraction(full, 2) == 1.0
    assert utilization_fraction(clash, 2) == 0.5


def test_stability_fraction():
    stable = [CustomerState(i, ProbabilityVector.one_hot(3, i)) for i in range(3)]
    assert stability_fraction(stable, 1) == 1.0
    fresh = WorldState(5, 1, None).customers
    assert stability_fraction(fresh, 1) == 0.0
    mixed = [CustomerState(0, uniform_vector(2), served_current=True), CustomerState(1, uniform_vector(2))]
    assert stability_fraction(mixed, 2) == 0.5


def test_variant2_stability_equals_utilization_on_state():
    cfg = SimConfig(n=30, periods=6, variant=2, protocol=ProtocolConfig(kind="rp5", pi=0.3))
    s = run_simulation(cfg, RngStream(5))
    np.testing.assert_array_equal(s.stability, s.utilization)


def test_aggregate_singleton():
    s = MetricsSeries([0.5, 0.75], [0.5, 1.0])
    agg = aggregate_runs([s])
    np.testing.assert_array_equal(agg.utilization_mean, s.utilization)
    np.testing.assert_array_equal(agg.utilization_std, [0, 0])


def test_aggregate_mean():
    agg = aggregate_runs([MetricsSeries([0.6], [0.6]), MetricsSeries([0.8], [0.8])])
    assert agg.utilization_mean[0] == pytest.approx(0.7)
    assert agg.utilization_std[0] == pytest.approx(np.std([0.6, 0.8], ddof=1))


def test_aggregate_mismatch():
    with pytest.raises(AggregationError):
        aggregate_runs([MetricsSeries([0.6], [0.6]), MetricsSeries([0.6, 0.7], [0.6, 0.7])])
    with pytest.raises(AggregationError):
        aggregate_runs([])


def test_aggregate_baseline_ten_seeds():
    cfg = SimConfig(n=1000, periods=1, protocol=None)
    agg = aggregate_runs(run_simulation(cfg, RngStream(0, r)) for r in range(10))
    assert agg.utilization_mean[0] == pytest.approx(1 - 1 / np.e, abs=0.02)


def test_final_utilization():
    assert final_utilization(MetricsSeries([1.0] * 12, [1.0] * 12)) == 1.0
    assert final_utilization(MetricsSeries([0.5, 0.9, 1.0], [0, 0, 0]), window=2) == pytest.approx(0.95)
    with pytest.raises(ValueError):
        final_utilization(MetricsSeries([0.5], [0.5]), window=2)


def test_final_utilization_after_variant1_fixed_point():
    cfg = SimConfig(n=100, periods=30, variant=1, protocol=ProtocolConfig(kind="rp1", k=5))
    s = run_simulation(cfg, RngStream(2))
    done = int(np.flatnonzero(s.stability == 1.0)[0])
    assert done + 1 < len(s) - 10
    assert final_utilization(s, 10) == s.utilization[done + 1]


def test_records_are_contiguous():
    s = MetricsSeries([0.1, 0.2, 0.3], [0.0, 0.1, 0.2])
    assert [r[0] for r in s.records()] == [1, 2, 3]
