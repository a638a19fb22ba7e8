import io
import math

import numpy as np
import pytest

from aoinet.analytic import waiting_arrival_correlation
from aoinet.netmodel import parse_network
from aoinet.simcore import (
    ARRIVAL,
    COMPLETION,
    EstimationError,
    EventQueue,
    SimConfig,
    SimulationError,
    estimate_age_sawtooth,
    interdeparture_stats,
    mean_ci,
    run_replication,
    simulate,
    sojourn_stats,
)
from aoinet.simcore.streams import SERVICE, SOURCE, exponential_stream, stream_seed

from oracles import tandem_sawtooth_age, wa_monte_carlo

MM1 = "node 1 mu=1\nclass a lambda=0.5 path=1\n"
TANDEM = "node 1 mu=1\nnode 2 mu=1\nclass a lambda=0.46 path=1,2\n"
TWO_CLASS = ("node 1 mu=1\nnode 2 mu=1\nnode 3 mu=1\n"
             "class alpha lambda=0.3 path=1,3\nclass beta lambda=0.3 path=2,3\n")


class TestSawtooth:
    def test_unit_interval(self):
        assert estimate_age_sawtooth([(1.0, 1.0), (1.0, 2.0)]) == pytest.approx((1.0, 1.5, 2.0))

    def test_interval_of_four(self):
        assert estimate_age_sawtooth([(2.0, 0.0), (2.0, 4.0)]) == pytest.approx((2.0, 4.0, 6.0))

    def test_three_departures(self):
        left, h, right = estimate_age_sawtooth([(1, 0), (2, 1), (1, 3)])
        assert left == pytest.approx(5 / 3)
        assert h == pytest.approx(2.5)
        assert right == pytest.approx(10 / 3)

    def test_matches_direct_integration(self):
        # integrate the age curve t - gen(t) numerically on a fine grid
        rng = np.random.default_rng(7)
        exits = np.cumsum(rng.exponential(1.0, 40))
        soj = rng.exponential(2.0, 40)
        t = np.linspace(exits[0], exits[-1], 400_001)[:-1]
        idx = np.searchsorted(exits, t, side="right") - 1
        age = soj[idx] + (t - exits[idx])
        _, h, _ = estimate_age_sawtooth(np.column_stack([soj, exits]))
        assert h == pytest.approx(age.mean(), rel=1e-4)

    def test_errors(self):
        with pytest.raises(EstimationError):
            estimate_age_sawtooth([(1.0, 1.0)])
        with pytest.raises(EstimationError, match="increasing"):
            estimate_age_sawtooth([(1.0, 1.0), (1.0, 1.0)])


class TestMoments:
    def test_constant_gaps(self):
        assert interdeparture_stats([0, 1, 2, 3]) == pytest.approx((1.0, 1.0))

    def test_sojourn_mean(self):
        assert sojourn_stats([1.0, 2.0, 3.0]) == 2.0

    def test_too_few(self):
        with pytest.raises(EstimationError):
            interdeparture_stats([1.0])
        with pytest.raises(EstimationError):
            sojourn_stats([])

    def test_mean_ci(self):
        est = mean_ci([1.0, 2.0, 3.0])
        # t_{0.975, 2} = 4.302652729911275
        assert est.mean == 2.0
        assert est.half_width == pytest.approx(4.302652729911275 / math.sqrt(3))
        assert math.isnan(mean_ci([1.0]).half_width)


class TestEvents:
    def test_order_by_time_then_seq(self):
        q = EventQueue()
        q.push(2.0, ARRIVAL, 0)
        q.push(1.0, COMPLETION, 1)
        q.push(1.0, ARRIVAL, 2)
        out = [q.pop() for _ in range(len(q))]
        assert [(e.time, e.node) for e in out] == [(1.0, 1), (1.0, 2), (2.0, 0)]
        assert len({e.seq for e in out}) == 3


class TestStreams:
    def test_exponential_mean(self):
        it = exponential_stream(stream_seed(1, 0, SOURCE, 5), 2.0)
        x = np.array([next(it) for _ in range(200_000)])
        assert x.mean() == pytest.approx(0.5, rel=0.01)
        assert x.min() >= 0

    def test_streams_differ(self):
        a = exponential_stream(stream_seed(1, 0, SERVICE, 1), 1.0)
        b = exponential_stream(stream_seed(1, 1, SERVICE, 1), 1.0)
        c = exponential_stream(stream_seed(1, 0, SERVICE, 2), 1.0)
        first = [next(s) for s in (a, b, c)]
        assert len(set(first)) == 3

    def test_adding_a_class_leaves_other_streams(self):
        base = parse_network("node 1 mu=1\nclass a lambda=0.3 path=1\n")
        more = parse_network("node 1 mu=1\nnode 2 mu=1\nclass a lambda=0.3 path=1\nclass z lambda=0.2 path=2\n")
        cfg = SimConfig(horizon=2000, warmup_fraction=0, replications=1, master_seed=9)
        ra = run_replication(base, cfg, 0)[0]
        rb = run_replication(more, cfg, 0)[0]
        assert ra.exits == rb.exits and ra.sojourn == rb.sojourn


class TestSimulate:
    def test_deterministic(self):
        net = parse_network(TWO_CLASS)
        cfg = SimConfig(horizon=5000, replications=3, master_seed=42)
        assert repr(simulate(net, cfg)) == repr(simulate(net, cfg))

    def test_seed_changes_result(self):
        net = parse_network(MM1)
        a = simulate(net, SimConfig(horizon=5000, replications=2, master_seed=1))
        b = simulate(net, SimConfig(horizon=5000, replications=2, master_seed=2))
        assert a.classes["a"].h_hat.mean != b.classes["a"].h_hat.mean
        reps = a.classes["a"].replications
        assert reps[0].h != reps[1].h

    def test_replications_uncorrelated(self):
        net = parse_network(MM1)
        stats = simulate(net, SimConfig(horizon=2000, replications=40, master_seed=3))
        h = np.array([r.h for r in stats.classes["a"].replications])
        lag1 = np.corrcoef(h[:-1], h[1:])[0, 1]
        assert abs(lag1) < 0.45  # ~3 sigma for 39 pairs

    def test_invariants(self):
        net = parse_network(TWO_CLASS)
        stats = simulate(net, SimConfig(horizon=20_000, replications=4, master_seed=5, check_order=True))
        for cs in stats.classes.values():
            for r in cs.replications:
                assert r.h_left <= r.h <= r.h_right
                assert r.entered == r.exited + r.in_system
                assert r.departures <= r.exited
            assert cs.departures_count == sum(r.departures for r in cs.replications)

    def test_trace(self):
        buf = io.StringIO()
        net = parse_network(MM1)
        simulate(net, SimConfig(horizon=400, replications=1, master_seed=1, warmup_fraction=0), trace=buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "# replication 0"
        rows = [line.split(",") for line in lines[1:]]
        assert all(r[0] == "a" and float(r[1]) < float(r[2]) for r in rows)
        assert len(rows) >= 100

    def test_rejects_unstable(self):
        with pytest.raises(SimulationError, match="unstable"):
            simulate(parse_network(TWO_CLASS.replace("0.3", "0.6")), SimConfig(horizon=100))

    def test_rejects_overtaking_topology(self):
        net = parse_network("node 1 mu=1\nnode 2 mu=1\nnode 3 mu=1\n"
                            "class a lambda=0.1 path=1,2,3\nclass b lambda=0.1 path=1,3\n")
        with pytest.raises(SimulationError, match="overtake"):
            simulate(net, SimConfig(horizon=100))

    def test_too_few_departures(self):
        with pytest.raises(SimulationError, match="too few departures"):
            simulate(parse_network(MM1), SimConfig(horizon=1.0))

    @pytest.mark.parametrize("kwargs", [
        dict(horizon=0), dict(horizon=1, warmup_fraction=1.0), dict(horizon=1, replications=0),
        dict(horizon=1, master_seed=-1), dict(horizon=1, master_seed=2**64),
    ])
    def test_config_validation(self, kwargs):
        with pytest.raises(ValueError):
            SimConfig(**kwargs)


# --- statistical agreement (moderate horizons) --------------------------------

@pytest.fixture(scope="module")
def mm1_stats():
    return simulate(parse_network(MM1), SimConfig(horizon=300_000, replications=5, master_seed=11))


@pytest.fixture(scope="module")
def tandem_stats():
    return simulate(parse_network(TANDEM), SimConfig(horizon=300_000, replications=5, master_seed=12))


@pytest.fixture(scope="module")
def two_class_stats():
    return simulate(parse_network(TWO_CLASS), SimConfig(horizon=300_000, replications=5, master_seed=13))


def test_mm1_age(mm1_stats):
    assert mm1_stats.classes["a"].h_hat.mean == pytest.approx(3.5, rel=0.02)


def test_mm1_interdepartures(mm1_stats):
    s = mm1_stats.classes["a"]
    assert s.d_mean.mean == pytest.approx(2.0, rel=0.01)
    assert s.d_second_moment.mean == pytest.approx(8.0, rel=0.03)


def test_mm1_sojourn_and_peak(mm1_stats):
    s = mm1_stats.classes["a"]
    assert s.sojourn_mean.mean == pytest.approx(2.0, rel=0.02)
    assert s.peak_hat.mean == pytest.approx(4.0, rel=0.02)


def test_tandem_sojourn_and_peak(tandem_stats):
    s = tandem_stats.classes["a"]
    assert s.sojourn_mean.mean == pytest.approx(2 / 0.54, rel=0.02)
    assert s.peak_hat.mean == pytest.approx(1 / 0.46 + 2 / 0.54, rel=0.02)


def test_tandem_matches_lindley_oracle(tandem_stats):
    # independent recursion without an event calendar; 4 runs of ~150k packets
    ref = np.mean([tandem_sawtooth_age(0.46, 1.0, 2, 150_000, seed) for seed in range(4)])
    est = tandem_stats.classes["a"].h_hat
    assert est.mean == pytest.approx(ref, rel=0.01)


def test_two_class_interdepartures_and_sojourn(two_class_stats):
    for s in two_class_stats.classes.values():
        assert s.d_mean.mean == pytest.approx(1 / 0.3, rel=0.01)
        assert s.d_second_moment.mean == pytest.approx(2 / 0.09, rel=0.03)
        assert s.sojourn_mean.mean == pytest.approx(1 / 0.7 + 1 / 0.4, rel=0.02)


@pytest.fixture(scope="module")
def shared_queue_probe():
    net = parse_network("node 1 mu=1\nclass a lambda=0.3 path=1\nclass b lambda=0.3 path=1\n")
    return simulate(net, SimConfig(horizon=300_000, replications=5, master_seed=17, probe_node=1))


def test_probe_matches_monte_carlo_oracle(shared_queue_probe):
    ref, se = wa_monte_carlo(0.3, 0.6, 1.0, n=1_000_000, seed=1)
    for s in shared_queue_probe.classes.values():
        est = s.w_a_product_mean
        assert abs(est.mean - ref) < 3 * math.hypot(est.half_width / 2.776, se)


def test_probe_single_class_matches_closed_form():
    net = parse_network("node 1 mu=1\nclass a lambda=0.46 path=1\n")
    s = simulate(net, SimConfig(horizon=300_000, replications=5, master_seed=19, probe_node=1)).classes["a"]
    assert s.w_a_product_mean.contains(waiting_arrival_correlation(0.46, 0.46, 1.0))


@pytest.mark.xfail(strict=True, reason="closed-form E[W A] at a two-class queue is ~4.5% below the simulated "
                                       "and Monte Carlo values (3.22 vs ~3.37)")
def test_probe_matches_closed_form_two_class(shared_queue_probe):
    for s in shared_queue_probe.classes.values():
        assert s.w_a_product_mean.mean == pytest.approx(waiting_arrival_correlation(0.3, 0.6, 1.0), rel=0.02)
