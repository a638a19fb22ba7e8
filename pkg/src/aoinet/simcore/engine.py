"""Discrete-event simulation of a multi-class FCFS network of exponential servers."""

from __future__ import annotations

import heapq
import math
from collections import deque
from dataclasses import dataclass
from typing import TextIO

import numpy as np

from ..netmodel import NetworkSpec, check_overtake_free, check_stability, solve_traffic
from .estimators import Estimate, mean_ci, peak_age_from_arrays, sawtooth_from_arrays
from .events import ARRIVAL, COMPLETION, Event, Packet
from .streams import SERVICE, SOURCE, class_key, exponential_stream, stream_seed

MIN_DEPARTURES = 100


class SimulationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SimConfig:
    horizon: float
    warmup_fraction: float = 0.1
    replications: int = 10
    master_seed: int = 0
    # node at which to sample W * A for every class passing it (None disables)
    probe_node: int | None = None
    check_order: bool = False

    def __post_init__(self):
        if not (self.horizon > 0 and math.isfinite(self.horizon)):
            raise ValueError(f"horizon must be positive, got {self.horizon}")
        if not 0 <= self.warmup_fraction < 1:
            raise ValueError(f"warmup_fraction must be in [0, 1), got {self.warmup_fraction}")
        if self.replications < 1:
            raise ValueError(f"replications must be >= 1, got {self.replications}")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be an unsigned 64-bit integer")


@dataclass(frozen=True)
class ReplicationEstimate:
    """Per-class estimates from one replication."""

    h_left: float
    h: float
    h_right: float
    peak: float
    d_mean: float
    d_second_moment: float
    sojourn_mean: float
    w_a_product_mean: float  # nan when not probed
    departures: int
    entered: int
    exited: int
    in_system: int


@dataclass(frozen=True)
class ClassStats:
    h_hat: Estimate
    h_left_hat: Estimate
    h_right_hat: Estimate
    peak_hat: Estimate
    d_mean: Estimate
    d_second_moment: Estimate
    sojourn_mean: Estimate
    w_a_product_mean: Estimate | None
    departures_count: int
    replications: tuple[ReplicationEstimate, ...]


@dataclass(frozen=True)
class SimStats:
    config: SimConfig
    classes: dict[str, ClassStats]


@dataclass
class _ClassRecord:
    sojourn: list
    exits: list
    wa: list
    entered: int = 0
    exited: int = 0
    in_system: int = 0  # counted from the queues when the run stops


def _validate(net: NetworkSpec) -> None:
    flow = solve_traffic(net)
    bad = check_stability(flow, net)
    if bad:
        raise SimulationError("unstable network: " + "; ".join(map(str, bad)))
    bad = check_overtake_free(net)
    if bad:
        raise SimulationError("network is not overtake-free: " + "; ".join(map(str, bad)))


def run_replication(net: NetworkSpec, cfg: SimConfig, replication: int,
                    trace: TextIO | None = None) -> list[_ClassRecord]:
    """One independent run; returns the raw post-warm-up departure record per class."""
    classes = net.classes
    node_index = {n.id: i for i, n in enumerate(net.nodes)}
    # itineraries as node indices
    paths = [tuple(node_index[x] for x in c.itinerary) for c in classes]
    arrivals = [exponential_stream(stream_seed(cfg.master_seed, replication, SOURCE, class_key(c.name)), c.lam)
                for c in classes]
    services = [exponential_stream(stream_seed(cfg.master_seed, replication, SERVICE, n.id), n.mu)
                for n in net.nodes]
    queues = [deque() for _ in net.nodes]
    records = [_ClassRecord([], [], []) for _ in classes]
    last_gen = [math.nan] * len(classes)
    next_exit = [0] * len(classes)

    horizon = cfg.horizon
    warm_end = cfg.warmup_fraction * horizon
    probe = node_index.get(cfg.probe_node, -1) if cfg.probe_node is not None else -1
    check_order = cfg.check_order

    heap: list[Event] = []
    push, pop = heapq.heappush, heapq.heappop
    seq = 0
    for k in range(len(classes)):
        push(heap, Event(next(arrivals[k]), seq, ARRIVAL, paths[k][0], k))
        seq += 1

    while heap:
        ev = pop(heap)
        t = ev.time
        if t > horizon:
            break
        if ev.kind == ARRIVAL:
            k = ev.packet
            rec = records[k]
            pkt = Packet(k, t, rec.entered, t - last_gen[k])
            rec.entered += 1
            last_gen[k] = t
            push(heap, Event(t + next(arrivals[k]), seq, ARRIVAL, ev.node, k))
            seq += 1
            node = ev.node
        else:
            done = ev.node
            q = queues[done]
            pkt = q.popleft()
            if check_order and pkt is not ev.packet:
                raise SimulationError(f"FCFS violated at node {net.nodes[done].id} at t={t}")
            if q:
                head = q[0]
                if done == probe and head.node_arrival >= warm_end and head.gap == head.gap:
                    records[head.cls].wa.append((t - head.node_arrival) * head.gap)
                push(heap, Event(t + next(services[done]), seq, COMPLETION, done, head))
                seq += 1
            pkt.hop += 1
            path = paths[pkt.cls]
            if pkt.hop == len(path):
                k = pkt.cls
                if pkt.entry_seq != next_exit[k]:
                    raise SimulationError(
                        f"class {classes[k].name}: packet {pkt.entry_seq} exited before packet "
                        f"{next_exit[k]} (overtaking)")
                next_exit[k] += 1
                rec = records[k]
                rec.exited += 1
                if trace is not None:
                    trace.write(f"{classes[k].name},{pkt.gen_time!r},{t!r}\n")
                if t >= warm_end:
                    rec.sojourn.append(t - pkt.gen_time)
                    rec.exits.append(t)
                continue
            node = path[pkt.hop]

        # pkt joins the FCFS queue at node; service starts at once if the server is idle
        pkt.node_arrival = t
        q = queues[node]
        q.append(pkt)
        if len(q) == 1:
            if node == probe and t >= warm_end and pkt.gap == pkt.gap:
                records[pkt.cls].wa.append(0.0)
            push(heap, Event(t + next(services[node]), seq, COMPLETION, node, pkt))
            seq += 1

    for q in queues:
        for pkt in q:
            records[pkt.cls].in_system += 1
    return records


def _summarize(rec: _ClassRecord, name: str, replication: int) -> ReplicationEstimate:
    n = len(rec.exits)
    if n < MIN_DEPARTURES:
        raise SimulationError(
            f"too few departures: class {name} has {n} post-warm-up departures in replication "
            f"{replication} (need >= {MIN_DEPARTURES}); increase the horizon")
    sojourn = np.asarray(rec.sojourn)
    exits = np.asarray(rec.exits)
    h_left, h, h_right = sawtooth_from_arrays(sojourn, exits)
    gaps = np.diff(exits)
    return ReplicationEstimate(
        h_left=h_left, h=h, h_right=h_right,
        peak=peak_age_from_arrays(sojourn, exits),
        d_mean=float(gaps.mean()),
        d_second_moment=float(np.mean(gaps * gaps)),
        sojourn_mean=float(sojourn.mean()),
        w_a_product_mean=float(np.mean(rec.wa)) if rec.wa else math.nan,
        departures=n,
        entered=rec.entered,
        exited=rec.exited,
        in_system=rec.in_system,
    )


def simulate(net: NetworkSpec, cfg: SimConfig, trace: TextIO | None = None) -> SimStats:
    """Run ``cfg.replications`` independent replications and aggregate per class.

    ``trace`` receives one ``class,gen_time,exit_time`` line per departure,
    preceded by a ``# replication r`` comment line for each replication.
    """
    _validate(net)
    per_class: dict[str, list[ReplicationEstimate]] = {c.name: [] for c in net.classes}
    for r in range(cfg.replications):
        if trace is not None:
            trace.write(f"# replication {r}\n")
        records = run_replication(net, cfg, r, trace)
        for c, rec in zip(net.classes, records):
            per_class[c.name].append(_summarize(rec, c.name, r))

    out: dict[str, ClassStats] = {}
    for name, reps in per_class.items():
        probed = [x.w_a_product_mean for x in reps if x.w_a_product_mean == x.w_a_product_mean]
        out[name] = ClassStats(
            h_hat=mean_ci([x.h for x in reps]),
            h_left_hat=mean_ci([x.h_left for x in reps]),
            h_right_hat=mean_ci([x.h_right for x in reps]),
            peak_hat=mean_ci([x.peak for x in reps]),
            d_mean=mean_ci([x.d_mean for x in reps]),
            d_second_moment=mean_ci([x.d_second_moment for x in reps]),
            sojourn_mean=mean_ci([x.sojourn_mean for x in reps]),
            w_a_product_mean=mean_ci(probed) if probed else None,
            departures_count=sum(x.departures for x in reps),
            replications=tuple(reps),
        )
    return SimStats(cfg, out)
