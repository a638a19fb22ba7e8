"""Closed-form Age of Information along an overtake-free path of FCFS M/M/1 queues.

For a class with Poisson rate ``lam`` crossing nodes ``j = 1..n`` (service rate
``mu_j``, total load ``rho_j``, own load ``rho_cj``) the time-average age at the
path output is

    H_left = lam * sum_j (E[W_j A] + 1 / (mu_j * lam))
    H      = H_left + 1 / lam
    H_right = H_left + 2 / lam

where ``E[W_j A]`` is the correlation between the waiting time at node ``j``
and the class interarrival time (see :func:`waiting_arrival_correlation`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .netmodel import FlowSolution, NetworkSpec, check_stability, solve_traffic

# 1 - rho below this is treated as saturated (cancellation dominates beyond it).
SATURATION_GUARD = 1e-12


class DomainError(ValueError):
    """Inputs outside the region where the closed forms are defined (e.g. rho >= 1)."""


@dataclass(frozen=True)
class PathHop:
    node: int
    mu: float
    rho: float
    rho_c: float


@dataclass(frozen=True)
class PathLoads:
    lam: float
    hops: tuple[PathHop, ...]

    def __post_init__(self):
        object.__setattr__(self, "hops", tuple(self.hops))
        if not (self.lam > 0 and math.isfinite(self.lam)):
            raise DomainError(f"class rate must be positive, got {self.lam}")
        if not self.hops:
            raise DomainError("path has no nodes")
        for h in self.hops:
            _check_node(h.rho_c, h.rho, h.mu, where=f"node {h.node}")
            if not math.isclose(self.lam, h.rho_c * h.mu, rel_tol=1e-9):
                raise DomainError(
                    f"node {h.node}: class load {h.rho_c} * mu {h.mu} != class rate {self.lam}")

    @classmethod
    def homogeneous(cls, n: int, lam: float, mu: float) -> "PathLoads":
        """``n`` identical nodes carrying only this class."""
        rho = lam / mu
        return cls(lam, tuple(PathHop(j + 1, mu, rho, rho) for j in range(n)))


@dataclass(frozen=True)
class NodeTerm:
    node: int
    waiting: float  # lam * E[W_j A]
    service: float  # 1 / mu_j


@dataclass(frozen=True)
class AgeReport:
    lam: float
    h_left: float
    h: float
    h_right: float
    peak: float
    e_sd: float
    per_node_terms: tuple[NodeTerm, ...]
    # True when the path has more than one node: peak age is then the additive extension
    peak_extended: bool = False


def _check_node(rho_c: float, rho: float, mu: float, where: str = "node") -> None:
    if not mu > 0:
        raise DomainError(f"{where}: service rate must be positive, got {mu}")
    if not rho_c > 0:
        raise DomainError(f"{where}: class load must be positive, got {rho_c}")
    if rho_c > rho * (1 + 1e-12):
        raise DomainError(f"{where}: class load {rho_c} exceeds total load {rho}")
    if not 1.0 - rho >= SATURATION_GUARD:
        raise DomainError(f"{where}: unstable, total load {rho} >= 1")


def waiting_arrival_correlation(rho_c: float, rho: float, mu: float) -> float:
    """E[W A] at a multi-class FCFS M/M/1 queue.

    ``W`` is the waiting time of a class-c packet and ``A`` the interarrival
    time preceding it; ``rho_c`` is the class load and ``rho`` the total load.
    """
    _check_node(rho_c, rho, mu)
    other = max(rho - rho_c, 0.0)
    own = rho_c * (1.0 - rho * other) / ((1.0 - rho) * (1.0 - other) ** 3)
    cross = other / (rho_c * (1.0 - other))
    return (own + cross) / (mu * mu)


def sojourn_interdeparture_product(loads: PathLoads) -> float:
    """E[S D]: end-to-end sojourn times the following interdeparture gap."""
    return math.fsum(
        waiting_arrival_correlation(h.rho_c, h.rho, h.mu) + 1.0 / (h.mu * loads.lam)
        for h in loads.hops
    )


def peak_age_path(loads: PathLoads) -> float:
    """Mean peak age ``1/lam + sum_j 1/(mu_j - lam_j)``.

    Exact for a single queue; for longer paths this is the additive extension
    using independent exponential per-node sojourns.
    """
    return 1.0 / loads.lam + math.fsum(1.0 / (h.mu * (1.0 - h.rho)) for h in loads.hops)


def age_path(loads: PathLoads) -> AgeReport:
    terms = tuple(
        NodeTerm(h.node, loads.lam * waiting_arrival_correlation(h.rho_c, h.rho, h.mu), 1.0 / h.mu)
        for h in loads.hops
    )
    e_sd = sojourn_interdeparture_product(loads)
    h_left = loads.lam * e_sd
    inv = 1.0 / loads.lam
    return AgeReport(
        lam=loads.lam,
        h_left=h_left,
        h=h_left + inv,
        h_right=h_left + 2.0 * inv,
        peak=peak_age_path(loads),
        e_sd=e_sd,
        per_node_terms=terms,
        peak_extended=len(loads.hops) > 1,
    )


def tandem_age(n: int, lam: float, mu: float) -> float:
    """Age at the output of ``n`` identical M/M/1 queues in tandem, one class."""
    if n < 1:
        raise DomainError(f"path length must be >= 1, got {n}")
    if not (lam > 0 and mu > 0):
        raise DomainError("rates must be positive")
    if not lam < mu or 1.0 - lam / mu < SATURATION_GUARD:
        raise DomainError(f"unstable: lambda={lam} >= mu={mu}")
    rho = lam / mu
    return n * rho * rho / (mu - lam) + n / mu + 1.0 / lam


def _two_class_one(la: float, lb: float, mu_in: float, mu_out: float) -> float:
    # age of the class entering at rate la through its private node mu_in,
    # sharing the output node mu_out with the other class at rate lb
    rho_in = la / mu_in
    rho_out = (la + lb) / mu_out
    ra = la / mu_out
    rb = lb / mu_out
    shared = (ra * (1.0 - rho_out * rb) / ((1.0 - rho_out) * (1.0 - rb) ** 3)
              + rb / (ra * (1.0 - rb)))
    return (rho_in * rho_in / (mu_in - la)
            + la / (mu_out * mu_out) * shared
            + 1.0 / mu_in + 1.0 / mu_out + 1.0 / la)


def two_class_ages(lambda_a: float, lambda_b: float, mu1: float, mu2: float, mu3: float) -> tuple[float, float]:
    """Ages of classes a (path 1->3) and b (path 2->3) sharing output node 3."""
    if not (lambda_a > 0 and lambda_b > 0):
        raise DomainError("class rates must be positive")
    if not (mu1 > 0 and mu2 > 0 and mu3 > 0):
        raise DomainError("service rates must be positive")
    for rate, mu, label in ((lambda_a, mu1, "node 1"), (lambda_b, mu2, "node 2"),
                            (lambda_a + lambda_b, mu3, "node 3")):
        if not rate < mu or 1.0 - rate / mu < SATURATION_GUARD:
            raise DomainError(f"{label}: unstable, lambda={rate} >= mu={mu}")
    return (_two_class_one(lambda_a, lambda_b, mu1, mu3),
            _two_class_one(lambda_b, lambda_a, mu2, mu3))


# --- network-level helpers --------------------------------------------------

def path_loads(net: NetworkSpec, flow: FlowSolution, class_name: str) -> PathLoads:
    c = net.cls(class_name)
    hops = []
    for node_id in c.itinerary:
        hops.append(PathHop(
            node=node_id,
            mu=net.node(node_id).mu,
            rho=flow.node_load[node_id],
            rho_c=flow.class_node_load[(class_name, node_id)],
        ))
    return PathLoads(c.lam, tuple(hops))


def analyze_network(net: NetworkSpec) -> dict[str, AgeReport]:
    """Age report for every class, in declaration order."""
    flow = solve_traffic(net)
    bad = check_stability(flow, net)
    if bad:
        raise DomainError("unstable network: " + "; ".join(map(str, bad)))
    return {c.name: age_path(path_loads(net, flow, c.name)) for c in net.classes}


def two_class_boundary_age(lambda_a: float, mu1: float, mu3: float) -> float:
    """Limit of the class-a age in the two-class network as the other class rate tends to 0."""
    return age_path(PathLoads(lambda_a, (
        PathHop(1, mu1, lambda_a / mu1, lambda_a / mu1),
        PathHop(3, mu3, lambda_a / mu3, lambda_a / mu3),
    ))).h
