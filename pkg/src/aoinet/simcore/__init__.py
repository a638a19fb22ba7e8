from .engine import (
    ClassStats,
    ReplicationEstimate,
    SimConfig,
    SimStats,
    SimulationError,
    run_replication,
    simulate,
)
from .estimators import (
    Estimate,
    EstimationError,
    estimate_age_sawtooth,
    interdeparture_stats,
    mean_ci,
    sojourn_stats,
)
from .events import ARRIVAL, COMPLETION, Event, EventQueue, Packet

__all__ = [
    "ARRIVAL", "COMPLETION", "ClassStats", "Estimate", "EstimationError", "Event", "EventQueue",
    "Packet", "ReplicationEstimate", "SimConfig", "SimStats", "SimulationError",
    "estimate_age_sawtooth", "interdeparture_stats", "mean_ci", "run_replication", "simulate",
    "sojourn_stats",
]
