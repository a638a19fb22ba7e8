"""Age of Information on overtake-free paths of FCFS M/M/1 queues."""

from .analytic import (
    AgeReport,
    DomainError,
    PathHop,
    PathLoads,
    age_path,
    analyze_network,
    path_loads,
    peak_age_path,
    sojourn_interdeparture_product,
    tandem_age,
    two_class_ages,
    waiting_arrival_correlation,
)
from .netmodel import (
    ClassSpec,
    FlowSolution,
    NetworkError,
    NetworkSpec,
    NodeSpec,
    ParseError,
    check_overtake_free,
    check_stability,
    format_network,
    parse_network,
    solve_traffic,
)

__version__ = "0.1.0"
