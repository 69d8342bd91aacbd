"""Random-surfer models of a website built from access logs and its link graph."""

from .graph import LinkGraph, induced_visited_subgraph, load_edge_list, sublinear_scale
from .logmodel import FilterRules, LogRecord, normalize_url, parse_log_line
from .metrics import gini, lorenz_points, pearson
from .sessions import SessionConfig, split_sessions
from .surfer import (
    SolverConfig,
    StationaryDistribution,
    lateral_distribution,
    monte_carlo_walk,
    pagerank_power,
    pagerank_solve,
    pragmatic_distribution,
    uniform_distribution,
)

__version__ = "0.1.0"

__all__ = [
    "FilterRules",
    "LinkGraph",
    "LogRecord",
    "SessionConfig",
    "SolverConfig",
    "StationaryDistribution",
    "gini",
    "induced_visited_subgraph",
    "lateral_distribution",
    "load_edge_list",
    "lorenz_points",
    "monte_carlo_walk",
    "normalize_url",
    "pagerank_power",
    "pagerank_solve",
    "parse_log_line",
    "pearson",
    "pragmatic_distribution",
    "split_sessions",
    "sublinear_scale",
    "uniform_distribution",
]
