"""Course-of-action generation over a box-graph ground combat model."""

__version__ = "0.1.0"

from .model import Scenario, ScenarioError, load_scenario, bundled_scenario_path
from .sim import SimResult, simulate
from .optimizer import OptimizeResult, optimize, sweep
from .cluster import cluster_all, cluster_stats, similarity, struct_sim

__all__ = [
    "Scenario", "ScenarioError", "load_scenario", "bundled_scenario_path",
    "SimResult", "simulate",
    "OptimizeResult", "optimize", "sweep",
    "cluster_all", "cluster_stats", "similarity", "struct_sim",
    "__version__",
]
