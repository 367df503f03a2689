from .engine import Simulation, run, run_seeds
from .metrics import MetricsReport, NodeReport, segment_counts, summarize, upstream_pint_fraction
from .specs import AdversarySpec, Arrival, Behavior, Prewarm, TrafficSpec
from .topology import Role, Topology, build_fibs, hop_distances

__all__ = [
    "AdversarySpec", "Arrival", "Behavior", "MetricsReport", "NodeReport", "Prewarm", "Role",
    "Simulation", "Topology", "TrafficSpec", "build_fibs", "hop_distances", "run",
    "run_seeds", "segment_counts", "summarize", "upstream_pint_fraction",
]
