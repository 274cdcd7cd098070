"""Discrete evacuation of agents on graphs: an offline optimum solver and a
distributed strategy based on B-partitions and zone-graph colorings."""

from .engine import Trace, TraceReport, WorldState, apply_step, validate_trace
from .framework import EvacuationResult, evacuate, plan_zone
from .graph import Graph, build_grid, build_star_chain
from .instance import Instance, make_instance
from .offline import Infeasible, compute_opt

__all__ = [
    "Graph", "Instance", "Trace", "TraceReport", "WorldState", "EvacuationResult", "Infeasible",
    "apply_step", "build_grid", "build_star_chain", "compute_opt", "evacuate", "make_instance",
    "plan_zone", "validate_trace",
]
