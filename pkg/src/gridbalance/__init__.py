"""Distributed demand balancing for a self-balancing microgrid.

Building agents talk only to their graph neighbours, estimate the aggregate
demand by consensus, and step their own demand against a congestion price
until the grid settles just around its capacity.
"""

from .agent import AgentParams, BuildingState, demand_update, net_payoff, optimal_demand, utility
from .consensus import (
    WeightMatrix,
    best_constant_weights,
    consensus_round,
    eigenvalues_symmetric,
    run_averaging,
    tracking_round,
)
from .pricing import PricingParams, base_price, overload_penalty, price
from .protocol import ProtocolConfig, SimulationRecord, SlotOutcome, dynamic_slot, run, static_slot
from .scenario import Scenario, paper_preset, parse_scenario, serialize
from .topology import Graph, generate, is_connected, laplacian

__version__ = "0.1.0"
