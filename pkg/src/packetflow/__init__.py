"""Packet routing with deterministic queuing and its flow-over-time limit."""

from .continuous import FlowOverTime, HorizonExceeded, arc_outflow, check_feasibility, commodity_split, load_network
from .coupling import (
    CoupledRun,
    DiscreteFlowFunctions,
    DiscreteQueueStats,
    build_packets,
    couple,
    exit_identity_violations,
    extract_rates,
    position_in_step,
    refined_arrival,
)
from .discrete import EventLog, NonTerminationError, Packet, PacketId, network_loading
from .model import (
    Arc,
    Commodity,
    Discretization,
    DiscretizedArc,
    Network,
    SupplyRate,
    ceil_to_grid,
    discretize,
    floor_to_grid,
    rate_bound,
)
from .piecewise import PiecewiseLinear, StepFunction
from .scenario import Scenario, ScenarioError, dumps_scenario, load_scenario, loads_scenario, validate_scenario

__version__ = "0.1.0"
