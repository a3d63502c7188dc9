"""
Simulation Package

Deterministic transfer simulator, executors built on it, and the synthetic
history generator.
"""

from .scenario import (
    TICK_SECONDS,
    DEFAULT_FS_PROFILE,
    TRAFFIC_LEVELS,
    TrafficInterval,
    SimScenario,
    constant_traffic,
    traffic_preset,
    step_traffic,
    default_network,
    default_scenario,
    scenario_from_dict,
    load_scenarios,
    load_scenario,
)
from .throughput import pipelining_imbalance_penalty
from .engine import TimelinePoint, ChunkProgress, TransferSimulation
from .simulator import SimResult, simulate_transfer
from .executor import IntervalReading, TransferExecutor, SimulatedExecutor
from .history_generator import (
    GRID_VALUES,
    default_param_grid,
    uniform_dataset,
    generate_history,
)

__all__ = [
    'TICK_SECONDS',
    'DEFAULT_FS_PROFILE',
    'TRAFFIC_LEVELS',
    'TrafficInterval',
    'SimScenario',
    'constant_traffic',
    'traffic_preset',
    'step_traffic',
    'default_network',
    'default_scenario',
    'scenario_from_dict',
    'load_scenarios',
    'load_scenario',
    'pipelining_imbalance_penalty',
    'TimelinePoint',
    'ChunkProgress',
    'TransferSimulation',
    'SimResult',
    'simulate_transfer',
    'IntervalReading',
    'TransferExecutor',
    'SimulatedExecutor',
    'GRID_VALUES',
    'default_param_grid',
    'uniform_dataset',
    'generate_history',
]
