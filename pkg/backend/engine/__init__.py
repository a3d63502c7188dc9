"""
Tuning Engine

Parameter optimisation, probing, channel allocation and the strategies
HARP is compared with.
"""

from .baselines import BaselineResult, grid_oracle, run_baseline
from .cost_model import cost_min_chunk_size, cost_table
from .experiments import (
    STRATEGY_NAMES,
    StrategyOutcome,
    compare_strategies,
    optimize_dataset,
    parse_probe,
    run_strategy,
)
from .heuristics import go_params, heuristic_params, sc_concurrency
from .optimizer import HarpOptimizer, OptimizerRequest, OptimizerResult, maximize, optimize, relax
from .sampling import SampleResult, SamplingConfig, adaptive_sample, fixed_size_sample, sample_portion
from .scheduler import HarpScheduler, TransferPlan, build_plan, execute_plan

__all__ = [
    'BaselineResult',
    'grid_oracle',
    'run_baseline',
    'cost_min_chunk_size',
    'cost_table',
    'STRATEGY_NAMES',
    'StrategyOutcome',
    'compare_strategies',
    'optimize_dataset',
    'parse_probe',
    'run_strategy',
    'go_params',
    'heuristic_params',
    'sc_concurrency',
    'HarpOptimizer',
    'OptimizerRequest',
    'OptimizerResult',
    'maximize',
    'optimize',
    'relax',
    'SampleResult',
    'SamplingConfig',
    'sample_portion',
    'adaptive_sample',
    'fixed_size_sample',
    'HarpScheduler',
    'TransferPlan',
    'build_plan',
    'execute_plan',
]
