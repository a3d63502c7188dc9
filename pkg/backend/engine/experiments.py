"""
Strategy Runs

One entry point per transfer strategy so the command line and the HTTP
layer can run and compare them on the same scenario. Every run gets a
fresh executor on the same scenario, so identical seeds give identical
tables.
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

from core.errors import InvalidParameterError, OptimizerError
from core.partition import DEFAULT_THRESHOLDS, partition_files
from core.types import DEFAULT_BOUNDS, Chunk, ParamTriple
from online.controller import OnlineConfig
from online.driver import run_online_transfer
from simnet.executor import SimulatedExecutor
from simnet.scenario import SimScenario

from .baselines import STRATEGIES, grid_oracle, run_baseline
from .heuristics import CC_DEFAULT, heuristic_params
from .sampling import SamplingConfig, adaptive_sample, sample_portion
from .scheduler import HarpScheduler, build_plan

logger = logging.getLogger(__name__)


STRATEGY_NAMES = ('harp', 'harp-ot', 'go', 'sc', 'promc', 'pcp', 'oracle')


@dataclass(frozen=True)
class StrategyOutcome:
    strategy: str
    aggregate_throughput: float
    duration: float
    detail: dict = field(default_factory=dict, compare=False)
    timeline: Tuple = field(default=(), compare=False)
    decision_rows: Tuple = field(default=(), compare=False)

    def to_dict(self, include_timeline=False):
        data = {
            'strategy': self.strategy,
            'aggregateThroughput': self.aggregate_throughput,
            'duration': self.duration,
            'detail': self.detail,
        }
        if include_timeline:
            data['timeline'] = [
                {'t': p.t, 'throughput': p.throughput, 'flows': p.flows} for p in self.timeline
            ]
        return data

    def timeline_rows(self):
        return [(p.t, p.throughput, p.flows) for p in self.timeline]


def _require_optimizer(strategy, optimizer):
    if optimizer is None:
        raise OptimizerError(f"strategy {strategy!r} needs a history-backed optimizer")


def run_strategy(
    strategy,
    chunks: Sequence[Chunk],
    scenario,
    optimizer=None,
    settings=None,
    param_grid=None,
) -> StrategyOutcome:
    """
    Transfer chunks on the scenario with one strategy.

    Args:
        strategy: One of harp, harp-ot, go, sc, promc, pcp, oracle
        chunks: Chunks to move
        scenario: Simulation environment
        optimizer: HarpOptimizer (required by harp and harp-ot)
        settings: TuningSettings; defaults apply when omitted
        param_grid: Grid searched by the oracle

    Returns:
        StrategyOutcome
    """
    name = str(strategy).lower()
    if name not in STRATEGY_NAMES:
        raise InvalidParameterError(
            f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGY_NAMES)}"
        )
    chunks = list(chunks)
    network = scenario.network
    sampling = SamplingConfig.from_settings(settings) if settings else SamplingConfig()
    bounds = settings.bounds if settings else DEFAULT_BOUNDS

    if name == 'harp':
        _require_optimizer(name, optimizer)
        executor = SimulatedExecutor(scenario)
        if settings:
            scheduler = HarpScheduler.from_settings(optimizer, network, settings)
        else:
            scheduler = HarpScheduler(optimizer, network)
        report = scheduler.transfer(chunks, executor)
        return StrategyOutcome(name, report.aggregate_throughput, report.duration,
                               report.to_dict(), tuple(executor.simulation.timeline))

    if name == 'harp-ot':
        _require_optimizer(name, optimizer)
        config = OnlineConfig.from_settings(settings) if settings else OnlineConfig()
        assignments = [
            (chunk, heuristic_params(chunk, network, bounds)) for chunk in chunks
        ]
        report = run_online_transfer(assignments, scenario, optimizer, config)
        result = report.result
        return StrategyOutcome(name, result.aggregate_throughput, result.duration,
                               report.to_dict(), result.timeline, tuple(report.decision_rows()))

    if name == 'oracle':
        result = grid_oracle(chunks, scenario, param_grid)
        return StrategyOutcome(name, result.aggregate_throughput, result.duration, result.to_dict())

    executor = SimulatedExecutor(scenario)
    kwargs = {'config': sampling, 'bounds': bounds}
    if settings:
        kwargs['user_max_cc'] = settings.user_max_cc
    canonical = {s.lower(): s for s in STRATEGIES}[name]
    result = run_baseline(canonical, chunks, network, executor, **kwargs)
    return StrategyOutcome(name, result.aggregate_throughput, result.duration,
                           result.to_dict(), tuple(executor.simulation.timeline))


def compare_strategies(
    strategies: Sequence[str],
    chunks: Sequence[Chunk],
    scenario,
    optimizer=None,
    settings=None,
    param_grid=None,
):
    """Run several strategies on identical conditions; one outcome per strategy"""
    if not strategies:
        raise InvalidParameterError("no strategies to compare")
    outcomes = []
    for strategy in strategies:
        outcome = run_strategy(strategy, chunks, scenario, optimizer, settings, param_grid)
        logger.info("%-8s %.0f bps in %.1fs", outcome.strategy,
                    outcome.aggregate_throughput, outcome.duration)
        outcomes.append(outcome)
    return outcomes


def comparison_table(outcomes: Sequence[StrategyOutcome], baseline: Optional[str] = None):
    """Rows of (strategy, throughput bps, duration s, ratio to baseline)"""
    reference = None
    if baseline is not None:
        for outcome in outcomes:
            if outcome.strategy == baseline:
                reference = outcome.aggregate_throughput
    rows = []
    for outcome in outcomes:
        ratio = outcome.aggregate_throughput / reference if reference else None
        rows.append((outcome.strategy, outcome.aggregate_throughput, outcome.duration, ratio))
    return rows


def optimize_dataset(files, network, optimizer, probe=None, scenario=None, settings=None):
    """
    Optimizer decisions for every chunk of a dataset, plus the channel plan.

    Args:
        files: FileInfo records
        network: Path profile
        optimizer: HarpOptimizer
        probe: Optional (ParamTriple, throughput) applied to every chunk;
            without it each chunk is probed adaptively on `scenario`
        scenario: Environment for the adaptive probes; defaults to the
            network with no background traffic

    Returns:
        dict with per-chunk decisions and model diagnostics, and the plan
    """
    thresholds = settings.thresholds if settings else DEFAULT_THRESHOLDS
    bounds = settings.bounds if settings else DEFAULT_BOUNDS
    cc_default = settings.cc_default if settings else CC_DEFAULT
    sampling = SamplingConfig.from_settings(settings) if settings else SamplingConfig()

    chunks = partition_files(files, network, thresholds)
    executor = None
    if probe is None:
        executor = SimulatedExecutor(scenario or SimScenario(network=network))

    rows, results = [], []
    for chunk in chunks:
        if probe is None:
            probe_params = heuristic_params(chunk, network, bounds, cc_default)
            portion = sample_portion(chunk, sampling.sample_share)
            sample = adaptive_sample(portion, probe_params, executor, sampling)
            observed, converged = sample.throughput, sample.converged
        else:
            probe_params, observed = probe
            converged = None
        result = optimizer.optimize(chunk, network, probe_params, observed)
        results.append(result)
        rows.append({
            'chunkType': chunk.chunk_type.value,
            'fileCount': chunk.file_count,
            'totalBytes': chunk.total_size,
            'probe': {
                'params': list(probe_params.as_tuple()),
                'throughput': observed,
                'converged': converged,
            },
            'modelSet': optimizer.models_for(chunk, network).to_dict(),
            **result.to_dict(),
        })

    plan = build_plan(chunks, results)
    return {'chunks': rows, 'plan': plan.to_dict()}


def parse_probe(text):
    """Parse 'cc,p,pp=throughput' into (ParamTriple, throughput)"""
    try:
        params, throughput = str(text).split('=', 1)
        cc, p, pp = (int(v) for v in params.split(','))
        throughput = float(throughput)
    except ValueError:
        raise InvalidParameterError(f"probe must look like 'cc,p,pp=throughput', got {text!r}") from None
    if not throughput > 0:
        raise InvalidParameterError("probe throughput must be positive")
    return ParamTriple(cc, p, pp), throughput
