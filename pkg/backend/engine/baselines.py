"""
Baseline Strategies

Reference transfer strategies that HARP is compared against:

- GO: fixed parameters per file size, chunks one after another
- SC: heuristic parameters with a BDP-based concurrency, chunks one after another
- ProMC: heuristic parameters, all chunks at once sharing a channel budget
- PCP: doubling probes on cc, then p, then pp until throughput drops
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

from core.errors import InvalidParameterError, PlanError, SamplingError
from core.types import DEFAULT_BOUNDS, Chunk, ChunkType, ParamTriple

from .heuristics import USER_MAX_CC, go_params, heuristic_params, sc_concurrency
from .sampling import SamplingConfig, adaptive_sample

logger = logging.getLogger(__name__)


STRATEGIES = ('GO', 'SC', 'ProMC', 'PCP')
PROMC_TYPE_FACTORS = {
    ChunkType.TINY: 6,
    ChunkType.SMALL: 3,
    ChunkType.MEDIUM: 2,
    ChunkType.LARGE: 1,
}


@dataclass(frozen=True)
class BaselineResult:
    strategy: str
    aggregate_throughput: float
    duration: float
    total_bytes: int
    params: Dict[str, ParamTriple] = field(default_factory=dict)
    probes: int = 0

    def to_dict(self):
        return {
            'strategy': self.strategy,
            'aggregateThroughput': self.aggregate_throughput,
            'duration': self.duration,
            'totalBytes': self.total_bytes,
            'params': {label: list(p.as_tuple()) for label, p in self.params.items()},
            'probes': self.probes,
        }


def _label(chunk):
    return chunk.chunk_type.value


def run_sequential(assignments, executor):
    """Move (chunk, params) pairs one after another; returns elapsed seconds"""
    started = executor.now()
    for chunk, params in assignments:
        handle = executor.start(chunk, params)
        executor.finish([handle])
    return executor.now() - started


def run_concurrent(assignments, executor):
    """Move (chunk, params) pairs all at once; returns elapsed seconds"""
    started = executor.now()
    handles = [executor.start(chunk, params) for chunk, params in assignments]
    executor.finish(handles)
    return executor.now() - started


def sc_params(chunk, network, bounds=DEFAULT_BOUNDS, user_max_cc=USER_MAX_CC) -> ParamTriple:
    base = heuristic_params(chunk, network, bounds)
    cc = min(sc_concurrency(chunk, network, user_max_cc), chunk.file_count)
    return bounds.clamp(cc, base.p, base.pp)


def promc_params(chunks, network, bounds=DEFAULT_BOUNDS, max_cc=USER_MAX_CC):
    """
    Heuristic p and pp per chunk; the max_cc channels are split by
    type factor x chunk size, at least one per chunk.
    """
    weights = [PROMC_TYPE_FACTORS[c.chunk_type] * c.total_size for c in chunks]
    total = sum(weights)
    params = []
    for chunk, weight in zip(chunks, weights):
        base = heuristic_params(chunk, network, bounds)
        cc = max(1, int(math.floor(max_cc * weight / total + 1e-9)))
        params.append(bounds.clamp(cc, base.p, base.pp))
    return params


def pcp_search(chunk, executor, bounds=DEFAULT_BOUNDS, config=SamplingConfig()):
    """
    Probe a chunk with doubling parameter values.

    Starting from (1, 1, 1), cc is doubled while each probe beats the best
    so far, then p, then pp. Probes move real files, which are taken off
    the chunk.

    Returns:
        (best params, chunk left to move or None, probe count)
    """
    best = ParamTriple(1, 1, 1)
    left = chunk
    probes = 0

    sample = adaptive_sample(left, best, executor, config)
    probes += 1
    best_thr = sample.throughput
    left = left.without(set(sample.completed_paths))

    limits = dict(zip(('cc', 'p', 'pp'), bounds.as_tuple()))
    for name in ('cc', 'p', 'pp'):
        while left is not None:
            value = getattr(best, name) * 2
            if value > limits[name]:
                break
            candidate = best.replace(**{name: value})
            try:
                sample = adaptive_sample(left, candidate, executor, config)
            except SamplingError as exc:
                logger.warning("PCP probe %s failed: %s", candidate, exc)
                break
            probes += 1
            left = left.without(set(sample.completed_paths))
            if sample.throughput < best_thr:
                break
            best, best_thr = candidate, sample.throughput

    logger.debug("PCP chose %s for the %s chunk after %d probes", best, _label(chunk), probes)
    return best, left, probes


def run_baseline(
    strategy,
    chunks: Sequence[Chunk],
    network,
    executor,
    bounds=DEFAULT_BOUNDS,
    user_max_cc=USER_MAX_CC,
    config: SamplingConfig = SamplingConfig(),
) -> BaselineResult:
    """
    Transfer chunks with one of the baseline strategies.

    Returns:
        BaselineResult whose aggregate throughput is dataset bytes over the
        wall time including any probing
    """
    chunks = list(chunks)
    if not chunks:
        raise PlanError("nothing to transfer")
    names = {s.lower(): s for s in STRATEGIES}
    key = str(strategy).lower()
    if key not in names:
        raise InvalidParameterError(
            f"unknown strategy {strategy!r}; expected one of {', '.join(STRATEGIES)}"
        )
    strategy = names[key]
    total_bytes = sum(c.total_size for c in chunks)
    probes = 0

    if strategy == 'GO':
        chosen = [go_params(c.avg_file_size, bounds) for c in chunks]
        duration = run_sequential(list(zip(chunks, chosen)), executor)
    elif strategy == 'SC':
        chosen = [sc_params(c, network, bounds, user_max_cc) for c in chunks]
        duration = run_sequential(list(zip(chunks, chosen)), executor)
    elif strategy == 'ProMC':
        chosen = promc_params(chunks, network, bounds, user_max_cc)
        duration = run_concurrent(list(zip(chunks, chosen)), executor)
    else:
        started = executor.now()
        chosen = []
        for chunk in chunks:
            best, left, count = pcp_search(chunk, executor, bounds, config)
            probes += count
            chosen.append(best)
            if left is not None:
                executor.finish([executor.start(left, best)])
        duration = executor.now() - started

    aggregate = total_bytes * 8 / duration if duration > 0 else 0.0
    logger.info("%s moved %d bytes at %.0f bps in %.1fs", strategy, total_bytes, aggregate, duration)
    return BaselineResult(
        strategy=strategy,
        aggregate_throughput=aggregate,
        duration=duration,
        total_bytes=total_bytes,
        params={_label(c): p for c, p in zip(chunks, chosen)},
        probes=probes,
    )


def grid_oracle(chunks: Sequence[Chunk], scenario, param_grid: Optional[Sequence[ParamTriple]] = None) -> BaselineResult:
    """
    Best fixed triple per chunk, found by simulating every grid point on
    the chunk alone, then all chunks moved together with their best triples.
    """
    from simnet.history_generator import default_param_grid
    from simnet.simulator import simulate_transfer

    chunks = list(chunks)
    if not chunks:
        raise PlanError("nothing to transfer")
    grid = list(param_grid) if param_grid is not None else default_param_grid()
    if not grid:
        raise InvalidParameterError("param_grid must not be empty")

    chosen = []
    for chunk in chunks:
        scored = [
            (simulate_transfer([(chunk, params)], scenario).aggregate_throughput, params)
            for params in grid
        ]
        best_thr, best = max(scored, key=lambda item: (item[0], [-v for v in item[1].as_tuple()]))
        logger.debug("Oracle: %s chunk best %s at %.0f bps", _label(chunk), best, best_thr)
        chosen.append(best)

    result = simulate_transfer(list(zip(chunks, chosen)), scenario)
    return BaselineResult(
        strategy='oracle',
        aggregate_throughput=result.aggregate_throughput,
        duration=result.duration,
        total_bytes=sum(c.total_size for c in chunks),
        params={_label(c): p for c, p in zip(chunks, chosen)},
    )
