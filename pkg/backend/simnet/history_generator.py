"""
Synthetic History

Produces history logs by sweeping parameter grids over simulated transfers,
the way a real deployment would collect them: every (scenario, dataset,
repeat) sweep runs the whole grid back to back and shares one session id.
"""

import itertools
import logging
from typing import List, Optional, Sequence

import numpy as np

from core.errors import InvalidParameterError
from core.partition import DEFAULT_THRESHOLDS, classify_file
from core.types import Chunk, FileInfo, HistoryEntry, ParamTriple

from .scenario import SimScenario
from .simulator import simulate_transfer

logger = logging.getLogger(__name__)


GRID_VALUES = (1, 2, 4, 8, 16, 32)

# 2024-01-01T00:00:00Z
DEFAULT_BASE_TIME = 1_704_067_200
SWEEP_SPACING = 1800
RUN_SPACING = 5


def default_param_grid(values=GRID_VALUES) -> List[ParamTriple]:
    """Every (cc, p, pp) combination of the given values, 216 by default"""
    return [ParamTriple(cc, p, pp) for cc, p, pp in itertools.product(values, repeat=3)]


def uniform_dataset(file_count, file_size, network, name='file', thresholds=DEFAULT_THRESHOLDS) -> Chunk:
    """A chunk of equally sized files, typed against the network's BDP"""
    if file_count < 1:
        raise InvalidParameterError("a dataset needs at least one file")
    files = tuple(FileInfo(f"{name}-{i:05d}", int(file_size)) for i in range(int(file_count)))
    return Chunk(classify_file(file_size, network, thresholds), files)


def run_seed(scenario_seed, *indices) -> int:
    """Independent, reproducible noise seed for one simulated run"""
    return int(np.random.SeedSequence([int(scenario_seed), *indices]).generate_state(1)[0])


def generate_history(
    scenario_grid: Sequence[SimScenario],
    datasets: Sequence[Chunk],
    param_grid: Optional[Sequence[ParamTriple]] = None,
    repeats=1,
    source='source',
    destination='destination',
    base_time=DEFAULT_BASE_TIME,
) -> List[HistoryEntry]:
    """
    Sweep the parameter grid over every scenario and dataset.

    Args:
        scenario_grid: Environments to collect under (e.g. traffic levels)
        datasets: Chunks to transfer in each sweep
        param_grid: Triples to try; defaults to {1,2,4,8,16,32}^3
        repeats: Sweeps per (scenario, dataset)
        source, destination: Endpoint identifiers stored on each entry
        base_time: collected_at of the first run

    Returns:
        One HistoryEntry per (scenario, dataset, param, repeat)
    """
    if repeats < 1:
        raise InvalidParameterError(f"repeats must be at least 1, got {repeats}")
    grid = list(param_grid) if param_grid is not None else default_param_grid()
    if not grid:
        raise InvalidParameterError("param_grid must not be empty")

    entries = []
    sweep = 0
    for s_idx, scenario in enumerate(scenario_grid):
        for d_idx, dataset in enumerate(datasets):
            for repeat in range(repeats):
                session_id = f"s{scenario.seed}-{s_idx:02d}-{d_idx:02d}-{repeat:02d}"
                sweep_start = base_time + sweep * SWEEP_SPACING
                for k, params in enumerate(grid):
                    seeded = scenario.with_seed(run_seed(scenario.seed, s_idx, d_idx, repeat, k))
                    result = simulate_transfer([(dataset, params)], seeded)
                    entries.append(HistoryEntry(
                        source=source,
                        destination=destination,
                        network=scenario.network,
                        chunk_type=dataset.chunk_type,
                        avg_file_size=dataset.avg_file_size,
                        file_count=dataset.file_count,
                        params=params,
                        throughput=result.aggregate_throughput,
                        collected_at=int(sweep_start + k * RUN_SPACING),
                        session_id=session_id,
                    ))
                sweep += 1
                logger.debug("Sweep %s: %d runs", session_id, len(grid))

    logger.info("Generated %d history entries over %d sweeps", len(entries), sweep)
    return entries
