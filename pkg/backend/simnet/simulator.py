"""
Transfer Simulator

One-shot entry point over the simulation engine: run a set of chunks with
fixed parameters to completion and report aggregate throughput.
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Tuple

from core.errors import ScenarioError
from core.types import Chunk, ParamTriple

from .engine import TimelinePoint, TransferSimulation
from .scenario import SimScenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimResult:
    """Outcome of a simulated transfer"""

    aggregate_throughput: float
    duration: float
    timeline: Tuple[TimelinePoint, ...]
    flows_used: int
    total_bytes: float = 0.0

    def timeline_rows(self):
        """Rows for the (t_s, throughput_bps, flows) timeline export"""
        return [(point.t, point.throughput, point.flows) for point in self.timeline]

    def to_dict(self, include_timeline=False):
        data = {
            'aggregateThroughput': self.aggregate_throughput,
            'duration': self.duration,
            'flowsUsed': self.flows_used,
            'totalBytes': self.total_bytes,
        }
        if include_timeline:
            data['timeline'] = [
                {'t': p.t, 'throughput': p.throughput, 'flows': p.flows}
                for p in self.timeline
            ]
        return data


def simulate_transfer(
    chunks: Sequence[Tuple[Chunk, ParamTriple]],
    scenario: SimScenario,
    start=0.0
) -> SimResult:
    """
    Run chunks concurrently from `start` until all files have arrived.

    Args:
        chunks: (chunk, parameters) pairs, all launched at `start`
        scenario: Simulation environment (its seed fixes the noise)
        start: Simulated start time, which positions the run on the
            scenario's traffic timeline

    Returns:
        SimResult
    """
    if not chunks:
        raise ScenarioError("nothing to transfer: the chunk list is empty")
    if scenario.network.bandwidth <= 0:
        raise ScenarioError("scenario bandwidth must be positive")

    sim = TransferSimulation(scenario, start=start)
    ids = [sim.add_chunk(chunk, params) for chunk, params in chunks]
    sim.run_until_idle()
    result = sim.result(ids)
    logger.debug("Simulated %d chunk(s): %.0f bps over %.2fs",
                 len(ids), result.aggregate_throughput, result.duration)
    return result
