"""
Transfer Executors

The scheduler and the online controller drive transfers through this
interface. SimulatedExecutor runs everything on one shared simulation
clock; an adapter for a real transfer service would implement the same
methods.
"""

import logging
from dataclasses import dataclass

from core.errors import ExecutorError, SamplingError
from core.types import Chunk, ParamTriple

from .engine import ChunkProgress, TransferSimulation
from .scenario import SimScenario

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class IntervalReading:
    """Throughput of one chunk over one monitor interval"""

    throughput: float
    elapsed: float
    bytes_moved: float
    finished: bool


class TransferExecutor:
    """Base class for anything that can move chunks"""

    def now(self) -> float:
        raise NotImplementedError("executor must implement now()")

    def start(self, chunk: Chunk, params: ParamTriple, t=None):
        """Begin moving a chunk; returns an opaque handle"""
        raise NotImplementedError("executor must implement start()")

    def poll_interval_throughput(self, handle, interval) -> IntervalReading:
        """Let `interval` seconds pass and report what the chunk achieved"""
        raise NotImplementedError("executor must implement poll_interval_throughput()")

    def poll_many(self, handles, interval):
        """One shared interval for several running chunks; dict handle -> reading"""
        raise NotImplementedError("executor must implement poll_many()")

    def stop(self, handle) -> ChunkProgress:
        raise NotImplementedError("executor must implement stop()")

    def retune(self, handle, params: ParamTriple, conn_setup=0.0) -> float:
        raise NotImplementedError("executor must implement retune()")

    def progress(self, handle) -> ChunkProgress:
        raise NotImplementedError("executor must implement progress()")

    def wait(self, seconds):
        """Let time pass; running chunks keep moving"""
        raise NotImplementedError("executor must implement wait()")

    def finish(self, handles):
        """Block until the given chunks complete; returns their SimResult"""
        raise NotImplementedError("executor must implement finish()")


class SimulatedExecutor(TransferExecutor):
    """Executor backed by a TransferSimulation"""

    def __init__(self, scenario: SimScenario, start=0.0):
        self.scenario = scenario
        self.simulation = TransferSimulation(scenario, start=start)

    def now(self):
        return self.simulation.now

    def start(self, chunk, params, t=None):
        if t is not None and t > self.simulation.now:
            self.simulation.advance(t, stop_when_idle=False)
        try:
            return self.simulation.add_chunk(chunk, params)
        except Exception as exc:
            raise ExecutorError(chunk.chunk_type.value, str(exc)) from exc

    def poll_interval_throughput(self, handle, interval):
        before = self.simulation.progress(handle)
        if before.finished:
            raise SamplingError(f"chunk {handle} has already finished")
        return self.poll_many([handle], interval)[handle]

    def poll_many(self, handles, interval):
        if interval <= 0:
            raise SamplingError("monitor interval must be positive")
        before = {handle: self.simulation.progress(handle) for handle in handles}

        t0 = self.simulation.now
        self.simulation.advance(t0 + interval)

        readings = {}
        for handle in handles:
            after = self.simulation.progress(handle)
            end = after.finished_at if after.finished else self.simulation.now
            elapsed = max(end - t0, 0.0)
            moved = after.bytes_moved - before[handle].bytes_moved
            throughput = moved * 8 / elapsed if elapsed > 0 else 0.0
            readings[handle] = IntervalReading(throughput, elapsed, moved, after.finished)
        return readings

    def stop(self, handle):
        progress = self.simulation.stop_chunk(handle)
        logger.debug("Stopped %s after %d files", handle, len(progress.completed_paths))
        return progress

    def retune(self, handle, params, conn_setup=0.0):
        return self.simulation.retune(handle, params, conn_setup=conn_setup)

    def progress(self, handle):
        return self.simulation.progress(handle)

    def wait(self, seconds):
        if seconds > 0:
            self.simulation.advance(self.simulation.now + seconds, stop_when_idle=False)

    def finish(self, handles):
        self.simulation.run_until_idle()
        return self.simulation.result(handles)
