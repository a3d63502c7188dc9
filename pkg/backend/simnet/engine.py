"""
Transfer Simulation Engine

A tick-stepped simulation of chunks moving over one shared path. Each chunk
runs cc channels that pull files from the chunk's queue as they free up;
channels share the link with each other and with background flows, ramp up
after they open, and are jointly limited by the storage saturation curve.

The engine is incremental so the same state can be sampled, retuned and
stopped by executors and the online controller.
"""

import logging
import math
from collections import OrderedDict, deque
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from core.errors import InvalidParameterError, ScenarioError
from core.types import Chunk, ParamTriple

from .scenario import SimScenario
from .throughput import (
    control_delay,
    per_flow_rate,
    pipelining_imbalance_penalty,
    slow_start_factor,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TimelinePoint:
    """Instantaneous throughput over the tick ending at t"""

    t: float
    throughput: float
    flows: int


@dataclass(frozen=True)
class ChunkProgress:
    chunk_id: str
    params: ParamTriple
    bytes_moved: float
    completed_paths: Tuple[str, ...]
    started_at: float
    finished_at: Optional[float]
    files_remaining: int

    @property
    def finished(self) -> bool:
        return self.finished_at is not None


@dataclass
class _Channel:
    ready_at: float
    ramp_start: float
    current: object = None
    remaining: float = 0.0
    delay: float = 0.0
    retiring: bool = False
    done: bool = False
    finished_at: Optional[float] = None


@dataclass
class _ChunkRun:
    chunk_id: str
    chunk: Chunk
    params: ParamTriple
    queue: deque
    started_at: float
    penalty: float
    channels: List[_Channel] = field(default_factory=list)
    completed: List[str] = field(default_factory=list)
    bytes_moved: float = 0.0
    finished_at: Optional[float] = None
    stopped: bool = False

    @property
    def live(self):
        return self.finished_at is None and not self.stopped


class TransferSimulation:
    """
    Incremental simulation of concurrent chunk transfers.

    Usage:
        sim = TransferSimulation(scenario)
        cid = sim.add_chunk(chunk, ParamTriple(4, 2, 8))
        sim.run_until_idle()
        result = sim.result()
    """

    def __init__(self, scenario: SimScenario, start=0.0):
        self.scenario = scenario
        self.now = float(start)
        self.timeline: List[TimelinePoint] = []
        self._rng = np.random.default_rng(scenario.seed)
        self._runs = OrderedDict()
        self._next_id = 0

    # Chunk lifecycle

    def add_chunk(self, chunk: Chunk, params: ParamTriple, chunk_id=None, setup_delay=0.0) -> str:
        """Start moving a chunk at the current simulated time"""
        if chunk_id is None:
            chunk_id = f"chunk-{self._next_id}"
            self._next_id += 1
        if chunk_id in self._runs and self._runs[chunk_id].live:
            raise InvalidParameterError(f"chunk {chunk_id} is already running")

        run = _ChunkRun(
            chunk_id=chunk_id,
            chunk=chunk,
            params=params,
            queue=deque(chunk.files),
            started_at=self.now,
            penalty=pipelining_imbalance_penalty(params.cc, params.pp, chunk.file_count),
        )
        for _ in range(params.cc):
            self._open_channel(run, self.now + setup_delay)
        self._runs[chunk_id] = run
        self._settle(run)
        logger.debug("Started %s %s with %s on %d files",
                     chunk_id, chunk.chunk_type.value, params, chunk.file_count)
        return chunk_id

    def _open_channel(self, run, ready_at):
        channel = _Channel(ready_at=ready_at, ramp_start=ready_at)
        self._pull(run, channel, ready_at)
        run.channels.append(channel)
        return channel

    def _pull(self, run, channel, at):
        """Give the channel its next file, or close it when nothing is left"""
        if channel.retiring or not run.queue:
            channel.current = None
            channel.done = True
            channel.finished_at = at
            return
        info = run.queue.popleft()
        channel.current = info
        channel.remaining = float(info.size)
        channel.delay = control_delay(
            self.scenario.effective_control_latency, run.params, self.scenario.stripe_overhead
        )

    def _settle(self, run):
        if run.finished_at is None and not run.queue and all(ch.done for ch in run.channels):
            run.finished_at = max(
                (ch.finished_at for ch in run.channels if ch.finished_at is not None),
                default=self.now,
            )

    def retune(self, chunk_id, params: ParamTriple, conn_setup=0.0) -> float:
        """
        Switch a running chunk to new parameters.

        Pipelining changes apply to the next file command at no cost. Opening
        a channel costs conn_setup; changing parallelism reopens every active
        channel. Dropped channels finish their current file first.

        Returns:
            Connection setup seconds charged by the change
        """
        run = self._live_run(chunk_id)
        old = run.params
        cost = 0.0
        active = [ch for ch in run.channels if not ch.done and not ch.retiring]

        if params.p != old.p:
            for channel in active:
                channel.ready_at = max(channel.ready_at, self.now) + conn_setup
                channel.ramp_start = channel.ready_at
            cost += conn_setup * len(active)

        run.params = params
        run.penalty = pipelining_imbalance_penalty(params.cc, params.pp, run.chunk.file_count)

        if params.cc > len(active):
            added = 0
            for _ in range(params.cc - len(active)):
                if not run.queue:
                    break
                self._open_channel(run, self.now + conn_setup)
                added += 1
            cost += conn_setup * added
        elif params.cc < len(active):
            for channel in active[params.cc:]:
                channel.retiring = True
                if channel.current is None:
                    channel.done = True
                    channel.finished_at = self.now

        logger.debug("Retuned %s %s -> %s (cost %.1fs)", chunk_id, old, params, cost)
        return cost

    def stop_chunk(self, chunk_id) -> ChunkProgress:
        """Abort a chunk; files in flight are not counted as completed"""
        run = self._live_run(chunk_id)
        run.stopped = True
        for channel in run.channels:
            channel.done = True
            channel.current = None
        return self.progress(chunk_id)

    def _live_run(self, chunk_id):
        run = self._runs.get(chunk_id)
        if run is None:
            raise InvalidParameterError(f"unknown chunk {chunk_id}")
        if not run.live:
            raise InvalidParameterError(f"chunk {chunk_id} is no longer running")
        return run

    def progress(self, chunk_id) -> ChunkProgress:
        run = self._runs.get(chunk_id)
        if run is None:
            raise InvalidParameterError(f"unknown chunk {chunk_id}")
        return ChunkProgress(
            chunk_id=chunk_id,
            params=run.params,
            bytes_moved=run.bytes_moved,
            completed_paths=tuple(run.completed),
            started_at=run.started_at,
            finished_at=run.finished_at,
            files_remaining=run.chunk.file_count - len(run.completed),
        )

    def is_running(self, chunk_id=None) -> bool:
        if chunk_id is not None:
            run = self._runs.get(chunk_id)
            return run is not None and run.live
        return any(run.live for run in self._runs.values())

    def active_flows(self) -> int:
        """Foreground flows currently open (cc x p over running chunks)"""
        return sum(
            run.params.p * sum(1 for ch in run.channels if not ch.done)
            for run in self._runs.values() if run.live
        )

    # Time

    def advance(self, until, stop_when_idle=True) -> float:
        """
        Step the simulation to time `until`.

        With stop_when_idle the clock stops at the moment the last running
        chunk finishes; otherwise it always reaches `until`.

        Returns:
            Bytes moved across all chunks
        """
        moved = 0.0
        while self.now < until - 1e-12:
            if not self.is_running():
                if not stop_when_idle:
                    self.now = float(until)
                break
            moved += self._step(until)
        return moved

    def run_until_idle(self, time_limit=None):
        """Run until every chunk has finished"""
        limit = math.inf if time_limit is None else self.now + time_limit
        while self.is_running():
            if self.now >= limit:
                raise ScenarioError(f"transfer did not finish within {time_limit}s of simulated time")
            self._step(limit)

    def _step(self, limit) -> float:
        sc = self.scenario
        t0 = self.now
        t1 = min(t0 + sc.tick, limit)

        working = [
            (run, ch)
            for run in self._runs.values() if run.live
            for ch in run.channels if not ch.done
        ]
        opened = [(run, ch) for run, ch in working if ch.ready_at < t1]
        # channels still waiting on a file command this tick hold no share of the path
        sending = [
            (run, ch) for run, ch in opened
            if ch.delay < t1 - max(t0, ch.ready_at)
        ]

        # one draw per tick keeps the random stream independent of channel state
        z = self._rng.standard_normal()
        noise = math.exp(sc.noise_sigma * z - sc.noise_sigma ** 2 / 2) if sc.noise_sigma else 1.0

        flows = sum(run.params.p for run, _ in sending)
        flow_rate = per_flow_rate(sc.network, flows + sc.bg_flows_at(t0))
        # noise never lifts a flow above its window or fair share
        noisy_rate = min(flow_rate * noise, flow_rate)

        rates = {}
        for run, ch in sending:
            active_from = max(t0, ch.ready_at)
            ramp = slow_start_factor((active_from + t1) / 2 - ch.ramp_start, sc.slow_start_tau)
            rates[id(ch)] = run.params.p * noisy_rate * ramp * run.penalty / 8

        cap = sc.fs_capacity(len(sending))
        total_rate = sum(rates.values())
        if total_rate > cap:
            scale = cap / total_rate
            rates = {key: rate * scale for key, rate in rates.items()}

        moved = 0.0
        progressing = any(ch.delay > 0 for _, ch in opened) or any(rate > 0 for rate in rates.values())
        if opened and not progressing and len(opened) == len(working):
            raise ScenarioError("transfer cannot make progress: zero throughput capacity")
        for run, ch in opened:
            moved += self._drive(run, ch, max(t0, ch.ready_at), t1, rates.get(id(ch), 0.0))

        finished_now = []
        for run, _ in working:
            if run.finished_at is None:
                self._settle(run)
                if run.finished_at is not None:
                    finished_now.append(run.finished_at)

        t_end = t1
        if finished_now and not self.is_running():
            t_end = max(max(finished_now), t0)
        if t_end > t0:
            self.timeline.append(TimelinePoint(t_end, moved * 8 / (t_end - t0), flows))
        self.now = t_end
        return moved

    def _drive(self, run, ch, t, t1, rate) -> float:
        """Move one channel through [t, t1] at a fixed byte rate"""
        moved = 0.0
        while t < t1 and not ch.done:
            if ch.delay > 0:
                used = min(ch.delay, t1 - t)
                ch.delay -= used
                t += used
                continue
            if rate <= 0:
                break
            window = t1 - t
            if ch.remaining <= rate * window:
                t += ch.remaining / rate
                moved += ch.remaining
                run.bytes_moved += ch.remaining
                run.completed.append(ch.current.path)
                ch.remaining = 0.0
                self._pull(run, ch, t)
            else:
                ch.remaining -= rate * window
                moved += rate * window
                run.bytes_moved += rate * window
                t = t1
        return moved

    # Results

    def chunk_ids(self):
        return list(self._runs)

    def result(self, chunk_ids=None):
        """Aggregate SimResult over the given chunks (all by default)"""
        from .simulator import SimResult

        ids = list(self._runs) if chunk_ids is None else list(chunk_ids)
        runs = [self._runs[cid] for cid in ids]
        if not runs:
            raise ScenarioError("no chunks to report on")
        if any(run.finished_at is None for run in runs):
            raise ScenarioError("result requested before the chunks finished")

        started = min(run.started_at for run in runs)
        finished = max(run.finished_at for run in runs)
        total = sum(run.bytes_moved for run in runs)
        duration = finished - started
        if duration <= 0:
            raise ScenarioError("transfer finished in zero time")

        points = tuple(p for p in self.timeline if started < p.t <= finished + 1e-9)
        flows_used = max((p.flows for p in points), default=0)
        return SimResult(
            aggregate_throughput=total * 8 / duration,
            duration=duration,
            timeline=points,
            flows_used=flows_used,
            total_bytes=total,
        )
