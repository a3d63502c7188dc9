"""
Transfer Scheduler

Runs a dataset end to end: partition into chunks, probe every chunk with
heuristic parameters, ask the optimizer for each chunk's triple, split the
largest estimated concurrency among the chunks by weight, and move the
remaining files of all chunks at once. When a chunk finishes early its
channels are handed to the chunks still running.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

from core.errors import ExecutorError, OptimizerError, PlanError, TuningError
from core.partition import DEFAULT_THRESHOLDS, partition_files
from core.types import DEFAULT_BOUNDS, Chunk, ChunkDecision, FileInfo, NetworkProfile, ParamTriple

from .heuristics import CC_DEFAULT, heuristic_params
from .sampling import SampleResult, SamplingConfig, adaptive_sample, sample_portion

logger = logging.getLogger(__name__)


OPTIMIZER_LATENCY = 3.0


@dataclass(frozen=True)
class ChunkAllocation:
    """One chunk's share of the plan"""

    chunk: Chunk
    params: ParamTriple
    estimated_cc: int
    unit_throughput: float
    weight: float

    def to_dict(self):
        return {
            'chunkType': self.chunk.chunk_type.value,
            'fileCount': self.chunk.file_count,
            'totalBytes': self.chunk.total_size,
            'params': list(self.params.as_tuple()),
            'estimatedCc': self.estimated_cc,
            'unitThroughput': self.unit_throughput,
            'weight': self.weight,
        }


@dataclass(frozen=True)
class TransferPlan:
    allocations: Tuple[ChunkAllocation, ...]
    max_cc: int
    total_throughput: float

    @property
    def total_channels(self):
        return sum(a.params.cc for a in self.allocations)

    def to_dict(self):
        return {
            'maxCc': self.max_cc,
            'totalThroughput': self.total_throughput,
            'chunks': [a.to_dict() for a in self.allocations],
        }


def build_plan(chunks: Sequence[Chunk], results) -> TransferPlan:
    """
    Distribute concurrency among chunks.

    TT is the sum of the chunks' unit throughputs and maxCC the largest
    estimated concurrency. Each chunk weighs size x TT / UT, so slow chunks
    get more channels, and receives floor(maxCC x weight / total weight)
    channels, at least one. Parallelism and pipelining are kept as the
    optimizer returned them.

    Args:
        chunks: Chunks to move
        results: One optimizer result (or ChunkDecision) per chunk, exposing
            `params` and `unit_throughput`

    Returns:
        TransferPlan

    Raises:
        PlanError: No chunks, mismatched inputs, or a unit throughput <= 0
    """
    chunks = list(chunks)
    results = list(results)
    if not chunks:
        raise PlanError("cannot plan an empty transfer")
    if len(chunks) != len(results):
        raise PlanError(f"{len(chunks)} chunks but {len(results)} optimizer results")
    for chunk, result in zip(chunks, results):
        if not result.unit_throughput > 0:
            raise PlanError(
                f"unit throughput of the {chunk.chunk_type.value} chunk must be positive, "
                f"got {result.unit_throughput}"
            )

    total = sum(r.unit_throughput for r in results)
    max_cc = max(r.params.cc for r in results)
    weights = [chunk.total_size * total / r.unit_throughput for chunk, r in zip(chunks, results)]
    weight_sum = sum(weights)

    allocations = []
    for chunk, result, weight in zip(chunks, results, weights):
        # tolerance keeps exact shares such as 7 x 4/7 from flooring down
        cc = max(1, int(math.floor(max_cc * weight / weight_sum + 1e-9)))
        allocations.append(ChunkAllocation(
            chunk=chunk,
            params=result.params.replace(cc=cc),
            estimated_cc=result.params.cc,
            unit_throughput=result.unit_throughput,
            weight=weight,
        ))

    plan = TransferPlan(tuple(allocations), max_cc, total)
    logger.info("Plan: maxCC=%d over %d chunk(s): %s", max_cc, len(allocations),
                ', '.join(f"{a.chunk.chunk_type.value}{a.params}" for a in allocations))
    return plan


@dataclass(frozen=True)
class ExecutionReport:
    per_chunk: Dict[str, object]
    aggregate: object
    final_params: Dict[str, ParamTriple] = field(default_factory=dict)

    def to_dict(self):
        return {
            'aggregate': self.aggregate.to_dict(),
            'chunks': {label: result.to_dict() for label, result in self.per_chunk.items()},
            'finalParams': {label: list(params.as_tuple()) for label, params in self.final_params.items()},
        }


def execute_plan(plan: TransferPlan, executor, rebalance_interval=None, conn_setup=0.0) -> ExecutionReport:
    """
    Launch every chunk of the plan at once and wait for all of them.

    With a rebalance_interval the running chunks are polled at that period;
    whenever one finishes, the survivors' shares of maxCC are recomputed over
    the chunks still running and each survivor grows towards its share,
    never past its own estimated concurrency. Each new channel costs
    conn_setup seconds.

    Raises:
        PlanError: The plan has no chunks
        ExecutorError: A chunk could not be started or completed, with its id
    """
    if not plan.allocations:
        raise PlanError("cannot execute an empty plan")

    handles = {}
    for allocation in plan.allocations:
        label = allocation.chunk.chunk_type.value
        try:
            handles[label] = executor.start(allocation.chunk, allocation.params)
        except ExecutorError:
            raise
        except TuningError as exc:
            logger.warning("Executor refused the %s chunk: %s", label, exc)
            raise ExecutorError(label, str(exc)) from exc

    try:
        final_params = {a.chunk.chunk_type.value: a.params for a in plan.allocations}
        if rebalance_interval and len(handles) > 1:
            _hand_off_channels(plan, executor, handles, final_params, rebalance_interval, conn_setup)
        aggregate = executor.finish(list(handles.values()))
        per_chunk = {label: executor.finish([handle]) for label, handle in handles.items()}
    except ExecutorError:
        raise
    except TuningError as exc:
        logger.warning("Plan execution failed: %s", exc)
        raise ExecutorError(','.join(handles), str(exc)) from exc

    logger.info("Executed %d chunk(s): %.0f bps in %.1fs",
                len(handles), aggregate.aggregate_throughput, aggregate.duration)
    return ExecutionReport(per_chunk, aggregate, final_params)


def _hand_off_channels(plan, executor, handles, current, interval, conn_setup):
    """Poll until one chunk is left, regrowing survivors after each completion"""
    allocations = {a.chunk.chunk_type.value: a for a in plan.allocations}
    live = list(handles)
    while len(live) > 1:
        readings = executor.poll_many([handles[label] for label in live], interval)
        finished = [label for label in live if readings[handles[label]].finished]
        if not finished:
            continue
        live = [label for label in live if label not in finished]
        if not live:
            break

        weight_sum = sum(allocations[label].weight for label in live)
        for label in live:
            allocation = allocations[label]
            share = int(math.floor(plan.max_cc * allocation.weight / weight_sum + 1e-9))
            cc = min(allocation.estimated_cc, max(current[label].cc, share))
            if cc <= current[label].cc:
                continue
            params = current[label].replace(cc=cc)
            executor.retune(handles[label], params, conn_setup)
            logger.info("%s finished; %s chunk grows %s -> %s",
                        ','.join(finished), label, current[label], params)
            current[label] = params


@dataclass(frozen=True)
class TransferReport:
    """Everything one scheduled transfer did"""

    plan: Optional[TransferPlan]
    samples: Dict[str, SampleResult]
    decisions: Dict[str, ChunkDecision]
    execution: Optional[ExecutionReport]
    aggregate_throughput: float
    duration: float
    overhead: float
    total_bytes: int
    fallbacks: Tuple[str, ...] = field(default=())

    def to_dict(self):
        return {
            'aggregateThroughput': self.aggregate_throughput,
            'duration': self.duration,
            'overhead': self.overhead,
            'totalBytes': self.total_bytes,
            'plan': self.plan.to_dict() if self.plan else None,
            'samples': {
                label: {
                    'throughput': s.throughput,
                    'elapsed': s.elapsed,
                    'converged': s.converged,
                    'exhausted': s.exhausted,
                }
                for label, s in self.samples.items()
            },
            'decisions': {
                label: {
                    'params': list(d.params.as_tuple()),
                    'unitThroughput': d.unit_throughput,
                    'estimatedThroughput': d.estimated_throughput,
                }
                for label, d in self.decisions.items()
            },
            'fallbacks': list(self.fallbacks),
            'execution': self.execution.to_dict() if self.execution else None,
        }


class HarpScheduler:
    """
    Probe, optimise and transfer.

    Usage:
        scheduler = HarpScheduler(optimizer, network)
        report = scheduler.transfer(files, SimulatedExecutor(scenario))
    """

    def __init__(
        self,
        optimizer,
        network: NetworkProfile,
        config: SamplingConfig = SamplingConfig(),
        bounds=DEFAULT_BOUNDS,
        optimizer_latency=OPTIMIZER_LATENCY,
        thresholds=DEFAULT_THRESHOLDS,
        cc_default=CC_DEFAULT,
        store=None,
        clock=time.time,
        conn_setup=2.0,
        rebalance=True,
    ):
        """
        Args:
            optimizer: Anything with optimize(chunk, network, params, throughput)
            network: Path profile used for partitioning and heuristics
            config: Adaptive sampling settings
            optimizer_latency: Seconds one optimizer call takes
            store: Optional HistoryStore that receives the executed transfers
            clock: Epoch source for logged entries
            conn_setup: Seconds to open a channel handed over from a finished chunk
            rebalance: Hand channels of finished chunks to the ones still running
        """
        self.optimizer = optimizer
        self.network = network
        self.config = config
        self.bounds = bounds
        self.optimizer_latency = float(optimizer_latency)
        self.thresholds = thresholds
        self.cc_default = cc_default
        self.store = store
        self.clock = clock
        self.conn_setup = float(conn_setup)
        self.rebalance = rebalance

    @classmethod
    def from_settings(cls, optimizer, network, settings, store=None):
        return cls(
            optimizer,
            network,
            config=SamplingConfig.from_settings(settings),
            bounds=settings.bounds,
            optimizer_latency=settings.optimizer_latency,
            thresholds=settings.thresholds,
            cc_default=settings.cc_default,
            store=store,
            conn_setup=settings.conn_setup,
        )

    def chunks_for(self, files_or_chunks) -> Sequence[Chunk]:
        items = list(files_or_chunks)
        if not items:
            raise PlanError("nothing to transfer")
        if all(isinstance(item, Chunk) for item in items):
            return items
        if all(isinstance(item, FileInfo) for item in items):
            return partition_files(items, self.network, self.thresholds)
        raise PlanError("expected a list of files or a list of chunks")

    def decide(self, chunk, probe_params, sample: SampleResult):
        """
        Optimizer decision for one probed chunk. Without usable models the
        probe parameters are kept and UT is derived from the probe.
        """
        try:
            result = self.optimizer.optimize(chunk, self.network, probe_params, sample.throughput)
        except OptimizerError as exc:
            logger.warning("Keeping probe parameters for the %s chunk: %s",
                           chunk.chunk_type.value, exc)
            return ChunkDecision(
                params=probe_params,
                unit_throughput=sample.throughput / probe_params.cc,
                estimated_throughput=sample.throughput,
                diagnostics={'fallback': str(exc)},
            ), True
        unit = result.unit_throughput
        if not unit > 0:
            # the models extrapolate below zero at cc=1; scale the estimate instead
            logger.warning("Non-positive unit throughput for the %s chunk, using estimate / cc",
                           chunk.chunk_type.value)
            unit = result.estimated_throughput / result.params.cc
            if not unit > 0:
                unit = sample.throughput / probe_params.cc
        return ChunkDecision(
            params=result.params,
            unit_throughput=unit,
            estimated_throughput=result.estimated_throughput,
            diagnostics={'models': len(result.per_model)},
        ), False

    def transfer(self, files_or_chunks, executor) -> TransferReport:
        """
        Move a dataset through the executor.

        Sampling runs chunk after chunk; each chunk's optimisation overlaps
        the next chunk's sample, so only the last optimizer call adds
        waiting time before the plan starts.
        """
        chunks = self.chunks_for(files_or_chunks)
        started = executor.now()
        dataset_bytes = sum(chunk.total_size for chunk in chunks)

        samples, decisions, fallbacks = {}, {}, []
        remaining, remaining_decisions = [], []
        for chunk in chunks:
            label = chunk.chunk_type.value
            probe = heuristic_params(chunk, self.network, self.bounds, self.cc_default)
            portion = sample_portion(chunk, self.config.sample_share)
            sample = adaptive_sample(portion, probe, executor, self.config)
            samples[label] = sample

            decision, fell_back = self.decide(chunk, probe, sample)
            decisions[label] = decision
            if fell_back:
                fallbacks.append(label)

            rest = chunk.without(set(sample.completed_paths))
            if rest is not None:
                remaining.append(rest)
                remaining_decisions.append(decision)

        executor.wait(self.optimizer_latency)
        overhead = sum(s.elapsed for s in samples.values()) + self.optimizer_latency

        plan, execution = None, None
        if remaining:
            plan = build_plan(remaining, remaining_decisions)
            interval = self.config.monitor_interval if self.rebalance else None
            execution = execute_plan(plan, executor, interval, self.conn_setup)
            self._log_transfers(plan, execution)
        else:
            logger.info("Sampling moved the whole dataset; nothing left to plan")

        duration = executor.now() - started
        aggregate = dataset_bytes * 8 / duration if duration > 0 else 0.0
        logger.info("Transfer of %d bytes: %.0f bps over %.1fs (overhead %.1fs)",
                    dataset_bytes, aggregate, duration, overhead)
        return TransferReport(
            plan=plan,
            samples=samples,
            decisions=decisions,
            execution=execution,
            aggregate_throughput=aggregate,
            duration=duration,
            overhead=overhead,
            total_bytes=dataset_bytes,
            fallbacks=tuple(fallbacks),
        )

    def _log_transfers(self, plan, execution):
        if self.store is None:
            return
        collected_at = int(self.clock())
        for allocation in plan.allocations:
            result = execution.per_chunk[allocation.chunk.chunk_type.value]
            self.store.record_transfer(
                allocation.chunk,
                self.network,
                allocation.params,
                result.aggregate_throughput,
                collected_at,
            )
