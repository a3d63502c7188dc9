"""
Sample Transfers

Adaptive sampling moves the real data and stops as soon as two consecutive
monitor intervals agree within a percentage, so the probe costs only as
long as the path takes to settle. Probes only see a leading portion of
the chunk so the tuned transfer always has data left. Fixed-size
sampling is the simpler method it replaces and is kept for comparison.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

from core.errors import InvalidParameterError, SamplingError
from core.types import Chunk, ParamTriple

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplingConfig:
    convergence_pct: float = 0.05
    monitor_interval: float = 3.0
    max_sample_time: float = 30.0
    sample_share: float = 0.2

    def __post_init__(self):
        if not 0 < self.convergence_pct < 1:
            raise InvalidParameterError(
                f"convergence_pct must be in (0, 1), got {self.convergence_pct}"
            )
        if not self.monitor_interval > 0:
            raise InvalidParameterError("monitor_interval must be positive")
        if self.max_sample_time < self.monitor_interval:
            raise InvalidParameterError("max_sample_time must cover at least one interval")
        if not 0 < self.sample_share <= 1:
            raise InvalidParameterError(f"sample_share must be in (0, 1], got {self.sample_share}")

    @classmethod
    def from_settings(cls, settings):
        return cls(settings.convergence_pct, settings.monitor_interval, settings.max_sample_time,
                   settings.sample_share)


@dataclass(frozen=True)
class SampleResult:
    """
    Probe outcome. `converged` is False when the probe hit the time cap or
    ran out of data; `exhausted` marks the latter.
    """

    throughput: float
    elapsed: float
    bytes_used: float
    converged: bool
    exhausted: bool
    completed_paths: Tuple[str, ...] = ()
    intervals: Tuple[float, ...] = ()


def sample_portion(chunk: Chunk, share) -> Chunk:
    """
    Leading files of a chunk to probe with.

    Takes files while their total stays within `share` of the chunk's bytes,
    always at least one file, and leaves at least one file untouched when
    the chunk has more than one.
    """
    if not 0 < share <= 1:
        raise InvalidParameterError(f"sample share must be in (0, 1], got {share}")
    budget = share * chunk.total_size
    limit = max(1, chunk.file_count - 1)
    files, total = [], 0
    for info in chunk.files[:limit]:
        if files and total + info.size > budget:
            break
        files.append(info)
        total += info.size
    return Chunk(chunk.chunk_type, tuple(files))


def adaptive_sample(chunk: Chunk, params: ParamTriple, executor, config=SamplingConfig()) -> SampleResult:
    """
    Transfer part of a chunk until its throughput settles.

    After every interval the throughput is compared with the previous
    interval's; once they are within convergence_pct the probe stops and
    reports their mean. The probe also stops at max_sample_time or when
    the chunk runs out, reporting without the converged flag.

    Returns:
        SampleResult; files completed during the probe are listed so the
        caller can skip them, files cut off mid-way are sent again later
    """
    handle = executor.start(chunk, params)
    readings = []
    elapsed = 0.0
    converged = False
    exhausted = False
    throughput = 0.0

    while True:
        reading = executor.poll_interval_throughput(handle, config.monitor_interval)
        elapsed += reading.elapsed

        if reading.finished:
            exhausted = True
            progress = executor.progress(handle)
            if elapsed <= 0:
                raise SamplingError(f"sample of the {chunk.chunk_type.value} chunk moved no data")
            throughput = progress.bytes_moved * 8 / elapsed
            readings.append(reading.throughput)
            break

        readings.append(reading.throughput)
        if len(readings) >= 2:
            previous, current = readings[-2], readings[-1]
            if previous > 0 and abs(current - previous) <= config.convergence_pct * previous:
                converged = True
                throughput = (current + previous) / 2
                break

        if elapsed >= config.max_sample_time - 1e-9:
            throughput = sum(readings[-2:]) / len(readings[-2:])
            break

    if exhausted:
        progress = executor.progress(handle)
    else:
        progress = executor.stop(handle)

    if throughput <= 0:
        raise SamplingError(f"sample of the {chunk.chunk_type.value} chunk measured no throughput")

    logger.info("Sampled %s chunk with %s: %.0f bps in %.1fs (%s)",
                chunk.chunk_type.value, params, throughput, elapsed,
                'converged' if converged else ('exhausted' if exhausted else 'time cap'))
    return SampleResult(
        throughput=throughput,
        elapsed=elapsed,
        bytes_used=progress.bytes_moved,
        converged=converged,
        exhausted=exhausted,
        completed_paths=progress.completed_paths,
        intervals=tuple(readings),
    )


def fixed_size_sample(chunk: Chunk, params: ParamTriple, executor, size_bytes, config=SamplingConfig()) -> SampleResult:
    """
    Transfer a fixed amount of data (whole files, at least size_bytes) and
    report its average throughput.
    """
    if not size_bytes > 0:
        raise InvalidParameterError("sample size must be positive")

    files, total = [], 0
    for info in chunk.files:
        files.append(info)
        total += info.size
        if total >= size_bytes:
            break
    sample = Chunk(chunk.chunk_type, tuple(files))

    handle = executor.start(sample, params)
    elapsed = 0.0
    readings = []
    while True:
        reading = executor.poll_interval_throughput(handle, config.monitor_interval)
        elapsed += reading.elapsed
        readings.append(reading.throughput)
        if reading.finished:
            break

    progress = executor.progress(handle)
    throughput = progress.bytes_moved * 8 / elapsed
    logger.info("Fixed-size sample of %d bytes: %.0f bps in %.1fs", total, throughput, elapsed)
    return SampleResult(
        throughput=throughput,
        elapsed=elapsed,
        bytes_used=progress.bytes_moved,
        converged=True,
        exhausted=len(files) == chunk.file_count,
        completed_paths=progress.completed_paths,
        intervals=tuple(readings),
    )
