"""
Domain Types

Immutable value types shared by every tuning module: protocol parameter
triples, network profiles, files, chunks, history entries and per-chunk
decisions. All of them validate on construction and are safe to share
between threads.
"""

import dataclasses
import math
import operator
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Tuple

from .errors import HistoryValidationError, InvalidParameterError


PARAM_CEILING = 32


def _as_int(name, value):
    """Coerce integral values (including numpy integers) or fail loudly"""
    if isinstance(value, bool):
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}")
    try:
        return operator.index(value)
    except TypeError:
        raise InvalidParameterError(f"{name} must be an integer, got {value!r}") from None


@dataclass(frozen=True)
class ParameterBounds:
    """Upper bounds of the parameter search box (lower bounds are always 1)"""

    cc_max: int = PARAM_CEILING
    p_max: int = PARAM_CEILING
    pp_max: int = PARAM_CEILING

    def __post_init__(self):
        for name in ('cc_max', 'p_max', 'pp_max'):
            value = _as_int(name, getattr(self, name))
            if not 1 <= value <= PARAM_CEILING:
                raise InvalidParameterError(
                    f"{name} must be within [1, {PARAM_CEILING}], got {value}"
                )
            object.__setattr__(self, name, value)

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.cc_max, self.p_max, self.pp_max)

    def box(self):
        """Bounds in the (low, high) list form scipy optimizers expect"""
        return [(1.0, float(limit)) for limit in self.as_tuple()]

    def contains(self, params: 'ParamTriple') -> bool:
        return (params.cc <= self.cc_max and params.p <= self.p_max
                and params.pp <= self.pp_max)

    def clamp(self, cc, p, pp) -> 'ParamTriple':
        """Build a triple, clamping each value into [1, max]"""
        return ParamTriple(
            min(max(int(cc), 1), self.cc_max),
            min(max(int(p), 1), self.p_max),
            min(max(int(pp), 1), self.pp_max),
        )


DEFAULT_BOUNDS = ParameterBounds()


@dataclass(frozen=True, order=True)
class ParamTriple:
    """Concurrency, parallelism and pipelining of one transfer"""

    cc: int
    p: int
    pp: int

    def __post_init__(self):
        for name, limit in zip(('cc', 'p', 'pp'), DEFAULT_BOUNDS.as_tuple()):
            value = _as_int(name, getattr(self, name))
            if not 1 <= value <= limit:
                raise InvalidParameterError(f"{name} must be within [1, {limit}], got {value}")
            object.__setattr__(self, name, value)

    @property
    def flows(self) -> int:
        """Number of network flows the triple opens"""
        return self.cc * self.p

    def as_tuple(self) -> Tuple[int, int, int]:
        return (self.cc, self.p, self.pp)

    def replace(self, **changes) -> 'ParamTriple':
        return dataclasses.replace(self, **changes)

    def __str__(self):
        return f"({self.cc},{self.p},{self.pp})"


@dataclass(frozen=True)
class NetworkProfile:
    """Path characteristics of a source/destination pair"""

    bandwidth: float
    rtt: float
    buffer_size: float

    def __post_init__(self):
        if not (self.bandwidth > 0 and math.isfinite(self.bandwidth)):
            raise InvalidParameterError(f"bandwidth must be positive, got {self.bandwidth}")
        if not (self.buffer_size > 0 and math.isfinite(self.buffer_size)):
            raise InvalidParameterError(f"buffer_size must be positive, got {self.buffer_size}")
        # rtt = 0 models an idealised local link
        if not (self.rtt >= 0 and math.isfinite(self.rtt)):
            raise InvalidParameterError(f"rtt must be non-negative, got {self.rtt}")

    @property
    def bdp(self) -> float:
        """Bandwidth-delay product in bytes"""
        return self.bandwidth / 8 * self.rtt

    @property
    def window_limit(self) -> float:
        """Per-flow rate ceiling imposed by the TCP buffer, bits/second"""
        if self.rtt == 0:
            return math.inf
        return self.buffer_size * 8 / self.rtt


@dataclass(frozen=True)
class FileInfo:
    """A file to move: identifier and size only"""

    path: str
    size: int

    def __post_init__(self):
        if not self.size > 0:
            raise InvalidParameterError(f"file {self.path!r} must have positive size")


class ChunkType(Enum):
    """File size classes, ordered from smallest to largest"""

    TINY = 'Tiny'
    SMALL = 'Small'
    MEDIUM = 'Medium'
    LARGE = 'Large'

    @property
    def code(self) -> int:
        return _CHUNK_CODES[self]

    @classmethod
    def from_label(cls, label: str) -> 'ChunkType':
        for member in cls:
            if member.value.lower() == str(label).strip().lower():
                return member
        raise InvalidParameterError(f"unknown chunk type {label!r}")

    @classmethod
    def ordered(cls):
        return [cls.TINY, cls.SMALL, cls.MEDIUM, cls.LARGE]


_CHUNK_CODES = {ChunkType.TINY: 1, ChunkType.SMALL: 2, ChunkType.MEDIUM: 3, ChunkType.LARGE: 4}


@dataclass(frozen=True)
class Chunk:
    """A group of files of one size class moved under one parameter triple"""

    chunk_type: ChunkType
    files: Tuple[FileInfo, ...]

    def __post_init__(self):
        object.__setattr__(self, 'files', tuple(self.files))
        if not self.files:
            raise InvalidParameterError("a chunk needs at least one file")

    @property
    def total_size(self) -> int:
        return sum(f.size for f in self.files)

    @property
    def file_count(self) -> int:
        return len(self.files)

    @property
    def avg_file_size(self) -> float:
        return self.total_size / len(self.files)

    def without(self, done_paths) -> Optional['Chunk']:
        """The chunk minus already transferred files, or None if nothing is left"""
        remaining = tuple(f for f in self.files if f.path not in done_paths)
        if not remaining:
            return None
        return Chunk(self.chunk_type, remaining)


@dataclass(frozen=True)
class HistoryEntry:
    """One logged transfer: conditions, parameters and achieved throughput"""

    source: str
    destination: str
    network: NetworkProfile
    chunk_type: ChunkType
    avg_file_size: float
    file_count: int
    params: ParamTriple
    throughput: float
    collected_at: int
    session_id: str = ''

    def __post_init__(self):
        if not self.throughput > 0:
            raise HistoryValidationError(f"throughput must be positive, got {self.throughput}")
        if not isinstance(self.file_count, int) or self.file_count < 1:
            raise HistoryValidationError(f"file_count must be >= 1, got {self.file_count}")
        if not self.avg_file_size > 0:
            raise HistoryValidationError(f"avg_file_size must be positive, got {self.avg_file_size}")

    def with_session(self, session_id: str) -> 'HistoryEntry':
        return dataclasses.replace(self, session_id=session_id)


@dataclass(frozen=True)
class ChunkDecision:
    """Optimizer output for one chunk"""

    params: ParamTriple
    unit_throughput: float
    estimated_throughput: float
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.unit_throughput > 0:
            raise InvalidParameterError(
                f"unit throughput must be positive, got {self.unit_throughput}"
            )
