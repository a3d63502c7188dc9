"""
File Partitioning

Sorts files into Tiny/Small/Medium/Large chunks relative to the path's
bandwidth-delay product.
"""

from collections import OrderedDict
from dataclasses import dataclass
from typing import Iterable, List

from .errors import InvalidParameterError
from .types import Chunk, ChunkType, FileInfo, NetworkProfile


@dataclass(frozen=True)
class ChunkThresholds:
    """Upper size bounds of the three lower classes, as multiples of BDP"""

    tiny: float = 0.05
    small: float = 0.5
    medium: float = 5.0

    def __post_init__(self):
        if not 0 < self.tiny < self.small < self.medium:
            raise InvalidParameterError(
                f"thresholds must satisfy 0 < tiny < small < medium, got "
                f"{self.tiny}/{self.small}/{self.medium}"
            )


DEFAULT_THRESHOLDS = ChunkThresholds()


def classify_file(size, network: NetworkProfile, thresholds: ChunkThresholds = DEFAULT_THRESHOLDS):
    """
    Map a file size onto its chunk type.

    Ties go to the smaller class, so a file of exactly 0.05 x BDP is Tiny.

    Args:
        size: File size in bytes (must be positive)
        network: Path profile providing the BDP
        thresholds: Class boundaries as BDP multiples

    Returns:
        ChunkType
    """
    if not size > 0:
        raise InvalidParameterError(f"file size must be positive, got {size}")

    bdp = network.bdp
    if size <= thresholds.tiny * bdp:
        return ChunkType.TINY
    if size <= thresholds.small * bdp:
        return ChunkType.SMALL
    if size <= thresholds.medium * bdp:
        return ChunkType.MEDIUM
    return ChunkType.LARGE


def partition_files(
    files: Iterable[FileInfo],
    network: NetworkProfile,
    thresholds: ChunkThresholds = DEFAULT_THRESHOLDS
) -> List[Chunk]:
    """
    Group files into chunks, Tiny first. Empty classes are omitted.
    """
    buckets = OrderedDict((chunk_type, []) for chunk_type in ChunkType.ordered())
    for info in files:
        buckets[classify_file(info.size, network, thresholds)].append(info)

    return [
        Chunk(chunk_type, tuple(members))
        for chunk_type, members in buckets.items()
        if members
    ]
