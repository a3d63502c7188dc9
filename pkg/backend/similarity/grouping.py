"""
Session Grouping

Splits filtered entries into sets collected together under identical
conditions; each set becomes one regression problem.
"""

import logging
from collections import OrderedDict
from dataclasses import dataclass
from typing import List, Tuple

from core.types import ChunkType, HistoryEntry, NetworkProfile

logger = logging.getLogger(__name__)


MIN_GROUP = 27


@dataclass(frozen=True)
class EntryGroup:
    session_id: str
    network: NetworkProfile
    chunk_type: ChunkType
    avg_file_size: float
    file_count: int
    members: Tuple[HistoryEntry, ...]

    @property
    def group_id(self) -> str:
        return f"{self.session_id}/{self.chunk_type.value}"

    def __len__(self):
        return len(self.members)


def group_by_session(entries, min_group=MIN_GROUP) -> List[EntryGroup]:
    """
    Partition entries by session and shared features, dropping groups with
    fewer than `min_group` members. Groups keep first-appearance order.
    """
    buckets = OrderedDict()
    for entry in entries:
        key = (entry.session_id, entry.network, entry.chunk_type,
               entry.avg_file_size, entry.file_count)
        buckets.setdefault(key, []).append(entry)

    groups = []
    dropped = 0
    for (session_id, network, chunk_type, avg_size, count), members in buckets.items():
        if len(members) < min_group:
            dropped += len(members)
            continue
        groups.append(EntryGroup(session_id, network, chunk_type, avg_size, count, tuple(members)))

    if dropped:
        logger.debug("Dropped %d entries in groups smaller than %d", dropped, min_group)
    return groups
