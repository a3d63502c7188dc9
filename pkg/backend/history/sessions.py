"""
Session bucketing for entries that arrive without a session id.
"""

import logging
import re
from collections import OrderedDict
from typing import Iterable, List, Sequence

from core.types import HistoryEntry

logger = logging.getLogger(__name__)


SESSION_WINDOW = 1800

_AUTO_ID = re.compile(r'^auto-(\d+)$')


def _bucket_key(entry: HistoryEntry):
    return (entry.source, entry.destination, entry.chunk_type,
            entry.avg_file_size, entry.file_count)


def _next_auto_number(session_ids: Iterable[str]) -> int:
    numbers = [int(m.group(1)) for m in map(_AUTO_ID.match, session_ids) if m]
    return max(numbers, default=-1) + 1


def assign_sessions(entries: Sequence[HistoryEntry], window=SESSION_WINDOW,
                    taken: Iterable[str] = ()) -> List[HistoryEntry]:
    """
    Give every entry lacking a session id one derived from its neighbours.

    Entries with the same endpoints, chunk type and dataset collected less
    than `window` seconds after the first entry of a bucket share a session. Entries that already carry a session id are left untouched.
    Output order matches input order.

    Args:
        entries: Entries to label
        window: Bucket width in seconds
        taken: Session ids already in use elsewhere (e.g. in the store the
            entries are appended to); generated ids never repeat them
    """
    pending = OrderedDict()
    for index, entry in enumerate(entries):
        if not entry.session_id:
            pending.setdefault(_bucket_key(entry), []).append(index)
    if not pending:
        return list(entries)

    counter = _next_auto_number([*taken, *(entry.session_id for entry in entries)])
    first = counter
    assigned = list(entries)
    for indices in pending.values():
        indices.sort(key=lambda i: entries[i].collected_at)
        bucket_start = None
        session_id = None
        for i in indices:
            collected_at = entries[i].collected_at
            if bucket_start is None or collected_at - bucket_start >= window:
                bucket_start = collected_at
                session_id = f"auto-{counter:04d}"
                counter += 1
            assigned[i] = entries[i].with_session(session_id)

    logger.info("Assigned %d sessions to %d unlabelled entries",
                counter - first, sum(len(v) for v in pending.values()))
    return assigned
