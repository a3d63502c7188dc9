"""
History Store

Holds logged transfers in memory, mirrors them to a line-per-record file,
and keeps the per-feature min/max statistics the similarity filter
normalises against.
"""

import logging
import os
import threading
from typing import Iterable, List, Optional, Union

import numpy as np

from core.types import Chunk, HistoryEntry, NetworkProfile, ParamTriple

from .features import FeatureStats, entry_features, feature_matrix
from .records import decode_line, encode_line, record_to_entry
from .sessions import SESSION_WINDOW, assign_sessions

logger = logging.getLogger(__name__)


class HistoryStore:
    """
    Single-writer, multi-reader store of HistoryEntry records.

    Readers get immutable snapshots; writers take the lock for the whole
    mutation so statistics never lag the entries.
    """

    def __init__(self, entries: Iterable[HistoryEntry] = (), path: Optional[str] = None):
        """
        Args:
            entries: Initial entries
            path: File that append/prune keep in sync (None for memory only)
        """
        self.path = path
        self._lock = threading.RLock()
        self._entries: List[HistoryEntry] = list(entries)
        self._matrix = feature_matrix(self._entries)
        self._stats = FeatureStats.from_matrix(self._matrix)

    @classmethod
    def load(cls, path, session_window=SESSION_WINDOW) -> 'HistoryStore':
        """
        Read a history file. Blank lines are skipped; an empty file yields an
        empty store. Records without a session id are bucketed into sessions
        of `session_window` seconds.

        Raises:
            HistoryParseError: naming the line and field of the first bad record
        """
        entries = []
        with open(path, 'r', encoding='utf-8') as f:
            for line_no, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                entries.append(decode_line(line, line_no))
        entries = assign_sessions(entries, session_window)
        logger.info("Loaded %d history entries from %s", len(entries), path)
        return cls(entries, path=path)

    @classmethod
    def open(cls, path, session_window=SESSION_WINDOW) -> 'HistoryStore':
        """Load `path` if it exists, otherwise start an empty store bound to it"""
        if os.path.exists(path):
            return cls.load(path, session_window)
        return cls(path=path)

    def save(self, path=None):
        """Write every entry to `path` (default: the store's own file)"""
        target = path or self.path
        if target is None:
            raise ValueError("no path to save the history store to")
        _ensure_parent(target)
        tmp = f"{target}.tmp"
        with self._lock:
            with open(tmp, 'w', encoding='utf-8') as f:
                for entry in self._entries:
                    f.write(encode_line(entry) + '\n')
            os.replace(tmp, target)
        if self.path is None:
            self.path = target
        return target

    # Snapshots

    @property
    def entries(self):
        with self._lock:
            return tuple(self._entries)

    @property
    def feature_stats(self) -> Optional[FeatureStats]:
        with self._lock:
            return self._stats

    def snapshot(self):
        """Entries and their raw feature matrix, taken together"""
        with self._lock:
            return tuple(self._entries), self._matrix.copy()

    def session_ids(self):
        with self._lock:
            return {entry.session_id for entry in self._entries if entry.session_id}

    def __len__(self):
        with self._lock:
            return len(self._entries)

    def __iter__(self):
        return iter(self.entries)

    # Mutations

    def append(self, entries: Iterable[Union[HistoryEntry, dict]], persist=True) -> 'HistoryStore':
        """
        Add entries (HistoryEntry objects or record dicts). Duplicates are
        kept: repeated runs are legitimate data.
        """
        new = [e if isinstance(e, HistoryEntry) else record_to_entry(e) for e in entries]
        if not new:
            return self

        with self._lock:
            if persist and self.path is not None:
                _ensure_parent(self.path)
                with open(self.path, 'a', encoding='utf-8') as f:
                    for entry in new:
                        f.write(encode_line(entry) + '\n')

            rows = np.vstack([entry_features(entry) for entry in new])
            self._entries.extend(new)
            self._matrix = np.vstack([self._matrix, rows])
            if self._stats is None:
                self._stats = FeatureStats.from_matrix(rows)
            else:
                stats = self._stats
                for row in rows:
                    stats = stats.extended(row)
                self._stats = stats

        logger.debug("Appended %d history entries (total %d)", len(new), len(self))
        return self

    def prune_older_than(self, cutoff, persist=True) -> 'HistoryStore':
        """Keep only entries with collected_at >= cutoff"""
        with self._lock:
            kept = [entry for entry in self._entries if entry.collected_at >= cutoff]
            removed = len(self._entries) - len(kept)
            if removed:
                self._entries = kept
                self._matrix = feature_matrix(kept)
                self._stats = FeatureStats.from_matrix(self._matrix)
                if persist and self.path is not None:
                    self.save()
        if removed:
            logger.info("Pruned %d history entries older than %s", removed, cutoff)
        return self

    def record_transfer(
        self,
        chunk: Chunk,
        network: NetworkProfile,
        params: ParamTriple,
        throughput,
        collected_at,
        source='source',
        destination='destination',
        session_id='',
    ) -> HistoryEntry:
        """Log one executed transfer so later optimisations see current conditions"""
        entry = HistoryEntry(
            source=source,
            destination=destination,
            network=network,
            chunk_type=chunk.chunk_type,
            avg_file_size=chunk.avg_file_size,
            file_count=chunk.file_count,
            params=params,
            throughput=float(throughput),
            collected_at=int(collected_at),
            session_id=session_id,
        )
        self.append([entry])
        return entry

    def summary(self):
        with self._lock:
            entries = self._entries
            return {
                'entryCount': len(entries),
                'sessionCount': len({entry.session_id for entry in entries}),
                'oldest': min((e.collected_at for e in entries), default=None),
                'newest': max((e.collected_at for e in entries), default=None),
                'featureStats': self._stats.as_dict() if self._stats else None,
                'path': self.path,
            }


def _ensure_parent(path):
    parent = os.path.dirname(os.path.abspath(path))
    if not os.path.exists(parent):
        os.makedirs(parent)


def load(path, session_window=SESSION_WINDOW) -> HistoryStore:
    return HistoryStore.load(path, session_window)


def append(store: HistoryStore, entries) -> HistoryStore:
    return store.append(entries)


def prune_older_than(store: HistoryStore, cutoff) -> HistoryStore:
    return store.prune_older_than(cutoff)
