"""
Raw similarity features of history entries and their min/max statistics.
"""

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from core.types import HistoryEntry


FEATURE_NAMES = (
    'bandwidth',
    'rtt',
    'bdp_over_buffer',
    'chunk_type_code',
    'avg_file_size',
    'file_count',
)


def raw_features(network, chunk_type, avg_file_size, file_count) -> np.ndarray:
    return np.array([
        network.bandwidth,
        network.rtt,
        network.bdp / network.buffer_size,
        chunk_type.code,
        avg_file_size,
        file_count,
    ], dtype=float)


def entry_features(entry: HistoryEntry) -> np.ndarray:
    return raw_features(entry.network, entry.chunk_type, entry.avg_file_size, entry.file_count)


def feature_matrix(entries) -> np.ndarray:
    """(n, 6) matrix of raw features, one row per entry"""
    if not entries:
        return np.empty((0, len(FEATURE_NAMES)))
    return np.vstack([entry_features(entry) for entry in entries])


@dataclass(frozen=True)
class FeatureStats:
    """Per-feature minimum and maximum"""

    mins: Tuple[float, ...]
    maxs: Tuple[float, ...]

    @classmethod
    def from_matrix(cls, matrix) -> Optional['FeatureStats']:
        if len(matrix) == 0:
            return None
        return cls(tuple(matrix.min(axis=0).tolist()), tuple(matrix.max(axis=0).tolist()))

    def extended(self, row) -> 'FeatureStats':
        """Bounds widened to include one more point (e.g. a query)"""
        row = np.asarray(row, dtype=float)
        return FeatureStats(
            tuple(np.minimum(self.mins, row).tolist()),
            tuple(np.maximum(self.maxs, row).tolist()),
        )

    def as_dict(self):
        return {
            name: {'min': lo, 'max': hi}
            for name, lo, hi in zip(FEATURE_NAMES, self.mins, self.maxs)
        }
