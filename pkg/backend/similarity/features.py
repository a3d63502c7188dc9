"""
Weighted Feature Vectors

Six transfer features, min-max normalised against the store statistics
(widened by the query point) and scaled by fixed importance weights.
"""

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from history.features import FEATURE_NAMES, FeatureStats, raw_features

# bandwidth, rtt, bdp/buffer, chunk type, avg file size, file count
FEATURE_WEIGHTS = (2.0, 2.0, 10.0, 10.0, 3.0, 1.0)


@dataclass(frozen=True)
class FeatureVector:
    """Normalised, weighted features in FEATURE_NAMES order"""

    values: Tuple[float, ...]

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if len(values) != len(FEATURE_NAMES):
            raise ValueError(f"a feature vector has {len(FEATURE_NAMES)} components, got {len(values)}")
        object.__setattr__(self, 'values', values)

    def as_array(self) -> np.ndarray:
        return np.array(self.values)


def query_features(network, chunk) -> np.ndarray:
    """Raw feature row describing the chunk about to be transferred"""
    return raw_features(network, chunk.chunk_type, chunk.avg_file_size, chunk.file_count)


def normalize(matrix, stats: FeatureStats, weights=FEATURE_WEIGHTS) -> np.ndarray:
    """
    Min-max normalise each column to [0, 1] and apply weights. A column with
    no spread maps to 0.
    """
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    lo = np.asarray(stats.mins)
    span = np.asarray(stats.maxs) - lo
    safe = np.where(span > 0, span, 1.0)
    scaled = np.where(span > 0, (matrix - lo) / safe, 0.0)
    return np.clip(scaled, 0.0, 1.0) * np.asarray(weights)


def build_vector(row, stats: FeatureStats, weights=FEATURE_WEIGHTS) -> FeatureVector:
    return FeatureVector(tuple(normalize(row, stats, weights)[0]))
