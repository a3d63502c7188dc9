"""
Similarity Filter

Selects history entries recorded under conditions close to the current
transfer, relaxing the similarity threshold until enough survive.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from core.types import HistoryEntry

from .cosine import similarity_scores
from .features import FEATURE_WEIGHTS, normalize

logger = logging.getLogger(__name__)


START_THRESHOLD = 0.99
THRESHOLD_STEP = 0.01
THRESHOLD_FLOOR = 0.5


@dataclass(frozen=True)
class FilterResult:
    """Surviving entries, their similarity values and the threshold used"""

    entries: Tuple[HistoryEntry, ...]
    similarities: Tuple[float, ...]
    threshold: float
    warning: bool = False
    message: str = ''

    def __len__(self):
        return len(self.entries)


def _levels(start, step, floor):
    """Thresholds in whole steps so that repeated subtraction cannot drift"""
    n = int(round((start - floor) / step))
    return [round(start - i * step, 10) for i in range(n + 1)]


def filter_similar(
    store,
    query,
    min_entries,
    weights=FEATURE_WEIGHTS,
    start=START_THRESHOLD,
    step=THRESHOLD_STEP,
    floor=THRESHOLD_FLOOR,
) -> FilterResult:
    """
    Filter a history store by weighted cosine similarity to a query.

    Args:
        store: HistoryStore to search
        query: Raw feature row of the current transfer (see query_features)
        min_entries: Survivors wanted before the threshold stops dropping

    Returns:
        FilterResult. `warning` is set when the store is smaller than
        min_entries (everything is returned) or the floor was reached
        without enough survivors.
    """
    if min_entries < 1:
        raise ValueError("min_entries must be at least 1")

    entries, matrix = store.snapshot()
    if not entries:
        return FilterResult((), (), start, True, "history store is empty")

    stats = store.feature_stats.extended(query)
    vectors = normalize(matrix, stats, weights)
    q = normalize(query, stats, weights)[0]
    scores = similarity_scores(vectors, q)

    if len(entries) < min_entries:
        message = f"store holds {len(entries)} entries, fewer than the {min_entries} wanted"
        logger.warning("Similarity filter: %s; using all of them", message)
        return FilterResult(entries, tuple(scores.tolist()), 0.0, True, message)

    threshold = start
    keep = None
    for threshold in _levels(start, step, floor):
        keep = np.flatnonzero(scores >= threshold - 1e-12)
        if len(keep) >= min_entries:
            break

    warning = len(keep) < min_entries
    message = ''
    if warning:
        message = f"only {len(keep)} entries reach the floor threshold {floor}"
        logger.warning("Similarity filter: %s", message)
    logger.info("Similarity filter kept %d of %d entries at threshold %.2f",
                len(keep), len(entries), threshold)

    return FilterResult(
        entries=tuple(entries[i] for i in keep),
        similarities=tuple(float(scores[i]) for i in keep),
        threshold=threshold,
        warning=warning,
        message=message,
    )
