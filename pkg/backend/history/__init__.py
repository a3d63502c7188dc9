"""
Transfer History Module

Persistence of logged transfers, session bucketing and the feature
statistics used for similarity search.
"""

from .records import RECORD_FIELDS, entry_to_record, record_to_entry, encode_line, decode_line, decode_lines
from .features import FEATURE_NAMES, FeatureStats, raw_features, entry_features, feature_matrix
from .store import HistoryStore, load, append, prune_older_than
from .sessions import SESSION_WINDOW, assign_sessions

__all__ = [
    'RECORD_FIELDS',
    'entry_to_record',
    'record_to_entry',
    'encode_line',
    'decode_line',
    'decode_lines',
    'FEATURE_NAMES',
    'FeatureStats',
    'raw_features',
    'entry_features',
    'feature_matrix',
    'HistoryStore',
    'load',
    'append',
    'prune_older_than',
    'SESSION_WINDOW',
    'assign_sessions',
]
